#pragma once

#include <cstdint>
#include <string_view>

namespace pamrc {

// Counter-based splitmix64 stream. The n-th draw depends only on (seed, n),
// so sequences are identical across platforms and runs. Run metadata records
// the algorithm name "splitmix64-counter".
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();
    double uniform01();                       // [0, 1)
    double uniform(double lo, double hi);     // [lo, hi)
    double gaussian(double stddev);           // mean 0, Box-Muller
    std::uint64_t uniform_index(std::uint64_t n);  // [0, n)

    // Derived stream: independent sub-generator for a named component.
    CounterRng stream(std::string_view name) const;

    static std::uint64_t hash_name(std::string_view name);  // FNV-1a 64
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pamrc
