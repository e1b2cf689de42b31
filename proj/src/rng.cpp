#include "pamrc/rng.hpp"

#include <cmath>
#include <numbers>

namespace pamrc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::next_u64() {
    return splitmix64(seed_ + 0x632BE59BD9B4E019ULL * ++counter_);
}

double CounterRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double CounterRng::gaussian(double stddev) {
    if (have_spare_) {
        have_spare_ = false;
        return spare_ * stddev;
    }
    // Box-Muller on (0,1] x [0,1) uniforms.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a) * stddev;
}

std::uint64_t CounterRng::uniform_index(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
}

CounterRng CounterRng::stream(std::string_view name) const {
    return CounterRng(mix(seed_, hash_name(name)));
}

std::uint64_t CounterRng::hash_name(std::string_view name) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t CounterRng::mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

}  // namespace pamrc
