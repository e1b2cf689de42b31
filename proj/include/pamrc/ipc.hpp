#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pamrc {

// Legendre polynomial of the given degree scaled to unit variance under the
// uniform measure on [-1, 1] (P1 becomes sqrt(3)*x and so on).
double legendre(int degree, double x);

struct BasisFactor {
    int delay = 0;   // k >= 0
    int degree = 1;  // d >= 1
};

// Product of Legendre factors over distinct delays.
struct BasisTerm {
    std::vector<BasisFactor> factors;  // sorted by ascending delay

    int total_degree() const;
    int max_delay() const;
    std::string label() const;  // e.g. "P2(u[n-0])*P1(u[n-1])"
};

// All terms with total degree in [1, K] and delays in [0, D-1], distinct
// delays within a term; ordered by total degree, then lexicographic delays,
// then lexicographic degrees. Throws above 10^6 terms.
std::vector<BasisTerm> enumerate_basis(int max_delay_d, int max_degree_k);

// 1 - min_w ||z - Xw||^2 / ||z - mean(z)||^2 via rank-revealing projection.
double capacity(const Eigen::MatrixXd& states, const Eigen::VectorXd& target);

struct CapacityEntry {
    BasisTerm term;
    double raw = 0.0;
    double threshold = 0.0;
    double thresholded = 0.0;  // raw if raw > threshold else 0
};

struct CapacitySpectrum {
    std::vector<CapacityEntry> entries;
    double total = 0.0;           // sum of thresholded capacities
    int feature_count = 0;        // linearly independent input-driven features
    int rank = 0;                 // rank of the state matrix incl. bias
    long n_samples = 0;
    bool degenerate_warning = false;  // every entry fell below threshold
    std::map<int, double> by_degree;     // total degree -> capacity sum
    std::map<int, double> by_max_delay;  // max delay -> capacity sum
};

struct IpcConfig {
    int max_delay = 10;   // D
    int max_degree = 4;   // K
    int surrogates = 100;
    double threshold_sigmas = 4.0;
    std::uint64_t seed = 1;

    void validate() const;
};

// Capacities of every enumerated basis term for states driven by the i.i.d.
// input u (u_n in [-1, 1]); rows of `states` are aligned with u (washout
// already removed by the caller). Entries below the per-term cyclic-shift
// surrogate threshold are zeroed before summation.
CapacitySpectrum total_ipc(const Eigen::MatrixXd& states, std::span<const double> input_u,
                           const IpcConfig& cfg);

}  // namespace pamrc
