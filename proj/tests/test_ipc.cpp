#include <cmath>

#include <doctest.h>

#include "pamrc/errors.hpp"
#include "pamrc/ipc.hpp"
#include "pamrc/rng.hpp"

using namespace pamrc;

namespace {

// Delay-line states: row t holds (u_t, u_{t-1}, ..., u_{t-taps+1}, 1).
Eigen::MatrixXd delay_line(std::span<const double> u, int taps) {
    const long n = static_cast<long>(u.size());
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, taps + 1);
    for (long t = 0; t < n; ++t) {
        for (int k = 0; k < taps; ++k) {
            x(t, k) = t - k >= 0 ? u[static_cast<std::size_t>(t - k)] : 0.0;
        }
        x(t, taps) = 1.0;
    }
    return x;
}

std::vector<double> iid_uniform(long n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<double> u(static_cast<std::size_t>(n));
    for (auto& v : u) v = rng.uniform(-1.0, 1.0);
    return u;
}

}  // namespace

TEST_CASE("normalized Legendre values") {
    CHECK(legendre(1, 0.5) == doctest::Approx(std::sqrt(3.0) * 0.5));
    CHECK(legendre(2, 0.5) ==
          doctest::Approx(std::sqrt(5.0) * 0.5 * (3.0 * 0.25 - 1.0)));
    CHECK(legendre(0, -0.3) == doctest::Approx(1.0));

    // Unit variance and mutual orthogonality under the uniform measure.
    CounterRng rng(99);
    double var1 = 0.0, var2 = 0.0, var3 = 0.0, cross12 = 0.0, cross13 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        const double l1 = legendre(1, x);
        const double l2 = legendre(2, x);
        const double l3 = legendre(3, x);
        var1 += l1 * l1;
        var2 += l2 * l2;
        var3 += l3 * l3;
        cross12 += l1 * l2;
        cross13 += l1 * l3;
    }
    CHECK(var1 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(var2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(var3 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(cross12 / n) < 0.01);
    CHECK(std::abs(cross13 / n) < 0.01);
}

TEST_CASE("basis enumeration") {
    CHECK(enumerate_basis(1, 1).size() == 1);
    CHECK(enumerate_basis(2, 1).size() == 2);

    const auto terms = enumerate_basis(2, 2);
    REQUIRE(terms.size() == 5);
    CHECK(terms[0].label() == "P1(u[n-0])");
    CHECK(terms[1].label() == "P1(u[n-1])");
    CHECK(terms[2].label() == "P2(u[n-0])");
    CHECK(terms[3].label() == "P2(u[n-1])");
    CHECK(terms[4].label() == "P1(u[n-0])*P1(u[n-1])");

    // Monomial count in D variables with total degree in [1, K].
    CHECK(enumerate_basis(10, 4).size() == 1000);
    CHECK_THROWS_AS(enumerate_basis(200, 8), ConfigError);
}

TEST_CASE("capacity of a reproduced column is one") {
    const auto u = iid_uniform(4000, 3);
    const Eigen::MatrixXd x = delay_line(u, 4);
    const Eigen::VectorXd z = x.col(2);
    CHECK(capacity(x, z) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("capacity of independent noise stays near p/n") {
    const auto u = iid_uniform(10000, 4);
    const Eigen::MatrixXd x = delay_line(u, 19);
    CounterRng rng(5);
    Eigen::VectorXd z(10000);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.uniform(-1.0, 1.0);
    const double c = capacity(x, z);
    CHECK(c >= 0.0);
    CHECK(c < 0.01);  // expectation is (p-1)/n = 0.0019
}

TEST_CASE("delay line reconstructs exactly its taps") {
    const long n = 20000;
    const auto u = iid_uniform(n, 6);
    const int taps = 5;
    const Eigen::MatrixXd x = delay_line(u, taps);
    for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd z(n - 10);
        for (long t = 10; t < n; ++t) {
            z[t - 10] = legendre(1, u[static_cast<std::size_t>(t - k)]);
        }
        const double c = capacity(x.bottomRows(n - 10), z);
        if (k < taps) {
            CHECK(c == doctest::Approx(1.0).epsilon(1e-9));
        } else {
            CHECK(c < 0.01);
        }
    }
}

TEST_CASE("total IPC of a delay line saturates its rank bound") {
    const long n = 20000;
    const auto u = iid_uniform(n, 7);
    const int taps = 5;
    const Eigen::MatrixXd x = delay_line(u, taps);
    IpcConfig cfg;
    cfg.max_delay = 8;
    cfg.max_degree = 3;
    cfg.seed = 11;
    const CapacitySpectrum s = total_ipc(x, u, cfg);
    CHECK(s.feature_count == taps);
    CHECK(s.total >= 0.95 * taps);
    CHECK(s.total <= taps + 0.01);
    // Degree-1 dominates; the delay marginal stops at the line depth.
    CHECK(s.by_degree.at(1) == doctest::Approx(s.total).epsilon(0.01));
    // Rare surrogate-threshold false positives carry only p/n-scale mass.
    double above = 0.0;
    for (const auto& [delay, v] : s.by_max_delay) {
        if (delay >= taps) above += v;
    }
    CHECK(above < 0.01);
}

TEST_CASE("memory capacity equals the degree-one slice") {
    const long n = 12000;
    const auto u = iid_uniform(n, 8);
    const Eigen::MatrixXd x = delay_line(u, 4);
    IpcConfig cfg;
    cfg.max_delay = 6;
    cfg.max_degree = 3;
    cfg.seed = 12;
    const CapacitySpectrum s = total_ipc(x, u, cfg);
    double degree_one = 0.0;
    for (const auto& e : s.entries) {
        if (e.term.total_degree() == 1) degree_one += e.thresholded;
    }
    CHECK(s.by_degree.at(1) == doctest::Approx(degree_one));
}

TEST_CASE("capacities are invariant under affine feature rescaling") {
    const long n = 8000;
    const auto u = iid_uniform(n, 9);
    Eigen::MatrixXd x = delay_line(u, 3);
    IpcConfig cfg;
    cfg.max_delay = 4;
    cfg.max_degree = 2;
    cfg.seed = 13;
    const CapacitySpectrum a = total_ipc(x, u, cfg);
    x.col(1) = 3.5 * x.col(1).array() + 0.25;  // affine map of one feature
    const CapacitySpectrum b = total_ipc(x, u, cfg);
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-9));
}

TEST_CASE("thresholded total is stable under longer evaluation") {
    const int taps = 4;
    IpcConfig cfg;
    cfg.max_delay = 6;
    cfg.max_degree = 2;
    cfg.seed = 14;
    const auto u_short = iid_uniform(8000, 10);
    const auto u_long = iid_uniform(16000, 10);
    const double t_short = total_ipc(delay_line(u_short, taps), u_short, cfg).total;
    const double t_long = total_ipc(delay_line(u_long, taps), u_long, cfg).total;
    CHECK(t_long >= 0.95 * t_short);
}

TEST_CASE("zero-variance target is rejected") {
    const auto u = iid_uniform(1000, 15);
    const Eigen::MatrixXd x = delay_line(u, 2);
    const Eigen::VectorXd z = Eigen::VectorXd::Constant(1000, 0.7);
    CHECK_THROWS_AS(capacity(x, z), NumericalError);
}
