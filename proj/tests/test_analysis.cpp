#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "pamrc/analysis.hpp"
#include "pamrc/errors.hpp"
#include "pamrc/signals.hpp"

using namespace pamrc;

TEST_CASE("periodogram finds a pure tone and satisfies Parseval") {
    const double dt = 0.01;
    const double f0 = 7.0;
    const int n = 4096;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] =
            std::sin(2.0 * std::numbers::pi * f0 * dt * static_cast<double>(i)) + 0.4;
    }
    const SpectrumEstimate s = power_spectrum(x, dt, SpectrumMethod::periodogram);
    CHECK(std::abs(dominant_frequency(s) - f0) <= s.resolution_hz);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    double integral = 0.0;
    for (double p : s.power) integral += p * s.resolution_hz;
    CHECK(integral == doctest::Approx(var).epsilon(0.01));
}

TEST_CASE("time reversal leaves the power spectrum unchanged") {
    std::vector<double> x;
    for (int i = 0; i < 512; ++i) {
        x.push_back(std::sin(0.37 * i) + 0.5 * std::sin(1.1 * i + 0.3));
    }
    std::vector<double> rev(x.rbegin(), x.rend());
    const SpectrumEstimate a = power_spectrum(x, 0.1, SpectrumMethod::periodogram);
    const SpectrumEstimate b = power_spectrum(rev, 0.1, SpectrumMethod::periodogram);
    for (std::size_t k = 0; k < a.power.size(); ++k) {
        CHECK(a.power[k] == doctest::Approx(b.power[k]).epsilon(1e-9));
    }
}

TEST_CASE("welch estimate locates the limit-cycle frequency") {
    const double dt = 0.1;
    std::vector<double> x;
    for (int i = 0; i < 3000; ++i) {
        x.push_back(std::sin(2.0 * std::numbers::pi * dt * static_cast<double>(i) / 1.2));
    }
    const SpectrumEstimate s = power_spectrum(x, dt, SpectrumMethod::welch);
    CHECK(dominant_frequency(s) == doctest::Approx(1.0 / 1.2).epsilon(0.05));
    CHECK(dominant_bin_share(s) > 0.5);
}

TEST_CASE("delay embedding") {
    std::vector<double> series = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto identity = delay_embed(series, 1, 1);
    REQUIRE(identity.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(identity[i][0] == series[i]);

    // Section identity: first coordinate reproduces the series.
    const auto pairs = delay_embed(series, 2, 2);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0][0] == 1.0);
    CHECK(pairs[0][1] == 3.0);

    // Logistic outputs land on the map's parabola.
    LogisticParams p;
    const auto traj = logistic_sequence(500, p, 50);
    const auto embedded = delay_embed(traj, 2, 1);
    double worst = 0.0;
    for (const auto& v : embedded) {
        worst = std::max(worst, std::abs(v[1] - p.a * v[0] * (1.0 - v[0])));
    }
    CHECK(worst < 0.02);

    std::vector<double> constant(10, 3.3);
    const auto flat = delay_embed(constant, 2, 1);
    for (const auto& v : flat) {
        CHECK(v[0] == 3.3);
        CHECK(v[1] == 3.3);
    }
    CHECK_THROWS_AS(delay_embed(series, 4, 2), ConfigError);
}

TEST_CASE("per-period minima counting") {
    const int period = 12;
    std::vector<double> sine;
    for (int i = 0; i < period * 10; ++i) {
        sine.push_back(std::sin(2.0 * std::numbers::pi * i / period));
    }
    CHECK(local_minima_per_period(sine, period).typical_count() == 1);

    // Second harmonic strong enough to carve a second dip per period. The
    // dense continuous oracle counts the same two minima.
    auto two_dip = [](double phase) {
        return std::sin(phase) + 0.8 * std::sin(2.0 * phase + 0.7);
    };
    std::vector<double> series;
    const int steps = 48;
    for (int i = 0; i < steps * 12; ++i) {
        series.push_back(two_dip(2.0 * std::numbers::pi * i / steps));
    }
    int dense_minima = 0;
    const int fine = 20000;
    for (int i = 1; i + 1 < fine; ++i) {
        const double a = two_dip(2.0 * std::numbers::pi * (i - 1) / fine);
        const double b = two_dip(2.0 * std::numbers::pi * i / fine);
        const double c = two_dip(2.0 * std::numbers::pi * (i + 1) / fine);
        if (b < a && b < c) ++dense_minima;
    }
    CHECK(dense_minima == 2);
    CHECK(local_minima_per_period(series, steps).typical_count() == 2);

    std::vector<double> constant(period * 4, 1.0);
    CHECK(local_minima_per_period(constant, period).typical_count() == 0);
}

TEST_CASE("plateau minima collapse to their midpoint") {
    std::vector<double> series = {3.0, 1.0, 1.0, 1.0, 2.0, 3.0};
    const auto idx = local_minima_indices(series);
    REQUIRE(idx.size() == 1);
    CHECK(idx[0] == 2);
}

TEST_CASE("minima counts are invariant under positive affine maps") {
    std::vector<double> series;
    for (int i = 0; i < 240; ++i) {
        series.push_back(std::sin(0.4 * i) + 0.3 * std::sin(1.3 * i));
    }
    std::vector<double> mapped;
    for (double v : series) mapped.push_back(4.2 * v + 17.0);
    CHECK(local_minima_indices(series) == local_minima_indices(mapped));
}

TEST_CASE("logistic bifurcation diagram shows the first period doubling") {
    std::vector<double> params;
    std::vector<std::vector<double>> runs;
    for (double a = 2.8; a <= 3.44; a += 0.02) {
        LogisticParams p;
        p.a = a;
        params.push_back(a);
        runs.push_back(logistic_sequence(400, p, 4000));
    }
    const BifurcationDiagram d =
        bifurcation_diagram(params, runs, 0.5, AttractorSampling::stroboscopic);

    auto distinct = [](const std::vector<double>& samples) {
        std::vector<double> reps;
        for (double v : samples) {
            bool found = false;
            for (double r : reps) found = found || std::abs(r - v) < 1e-3;
            if (!found) reps.push_back(v);
        }
        return static_cast<int>(reps.size());
    };
    for (std::size_t i = 0; i < d.parameter.size(); ++i) {
        if (d.parameter[i] < 2.98) {
            CHECK(distinct(d.samples[i]) == 1);
        } else if (d.parameter[i] > 3.02 && d.parameter[i] < 3.42) {
            CHECK(distinct(d.samples[i]) == 2);
        }
    }
}

TEST_CASE("single-parameter diagram") {
    std::vector<double> params = {1.0};
    std::vector<std::vector<double>> runs = {{0.2, 0.1, 0.3, 0.1, 0.4}};
    const BifurcationDiagram d =
        bifurcation_diagram(params, runs, 0.0, AttractorSampling::local_minima);
    REQUIRE(d.parameter.size() == 1);
    CHECK(!d.samples[0].empty());
}

TEST_CASE("one-step map error oracle cases") {
    const double a = 3.7;
    auto truth = [a](double y) { return a * y * (1.0 - y); };
    const auto grid = linspace(0.05, 0.95, 91);

    // Truth readout over exact quadratic features.
    auto oracle_map = [a](double y) { return a * y - a * y * y; };
    CHECK(one_step_map_error(oracle_map, truth, grid) < 1e-6);

    // Zero weights predict zero everywhere; the worst case is the map's peak.
    auto zero_map = [](double) { return 0.0; };
    CHECK(one_step_map_error(zero_map, truth, grid) == doctest::Approx(a * 0.25).epsilon(1e-3));
}

TEST_CASE("spearman rank correlation") {
    std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> inc = {2.0, 2.5, 7.0, 7.5, 100.0};
    std::vector<double> dec = {5.0, 4.0, 3.0, 2.0, 1.0};
    CHECK(spearman(x, inc) == doctest::Approx(1.0));
    CHECK(spearman(x, dec) == doctest::Approx(-1.0));
}
