#include "pamrc/signals.hpp"

#include <cmath>
#include <numbers>

#include "pamrc/errors.hpp"
#include "pamrc/rng.hpp"

namespace pamrc {

void InputSchedule::validate() const {
    if (!(tau_s > 0.0)) {
        throw ConfigError("input schedule: tau must be positive");
    }
    if (kind == ScheduleKind::sinusoid && !(period_s > 0.0)) {
        throw ConfigError("input schedule: sinusoid requires period T > 0");
    }
    if (bias_mpa - std::abs(magnitude_mpa) < 0.0 && kind == ScheduleKind::sinusoid) {
        // The sinusoid visits u_n = -1; A and B must keep pressures physical.
        throw ConfigError("input schedule: B - |A| < 0 would emit negative pressure");
    }
}

double gen_sine_sequence(long n, const InputSchedule& schedule) {
    if (schedule.kind != ScheduleKind::sinusoid) {
        throw ConfigError("gen_sine_sequence: schedule is not sinusoid");
    }
    if (!(schedule.period_s > 0.0)) {
        throw ConfigError("gen_sine_sequence: period T must be positive");
    }
    const double steps_per_period = schedule.period_s / schedule.tau_s;
    const double rounded = std::round(steps_per_period);
    if (rounded > 0 && std::abs(steps_per_period - rounded) < 1e-9 * steps_per_period) {
        // Integer period: reduce the index so the sequence is exactly periodic.
        const long p = static_cast<long>(rounded);
        const long m = ((n % p) + p) % p;
        return std::sin(2.0 * std::numbers::pi * static_cast<double>(m) / rounded);
    }
    return std::sin(2.0 * std::numbers::pi * schedule.tau_s / schedule.period_s *
                    static_cast<double>(n));
}

double to_pressure(double u_n, const InputSchedule& schedule) {
    const double p = schedule.magnitude_mpa * u_n + schedule.bias_mpa;
    if (p < 0.0) {
        throw ConfigError("to_pressure: A*u + B is negative; adjust magnitude/bias");
    }
    return p;
}

void LogisticParams::validate() const {
    if (a < 0.0 || a > 4.0) {
        throw ConfigError("logistic map: parameter a outside [0, 4]");
    }
    if (y0 < 0.0 || y0 > 1.0) {
        throw ConfigError("logistic map: y0 outside [0, 1]");
    }
}

double logistic_step(double y, const LogisticParams& p) {
    return p.a * y * (1.0 - y);
}

std::vector<double> logistic_sequence(std::size_t count, const LogisticParams& p,
                                      std::size_t discard) {
    p.validate();
    double y = p.y0;
    for (std::size_t i = 0; i < discard; ++i) y = logistic_step(y, p);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(y);
        y = logistic_step(y, p);
    }
    return out;
}

void RosslerParams::validate() const {
    if (!(dt > 0.0)) {
        throw ConfigError("Rossler: dt must be positive");
    }
    const double ratio = sample_interval / dt;
    if (!(sample_interval > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        throw ConfigError("Rossler: sample_interval must be a positive integer multiple of dt");
    }
}

std::array<double, 3> rossler_derivative(const std::array<double, 3>& y, const RosslerParams& p) {
    return {-y[1] - y[2], y[0] + p.a * y[1], p.b + y[0] * y[2] - p.c * y[2]};
}

std::array<double, 3> rossler_step(const std::array<double, 3>& y, const RosslerParams& p) {
    auto axpy = [](const std::array<double, 3>& base, double s, const std::array<double, 3>& d) {
        return std::array<double, 3>{base[0] + s * d[0], base[1] + s * d[1], base[2] + s * d[2]};
    };
    const auto k1 = rossler_derivative(y, p);
    const auto k2 = rossler_derivative(axpy(y, 0.5 * p.dt, k1), p);
    const auto k3 = rossler_derivative(axpy(y, 0.5 * p.dt, k2), p);
    const auto k4 = rossler_derivative(axpy(y, p.dt, k3), p);
    std::array<double, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[i] = y[i] + p.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) {
            throw NumericalError("Rossler integration diverged");
        }
    }
    return out;
}

std::vector<std::array<double, 3>> rossler_trajectory(std::size_t samples, const RosslerParams& p,
                                                      double transient_s) {
    p.validate();
    std::array<double, 3> y = p.y_init;
    const long transient_steps = static_cast<long>(std::llround(transient_s / p.dt));
    for (long i = 0; i < transient_steps; ++i) y = rossler_step(y, p);
    const long per_sample = static_cast<long>(std::llround(p.sample_interval / p.dt));
    std::vector<std::array<double, 3>> out;
    out.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        out.push_back(y);
        for (long i = 0; i < per_sample; ++i) y = rossler_step(y, p);
    }
    return out;
}

std::vector<double> gen_uniform_random(std::size_t count, double lo, double hi,
                                       std::uint64_t seed) {
    if (!(lo < hi)) {
        throw ConfigError("gen_uniform_random: requires lo < hi");
    }
    CounterRng rng(seed);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(rng.uniform(lo, hi));
    return out;
}

}  // namespace pamrc
