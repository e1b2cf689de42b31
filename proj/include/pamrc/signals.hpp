#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace pamrc {

enum class ScheduleKind { sinusoid, uniform_random, external_sequence };

// Piecewise-constant control-pressure generator: u(t) = A*u_n + B held over
// [n*tau, (n+1)*tau). For the sinusoid mode u_n = sin(2*pi*tau/T * n).
struct InputSchedule {
    double magnitude_mpa = 0.2;  // A
    double bias_mpa = 0.3;       // B
    double tau_s = 0.1;          // input interval
    double period_s = 1.2;       // T, sinusoid mode only
    ScheduleKind kind = ScheduleKind::sinusoid;

    void validate() const;
};

// Normalized drive u_n for the sinusoid schedule. Exactly periodic when T/tau
// is an integer number of steps.
double gen_sine_sequence(long n, const InputSchedule& schedule);

// u(t) = A*u_n + B in MPa; throws on a negative result.
double to_pressure(double u_n, const InputSchedule& schedule);

struct LogisticParams {
    double a = 3.7;
    double y0 = 0.3;

    void validate() const;
};

double logistic_step(double y, const LogisticParams& p);

// Iterates the map `count` times after discarding `discard` transient steps.
std::vector<double> logistic_sequence(std::size_t count, const LogisticParams& p,
                                      std::size_t discard = 0);

struct RosslerParams {
    double a = 0.2;
    double b = 0.2;
    double c = 5.7;
    double dt = 0.01;             // integrator step (s)
    double sample_interval = 0.5; // teacher sampling interval (s)
    std::array<double, 3> y_init = {1.0, 1.0, 1.0};

    void validate() const;
};

std::array<double, 3> rossler_derivative(const std::array<double, 3>& y, const RosslerParams& p);

// One fixed-step RK4 advance over p.dt. Throws on non-finite state.
std::array<double, 3> rossler_step(const std::array<double, 3>& y, const RosslerParams& p);

// Samples the full state every sample_interval after discarding transient_s
// seconds of integration.
std::vector<std::array<double, 3>> rossler_trajectory(std::size_t samples, const RosslerParams& p,
                                                      double transient_s = 100.0);

// i.i.d. uniform pressures in [lo, hi); identical seed gives an identical
// sequence (splitmix64-counter stream).
std::vector<double> gen_uniform_random(std::size_t count, double lo, double hi,
                                       std::uint64_t seed);

}  // namespace pamrc
