#include "pamrc/pam.hpp"

#include <cmath>
#include <string>

#include "pamrc/errors.hpp"

namespace pamrc {

namespace {

constexpr double kOuterFitSlope = -0.3382;   // outer diameter vs length, mm/mm
constexpr double kOuterFitIntercept = 47.525;  // mm

}  // namespace

double PamGeometry::rubber_volume_mm3() const {
    const double ro = outer_d0_mm / 2.0;
    const double ri = inner_d0_mm / 2.0;
    return std::numbers::pi * (ro * ro - ri * ri) * l0_mm;
}

void PamGeometry::validate() const {
    if (!(outer_d0_mm > inner_d0_mm) || !(inner_d0_mm > 0.0)) {
        throw ConfigError("geometry: requires outer_d0 > inner_d0 > 0");
    }
    if (!(braid_angle_rad > 0.0) || !(braid_angle_rad < std::numbers::pi / 2.0)) {
        throw ConfigError("geometry: braid angle outside (0, pi/2)");
    }
    if (!(l0_mm > 0.0)) {
        throw ConfigError("geometry: equilibrium length must be positive");
    }
    if (!(schulze_scale > 0.0)) {
        throw ConfigError("geometry: schulze_scale must be positive");
    }
}

double outer_radius(double length_mm, const PamGeometry&) {
    if (!(length_mm > 0.0)) {
        throw SimulationBlowup("outer_radius: non-positive length");
    }
    const double diameter = kOuterFitSlope * length_mm + kOuterFitIntercept;
    if (!(diameter > 0.0)) {
        throw SimulationBlowup("outer_radius: fit gives non-positive radius at length " +
                               std::to_string(length_mm) + " mm");
    }
    return diameter / 2.0;
}

double inner_radius(double length_mm, const PamGeometry& geom) {
    if (length_mm >= geom.l0_mm) {
        return geom.r0_mm();
    }
    const double r_out = outer_radius(length_mm, geom);
    // Rubber volume evaluated from the fit at l0 so the constant-volume
    // branch meets the extension branch continuously.
    const double r_out0 = outer_radius(geom.l0_mm, geom);
    const double fit_volume_over_pi =
        (r_out0 * r_out0 - geom.r0_mm() * geom.r0_mm()) * geom.l0_mm;
    const double radicand = r_out * r_out - fit_volume_over_pi / length_mm;
    if (radicand < 0.0) {
        throw SimulationBlowup("inner_radius: length " + std::to_string(length_mm) +
                               " mm outside the valid contraction range");
    }
    return std::sqrt(radicand);
}

double thickness(double length_mm, const PamGeometry& geom) {
    return outer_radius(length_mm, geom) - inner_radius(length_mm, geom);
}

void ResistanceCalib::validate() const {
    if (!(gain > 0.0)) {
        throw ConfigError("resistance calibration: gain must be positive");
    }
}

double resistance_of(double thickness_mm, const ResistanceCalib& calib) {
    return calib.gain * thickness_mm + calib.offset;
}

double schulze_force(double length_mm, double pressure_mpa, const PamGeometry& geom) {
    const double strain = (geom.l0_mm - length_mm) / geom.l0_mm;
    const double c = 1.0 - strain;
    const double braid = 3.0 * c * c * std::cos(geom.braid_angle_rad) - 1.0;
    return geom.schulze_scale * std::numbers::pi * geom.inner_d0_mm * pressure_mpa / 4.0 /
           std::sin(geom.braid_angle_rad) * braid;
}

void PamDynParams::validate() const {
    if (a_elas < 0.0 || b_visc < 0.0 || c_coul < 0.0 || d_force < 0.0) {
        throw ConfigError("dynamics: coefficients must be non-negative");
    }
    if (!(sgn_smooth_delta > 0.0)) {
        throw ConfigError("dynamics: sgn_smooth_delta must be positive");
    }
    if (!(pressure_lag_tau > 0.0)) {
        throw ConfigError("dynamics: pressure_lag_tau must be positive");
    }
    if (!(integrator_dt > 0.0)) {
        throw ConfigError("dynamics: integrator_dt must be positive");
    }
}

namespace {

double acceleration(double length_mm, double velocity, double pressure_mpa, double f_ex_n,
                    const PamDynParams& dp, const PamGeometry& geom) {
    const double x = length_mm - geom.l0_mm;
    const double friction = dp.c_coul * std::tanh(velocity / dp.sgn_smooth_delta);
    const double net_force = f_ex_n - schulze_force(length_mm, pressure_mpa, geom);
    return -dp.a_elas * x - dp.b_visc * velocity - friction + dp.d_force * net_force;
}

}  // namespace

PamState pam_step(const PamState& state, double u_control_mpa, double f_ex_n, double dt_s,
                  const PamDynParams& dp, const PamGeometry& geom) {
    if (!(dt_s > 0.0)) {
        throw ConfigError("pam_step: dt must be positive");
    }
    // Exact lag solution p(t) = u + (p0 - u) exp(-t/tau) at the stage times.
    const double p0 = state.measured_pressure_mpa;
    const double decay_half = std::exp(-0.5 * dt_s / dp.pressure_lag_tau);
    const double p_half = u_control_mpa + (p0 - u_control_mpa) * decay_half;
    const double p_full = u_control_mpa + (p0 - u_control_mpa) * decay_half * decay_half;

    const double l = state.length_mm;
    const double v = state.velocity_mm_s;

    const double a1 = acceleration(l, v, p0, f_ex_n, dp, geom);
    const double l2 = l + 0.5 * dt_s * v;
    const double v2 = v + 0.5 * dt_s * a1;
    const double a2 = acceleration(l2, v2, p_half, f_ex_n, dp, geom);
    const double l3 = l + 0.5 * dt_s * v2;
    const double v3 = v + 0.5 * dt_s * a2;
    const double a3 = acceleration(l3, v3, p_half, f_ex_n, dp, geom);
    const double l4 = l + dt_s * v3;
    const double v4 = v + dt_s * a3;
    const double a4 = acceleration(l4, v4, p_full, f_ex_n, dp, geom);

    PamState next;
    next.length_mm = l + dt_s / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    next.velocity_mm_s = v + dt_s / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    next.measured_pressure_mpa = p_full;

    if (!std::isfinite(next.length_mm) || !std::isfinite(next.velocity_mm_s) ||
        next.length_mm < 0.5 * geom.l0_mm || next.length_mm > 1.5 * geom.l0_mm) {
        throw SimulationBlowup("pam_step: length " + std::to_string(next.length_mm) +
                               " mm left the valid band [0.5*l0, 1.5*l0]");
    }
    return next;
}

double static_balance_length(double pressure_mpa, double f_ex_n, const PamDynParams& dp,
                             const PamGeometry& geom) {
    // g(l) = a_elas*(l - l0) + d_force*(F_pre(l, p) - F_ex), strictly
    // increasing in l, so Newton from l0 converges fast.
    double l = geom.l0_mm;
    for (int it = 0; it < 200; ++it) {
        const double g = dp.a_elas * (l - geom.l0_mm) +
                         dp.d_force * (schulze_force(l, pressure_mpa, geom) - f_ex_n);
        const double h = 1e-6;
        const double gp = (dp.a_elas * (l + h - geom.l0_mm) +
                           dp.d_force * (schulze_force(l + h, pressure_mpa, geom) - f_ex_n) - g) /
                          h;
        const double step = g / gp;
        l -= step;
        if (std::abs(step) < 1e-12) {
            return l;
        }
    }
    throw NumericalError("static_balance_length: Newton iteration did not converge");
}

SensorFrame sample_sensors(const PamState& state, double f_ex_n, const PamGeometry& geom,
                           const ResistanceCalib& calib, const NoiseConfig& noise,
                           CounterRng& rng) {
    SensorFrame f;
    f.pressure_mpa = state.measured_pressure_mpa + rng.gaussian(noise.std_pressure_mpa);
    f.length_mm = state.length_mm + rng.gaussian(noise.std_length_mm);
    f.resistance =
        resistance_of(thickness(state.length_mm, geom), calib) + rng.gaussian(noise.std_resistance);
    f.load_n = f_ex_n + rng.gaussian(noise.std_load_n);
    return f;
}

PamSimulator::PamSimulator(const PamGeometry& geom, const PamDynParams& params,
                           const ResistanceCalib& calib, const NoiseConfig& noise,
                           CounterRng noise_rng)
    : geom_(geom), params_(params), calib_(calib), noise_(noise), rng_(noise_rng) {
    geom_.validate();
    params_.validate();
    calib_.validate();
    state_.length_mm = geom_.l0_mm;
}

void PamSimulator::run(double u_control_mpa, double f_ex_n, double duration_s) {
    const double dt = params_.integrator_dt;
    long steps = static_cast<long>(std::llround(duration_s / dt));
    if (steps < 1) steps = 1;
    for (long i = 0; i < steps; ++i) {
        state_ = pam_step(state_, u_control_mpa, f_ex_n, dt, params_, geom_);
    }
    time_s_ += static_cast<double>(steps) * dt;
}

SensorFrame PamSimulator::sample(double f_ex_n) {
    return sample_sensors(state_, f_ex_n, geom_, calib_, noise_, rng_);
}

SensorFrame PamSimulator::clean_sample(double f_ex_n) const {
    SensorFrame f;
    f.pressure_mpa = state_.measured_pressure_mpa;
    f.length_mm = state_.length_mm;
    f.resistance = resistance_of(thickness(state_.length_mm, geom_), calib_);
    f.load_n = f_ex_n;
    return f;
}

}  // namespace pamrc
