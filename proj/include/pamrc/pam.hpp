#pragma once

#include <cstdint>
#include <numbers>

#include "pamrc/rng.hpp"

namespace pamrc {

// Geometry of the braided tube. Lengths in mm, angle in rad. The derived
// quantities (rubber volume, equilibrium inner radius) follow from the
// constant-volume constraint.
struct PamGeometry {
    double l0_mm = 108.0;        // equilibrium length
    double outer_d0_mm = 11.0;   // equilibrium outer diameter
    double inner_d0_mm = 9.0;    // equilibrium inner diameter
    double braid_angle_rad = std::numbers::pi / 6.0;
    // Unit/fit calibration applied to the Schulze tension. The printed
    // formula is short one length dimension; this factor sets the absolute
    // force scale while leaving the strain and pressure structure intact.
    double schulze_scale = 1.0;

    double rubber_volume_mm3() const;  // pi*((Do/2)^2 - (Di/2)^2)*l0
    double r0_mm() const { return inner_d0_mm / 2.0; }

    void validate() const;
};

// Outer radius from the linear length fit; the fit value is an outer
// diameter in mm (it evaluates to 10.999 at l0 = 108), so half is returned.
double outer_radius(double length_mm, const PamGeometry& geom);

// Inner radius from constant rubber volume; constant r0 on the extension side.
double inner_radius(double length_mm, const PamGeometry& geom);

// Wall thickness R - r; peaks at the equilibrium length.
double thickness(double length_mm, const PamGeometry& geom);

// Affine thickness-to-resistance calibration, gain > 0.
struct ResistanceCalib {
    double gain = 1.0;    // c1
    double offset = 0.0;  // c0

    void validate() const;
};

double resistance_of(double thickness_mm, const ResistanceCalib& calib);

// Contraction force (N) of the idealized braided cylinder at pressure p,
// linear in p, vanishing at strain 1 - (3 cos theta0)^(-1/2).
double schulze_force(double length_mm, double pressure_mpa, const PamGeometry& geom);

// Length-dynamics coefficients. Acceleration is in mm/s^2:
//   l_dd = -a_elas*(l - l0) - b_visc*l_d - c_coul*tanh(l_d/delta)
//          + d_force*(F_ex - F_pre(l, p))
struct PamDynParams {
    double a_elas = 6353.0;          // 1/s^2
    double b_visc = 80.05;           // 1/s
    double c_coul = 10.0;            // mm/s^2
    double d_force = 0.635;          // mm/(s^2 N)
    double sgn_smooth_delta = 0.1;   // mm/s, smoothed-sign velocity scale
    double pressure_lag_tau = 0.02;  // s, first-order measured-pressure lag
    double integrator_dt = 1e-3;     // s, inner ODE substep

    void validate() const;
};

struct PamState {
    double length_mm = 108.0;
    double velocity_mm_s = 0.0;
    double measured_pressure_mpa = 0.0;
};

// One integration step of dt seconds: the measured pressure advances along
// its exact first-order-lag solution (evaluated analytically at the RK4
// stage times), and (length, velocity) advance by classical RK4. Throws
// SimulationBlowup when the length leaves [0.5*l0, 1.5*l0].
PamState pam_step(const PamState& state, double u_control_mpa, double f_ex_n, double dt_s,
                  const PamDynParams& params, const PamGeometry& geom);

// Terminal length of the static balance a_elas*(l - l0) = d_force*(F_ex -
// F_pre(l, p)) solved by Newton iteration. Independent of the integrator.
double static_balance_length(double pressure_mpa, double f_ex_n, const PamDynParams& params,
                             const PamGeometry& geom);

// Per-channel additive Gaussian noise levels.
struct NoiseConfig {
    double std_pressure_mpa = 0.0;
    double std_length_mm = 0.0;
    double std_resistance = 0.0;
    double std_load_n = 0.0;
};

// The four sampled channels in fixed order (pressure, length, resistance, load).
struct SensorFrame {
    double pressure_mpa = 0.0;
    double length_mm = 0.0;
    double resistance = 0.0;
    double load_n = 0.0;
};

SensorFrame sample_sensors(const PamState& state, double f_ex_n, const PamGeometry& geom,
                           const ResistanceCalib& calib, const NoiseConfig& noise,
                           CounterRng& rng);

// Stateful wrapper: owns the muscle state, clock and the sensor-noise stream.
class PamSimulator {
public:
    PamSimulator(const PamGeometry& geom, const PamDynParams& params,
                 const ResistanceCalib& calib, const NoiseConfig& noise, CounterRng noise_rng);

    // Integrates `duration_s` seconds of held control pressure and load.
    void run(double u_control_mpa, double f_ex_n, double duration_s);
    SensorFrame sample(double f_ex_n);
    SensorFrame clean_sample(double f_ex_n) const;  // noise-free channels

    const PamState& state() const { return state_; }
    void set_state(const PamState& s) { state_ = s; }
    double time_s() const { return time_s_; }
    const PamGeometry& geometry() const { return geom_; }
    const PamDynParams& params() const { return params_; }
    const ResistanceCalib& calib() const { return calib_; }

private:
    PamGeometry geom_;
    PamDynParams params_;
    ResistanceCalib calib_;
    NoiseConfig noise_;
    CounterRng rng_;
    PamState state_;
    double time_s_ = 0.0;
};

}  // namespace pamrc
