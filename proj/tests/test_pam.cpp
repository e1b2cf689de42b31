#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "pamrc/errors.hpp"
#include "pamrc/pam.hpp"
#include "pamrc/signals.hpp"

using namespace pamrc;

namespace {

PamGeometry calibrated_geometry() {
    PamGeometry g;
    g.schulze_scale = 70.8;
    return g;
}

PamDynParams calibrated_dynamics() {
    PamDynParams p;
    p.c_coul = 1000.0;
    p.d_force = 56.0;
    p.sgn_smooth_delta = 1.5;
    return p;
}

// Simulate until the velocity settles inside the stiction band.
PamState settle(const PamState& start, double u, double f_ex, const PamDynParams& dyn,
                const PamGeometry& geom, double duration_s = 20.0) {
    PamState s = start;
    const long steps = static_cast<long>(duration_s / dyn.integrator_dt);
    for (long i = 0; i < steps; ++i) {
        s = pam_step(s, u, f_ex, dyn.integrator_dt, dyn, geom);
    }
    return s;
}

}  // namespace

TEST_CASE("rubber volume and equilibrium radius") {
    PamGeometry g;
    CHECK(g.rubber_volume_mm3() == doctest::Approx(1080.0 * std::numbers::pi));
    CHECK(g.r0_mm() == doctest::Approx(4.5));
}

TEST_CASE("outer radius from the length fit") {
    PamGeometry g;
    CHECK(2.0 * outer_radius(108.0, g) == doctest::Approx(10.9994));
    CHECK(outer_radius(108.0, g) == doctest::Approx(5.4997));
    CHECK(outer_radius(100.0, g) == doctest::Approx(6.8525));
    CHECK(outer_radius(100.0, g) > outer_radius(104.0, g));
    CHECK(outer_radius(104.0, g) > outer_radius(112.0, g));
    CHECK_THROWS_AS(outer_radius(200.0, g), SimulationBlowup);
}

TEST_CASE("inner radius branches") {
    PamGeometry g;
    CHECK(inner_radius(108.0, g) == doctest::Approx(4.5));
    CHECK(inner_radius(115.0, g) == doctest::Approx(4.5));
    // Nominal-volume evaluation; the branch-consistent volume used by the
    // model shifts this by a fraction of a micrometre.
    const double expected = std::sqrt(6.8525 * 6.8525 - 1080.0 * std::numbers::pi /
                                                            (100.0 * std::numbers::pi));
    CHECK(inner_radius(100.0, g) == doctest::Approx(expected).epsilon(1e-3));
    // Deep contraction where the constant-volume constraint is unsatisfiable.
    CHECK_THROWS_AS(inner_radius(1.5, g), SimulationBlowup);
}

TEST_CASE("thickness peaks at the equilibrium length") {
    PamGeometry g;
    CHECK(thickness(108.0, g) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(thickness(103.0, g) < thickness(108.0, g));
    CHECK(thickness(113.0, g) < thickness(108.0, g));
    CHECK(std::abs(thickness(108.0 - 1e-6, g) - thickness(108.0 + 1e-6, g)) < 1e-6);

    double best_l = 0.0, best_d = -1.0;
    for (double l = 95.0; l <= 120.0; l += 0.25) {
        const double d = thickness(l, g);
        if (d > best_d) {
            best_d = d;
            best_l = l;
        }
    }
    CHECK(std::abs(best_l - g.l0_mm) <= 0.25);
}

TEST_CASE("resistance calibration is increasing") {
    ResistanceCalib identity;
    CHECK(resistance_of(1.0, identity) == doctest::Approx(1.0));
    ResistanceCalib c{2.5, 0.3};
    CHECK(resistance_of(0.5, c) < resistance_of(0.9, c));

    // The resistance argmax tracks the thickness argmax over a length sweep.
    PamGeometry g;
    double best_l_d = 0.0, best_d = -1e300, best_l_r = 0.0, best_r = -1e300;
    for (double l = 95.0; l <= 120.0; l += 0.05) {
        const double d = thickness(l, g);
        const double r = resistance_of(d, c);
        if (d > best_d) {
            best_d = d;
            best_l_d = l;
        }
        if (r > best_r) {
            best_r = r;
            best_l_r = l;
        }
    }
    CHECK(best_l_d == doctest::Approx(best_l_r));
}

TEST_CASE("Schulze force structure") {
    PamGeometry g = calibrated_geometry();
    CHECK(schulze_force(100.0, 0.0, g) == doctest::Approx(0.0));
    for (double l : {95.0, 105.0, 112.0}) {
        CHECK(schulze_force(l, 0.4, g) == doctest::Approx(2.0 * schulze_force(l, 0.2, g)));
    }
    // Zero-force strain solves 3 (1-eps)^2 cos(theta0) = 1.
    const double eps_star = 1.0 - 1.0 / std::sqrt(3.0 * std::cos(g.braid_angle_rad));
    CHECK(eps_star == doctest::Approx(0.3796).epsilon(1e-3));
    const double l_star = g.l0_mm * (1.0 - eps_star);
    CHECK(std::abs(schulze_force(l_star, 0.3, g)) < 1e-9);
}

TEST_CASE("static balance matches the independent Newton solve") {
    const PamGeometry g = calibrated_geometry();
    const PamDynParams dyn = calibrated_dynamics();
    for (double u : {0.1, 0.3, 0.5}) {
        for (double f : {100.0, 175.0, 250.0}) {
            PamState start;
            start.length_mm = g.l0_mm;
            const PamState rest = settle(start, u, f, dyn, g);
            CHECK(std::abs(rest.velocity_mm_s) < 1e-6);
            const double l_newton = static_balance_length(u, f, dyn, g);
            // The Coulomb term can hold the state anywhere inside the band.
            const double band = dyn.c_coul / dyn.a_elas + 1e-6;
            CHECK(std::abs(rest.length_mm - l_newton) <= band);
        }
    }
}

TEST_CASE("pressure raises contraction, load raises extension") {
    const PamGeometry g = calibrated_geometry();
    const PamDynParams dyn = calibrated_dynamics();
    CHECK(static_balance_length(0.4, 100.0, dyn, g) < static_balance_length(0.2, 100.0, dyn, g));
    CHECK(static_balance_length(0.3, 220.0, dyn, g) > static_balance_length(0.3, 120.0, dyn, g));
}

TEST_CASE("dissipativity: velocity decays under constant inputs") {
    const PamGeometry g = calibrated_geometry();
    const PamDynParams dyn = calibrated_dynamics();
    PamState s;
    s.length_mm = 100.0;
    s.velocity_mm_s = 40.0;
    double prev_energy = s.velocity_mm_s * s.velocity_mm_s;
    for (int block = 0; block < 10; ++block) {
        s = settle(s, 0.3, 150.0, dyn, g, 0.2);
        const double energy = s.velocity_mm_s * s.velocity_mm_s;
        CHECK(energy <= prev_energy + 1e-9);
        prev_energy = energy;
    }
    CHECK(std::abs(s.velocity_mm_s) < 1e-6);
}

TEST_CASE("integrator self-convergence at the reference step") {
    const PamGeometry g = calibrated_geometry();
    PamDynParams dyn;  // spec-default friction keeps the smoothed sign unstiff
    InputSchedule sched;

    auto trajectory = [&](double dt) {
        PamDynParams local = dyn;
        local.integrator_dt = dt;
        PamState s;
        std::vector<double> lengths;
        const long sub = static_cast<long>(std::llround(sched.tau_s / dt));
        for (long n = 0; n < 100; ++n) {  // 10 s of the sinusoid drive
            const double u = to_pressure(gen_sine_sequence(n, sched), sched);
            for (long i = 0; i < sub; ++i) {
                s = pam_step(s, u, 150.0, dt, local, g);
            }
            lengths.push_back(s.length_mm);
        }
        return lengths;
    };
    const auto coarse = trajectory(1e-3);
    const auto fine = trajectory(5e-4);
    double sup = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        sup = std::max(sup, std::abs(coarse[i] - fine[i]));
    }
    CHECK(sup < 1e-4);
}

namespace {

struct PeriodMap {
    const PamGeometry& geom;
    const PamDynParams& dyn;
    const InputSchedule& sched;
    double load;
    double p_start;  // measured pressure on its periodic orbit

    PamState apply(double length, double velocity) const {
        PamState s{length, velocity, p_start};
        const long sub = static_cast<long>(std::llround(sched.tau_s / dyn.integrator_dt));
        const long period = static_cast<long>(std::llround(sched.period_s / sched.tau_s));
        for (long n = 0; n < period; ++n) {
            const double u = to_pressure(gen_sine_sequence(n, sched), sched);
            for (long i = 0; i < sub; ++i) {
                s = pam_step(s, u, load, dyn.integrator_dt, dyn, geom);
            }
        }
        return s;
    }
};

// Antiderivative of the pressure-force shape: F_pre(l, p) = p * d/dl of this.
double strain_potential(double l, const PamGeometry& g) {
    const double k = g.schulze_scale * std::numbers::pi * g.inner_d0_mm /
                     (4.0 * std::sin(g.braid_angle_rad));
    const double c = l / g.l0_mm;  // = 1 - strain
    return k * (std::cos(g.braid_angle_rad) * g.l0_mm * c * c * c - l);
}

// Mechanical energy of the length dynamics; along a trajectory its rate is
// -(b v^2 + c v tanh(v/delta)) - d_force * p * dPsi/dt, so the enclosed
// (p, Psi) loop area of a periodic orbit equals the friction work / d_force.
double mech_energy(const PamState& s, double f_ex, const PamDynParams& dyn,
                   const PamGeometry& g) {
    const double x = s.length_mm - g.l0_mm;
    return 0.5 * s.velocity_mm_s * s.velocity_mm_s + 0.5 * dyn.a_elas * x * x -
           dyn.d_force * f_ex * x;
}

struct LoopTrace {
    double shoelace_raw = 0.0;        // (measured pressure, length) loop
    double shoelace_conjugate = 0.0;  // (measured pressure, strain potential) loop
    double friction_work = 0.0;       // integral of (b v^2 + c v tanh(v/delta)) dt
    PamState end;
};

LoopTrace trace_period(const PamGeometry& geom, const PamDynParams& dyn,
                       const InputSchedule& sched, double load, const PamState& start) {
    PamState s = start;
    const long sub = static_cast<long>(std::llround(sched.tau_s / dyn.integrator_dt));
    const long period = static_cast<long>(std::llround(sched.period_s / sched.tau_s));
    std::vector<double> ps, ls, qs;
    LoopTrace out;
    for (long n = 0; n < period; ++n) {
        const double u = to_pressure(gen_sine_sequence(n, sched), sched);
        for (long i = 0; i < sub; ++i) {
            ps.push_back(s.measured_pressure_mpa);
            ls.push_back(s.length_mm);
            qs.push_back(strain_potential(s.length_mm, geom));
            const double v = s.velocity_mm_s;
            out.friction_work +=
                (dyn.b_visc * v * v + dyn.c_coul * v * std::tanh(v / dyn.sgn_smooth_delta)) *
                dyn.integrator_dt;
            s = pam_step(s, u, load, dyn.integrator_dt, dyn, geom);
        }
    }
    auto shoelace = [](const std::vector<double>& a, const std::vector<double>& b) {
        double area = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::size_t j = (i + 1) % a.size();
            area += a[i] * b[j] - a[j] * b[i];
        }
        return 0.5 * area;
    };
    out.shoelace_raw = shoelace(ps, ls);
    out.shoelace_conjugate = shoelace(ps, qs);
    out.end = s;
    return out;
}

// Measured pressure after the lag has settled onto its periodic orbit.
double settled_pressure(const PamGeometry& geom, const PamDynParams& dyn,
                        const InputSchedule& sched, double load) {
    PamState s{geom.l0_mm, 0.0, sched.bias_mpa};
    const long sub = static_cast<long>(std::llround(sched.tau_s / dyn.integrator_dt));
    const long period = static_cast<long>(std::llround(sched.period_s / sched.tau_s));
    for (int rep = 0; rep < 3; ++rep) {
        for (long n = 0; n < period; ++n) {
            const double u = to_pressure(gen_sine_sequence(n, sched), sched);
            for (long i = 0; i < sub; ++i) {
                s = pam_step(s, u, load, dyn.integrator_dt, dyn, geom);
            }
        }
    }
    return s.measured_pressure_mpa;
}

}  // namespace

TEST_CASE("hysteresis loop area positive iff Coulomb friction acts") {
    const PamGeometry g = calibrated_geometry();
    InputSchedule sched;
    const double load = 100.0;

    PamDynParams with_friction = calibrated_dynamics();
    with_friction.c_coul = 10.0;  // baseline friction level
    // Settle onto the attractor, then measure one period.
    PamState s{g.l0_mm, 0.0, 0.3};
    const long sub = static_cast<long>(std::llround(sched.tau_s / with_friction.integrator_dt));
    for (long n = 0; n < 240; ++n) {
        const double u = to_pressure(gen_sine_sequence(n, sched), sched);
        for (long i = 0; i < sub; ++i) {
            s = pam_step(s, u, load, with_friction.integrator_dt, with_friction, g);
        }
    }
    const LoopTrace baseline = trace_period(g, with_friction, sched, load, s);
    CHECK(std::abs(baseline.shoelace_raw) > 1e-6);
    // The conjugate loop area equals the friction work over d_force.
    const double area_c10 = baseline.friction_work / with_friction.d_force;
    CHECK(area_c10 > 1e-6);
    CHECK(std::abs(baseline.shoelace_conjugate) == doctest::Approx(area_c10).epsilon(0.05));

    // Null case: no Coulomb term, no viscosity. Transients never decay, so
    // locate the periodic orbit with a Newton solve on the period map.
    PamDynParams frictionless = calibrated_dynamics();
    frictionless.c_coul = 0.0;
    frictionless.b_visc = 0.0;
    PeriodMap map{g, frictionless, sched, load,
                  settled_pressure(g, frictionless, sched, load)};
    double l = static_balance_length(0.3, load, frictionless, g);
    double v = 0.0;
    for (int it = 0; it < 80; ++it) {
        const PamState f = map.apply(l, v);
        const double gl = f.length_mm - l;
        const double gv = f.velocity_mm_s - v;
        if (std::abs(gl) < 1e-12 && std::abs(gv) < 1e-10) break;
        const double h = 1e-7;
        const PamState fl = map.apply(l + h, v);
        const PamState fv = map.apply(l, v + h);
        // Jacobian of the residual (map - identity).
        const double a11 = (fl.length_mm - f.length_mm) / h - 1.0;
        const double a12 = (fv.length_mm - f.length_mm) / h;
        const double a21 = (fl.velocity_mm_s - f.velocity_mm_s) / h;
        const double a22 = (fv.velocity_mm_s - f.velocity_mm_s) / h - 1.0;
        const double det = a11 * a22 - a12 * a21;
        REQUIRE(std::abs(det) > 1e-12);
        l -= (a22 * gl - a12 * gv) / det;
        v -= (-a21 * gl + a11 * gv) / det;
    }
    const PamState start_state{l, v, map.p_start};
    const LoopTrace orbit = trace_period(g, frictionless, sched, load, start_state);
    REQUIRE(std::abs(orbit.end.length_mm - l) < 1e-9);
    REQUIRE(std::abs(orbit.end.velocity_mm_s - v) < 1e-7);
    // With no dissipation the conjugate loop area equals the per-period
    // energy drift divided by d_force; on the periodic orbit both vanish.
    const double drift = std::abs(mech_energy(orbit.end, load, frictionless, g) -
                                  mech_energy(start_state, load, frictionless, g));
    const double area_null = drift / frictionless.d_force;
    CHECK(area_null < 1e-9 * area_c10);
}

TEST_CASE("sensor sampling noise model") {
    const PamGeometry g = calibrated_geometry();
    ResistanceCalib calib{0.27, 0.73};
    PamState s{104.0, 3.0, 0.35};

    NoiseConfig quiet;
    CounterRng rng(11);
    const SensorFrame f = sample_sensors(s, 150.0, g, calib, quiet, rng);
    CHECK(f.pressure_mpa == doctest::Approx(0.35));
    CHECK(f.length_mm == doctest::Approx(104.0));
    CHECK(f.resistance == doctest::Approx(resistance_of(thickness(104.0, g), calib)));
    CHECK(f.load_n == doctest::Approx(150.0));

    NoiseConfig noisy{5e-4, 0.01, 1e-4, 0.5};
    CounterRng rng_a(21);
    CounterRng rng_b(21);
    const SensorFrame a = sample_sensors(s, 150.0, g, calib, noisy, rng_a);
    const SensorFrame b = sample_sensors(s, 150.0, g, calib, noisy, rng_b);
    CHECK(a.pressure_mpa == b.pressure_mpa);
    CHECK(a.length_mm == b.length_mm);
    CHECK(a.resistance == b.resistance);
    CHECK(a.load_n == b.load_n);
}

TEST_CASE("load channel stays uncorrelated with the drive") {
    const PamGeometry g = calibrated_geometry();
    ResistanceCalib calib{0.27, 0.73};
    NoiseConfig noise{0.0, 0.0, 0.0, 0.5};
    CounterRng rng(31);
    const auto drive = gen_uniform_random(10000, 0.0, 0.5, 5);
    PamState s{g.l0_mm, 0.0, 0.0};
    double mean_u = 0.0, mean_f = 0.0;
    std::vector<double> us, fs;
    for (double u : drive) {
        s.measured_pressure_mpa = u;
        const SensorFrame frame = sample_sensors(s, 150.0, g, calib, noise, rng);
        us.push_back(u);
        fs.push_back(frame.load_n);
        mean_u += u;
        mean_f += frame.load_n;
    }
    mean_u /= static_cast<double>(us.size());
    mean_f /= static_cast<double>(fs.size());
    double num = 0.0, vu = 0.0, vf = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        num += (us[i] - mean_u) * (fs[i] - mean_f);
        vu += (us[i] - mean_u) * (us[i] - mean_u);
        vf += (fs[i] - mean_f) * (fs[i] - mean_f);
    }
    CHECK(std::abs(num / std::sqrt(vu * vf)) < 0.05);
}

TEST_CASE("simulation aborts outside the valid length band") {
    const PamGeometry g = calibrated_geometry();
    PamDynParams dyn = calibrated_dynamics();
    dyn.d_force = 5000.0;  // absurd force gain blows the state out
    PamState s{g.l0_mm, 0.0, 0.0};
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 200000; ++i) {
                s = pam_step(s, 0.0, 4000.0, dyn.integrator_dt, dyn, g);
            }
        }(),
        SimulationBlowup);
}
