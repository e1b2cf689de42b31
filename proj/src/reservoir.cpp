#include "pamrc/reservoir.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pamrc/errors.hpp"

namespace pamrc {

const char* sensor_channel_name(SensorChannel c) {
    switch (c) {
        case SensorChannel::pressure: return "pressure";
        case SensorChannel::length: return "length";
        case SensorChannel::resistance: return "resistance";
        case SensorChannel::load: return "load";
    }
    return "?";
}

int MultiplexConfig::dimension() const {
    return static_cast<int>(sensor_mask.size()) * samples_per_interval + (include_bias ? 1 : 0);
}

void MultiplexConfig::validate() const {
    if (samples_per_interval < 1) {
        throw ConfigError("multiplex: L must be >= 1");
    }
    if (sensor_mask.empty()) {
        throw ConfigError("multiplex: sensor mask is empty");
    }
}

namespace {

double channel_value(const SensorFrame& f, SensorChannel c) {
    switch (c) {
        case SensorChannel::pressure: return f.pressure_mpa;
        case SensorChannel::length: return f.length_mm;
        case SensorChannel::resistance: return f.resistance;
        case SensorChannel::load: return f.load_n;
    }
    return 0.0;
}

}  // namespace

ReservoirVector harvest(std::span<const SensorFrame> frames, const MultiplexConfig& cfg,
                        long step_index) {
    cfg.validate();
    if (static_cast<int>(frames.size()) != cfg.samples_per_interval) {
        throw NumericalError("harvest: expected " + std::to_string(cfg.samples_per_interval) +
                             " frames, got " + std::to_string(frames.size()));
    }
    ReservoirVector out;
    out.step_index = step_index;
    out.values.resize(cfg.dimension());
    Eigen::Index i = 0;
    for (const auto& frame : frames) {
        for (SensorChannel c : cfg.sensor_mask) {
            const double v = channel_value(frame, c);
            if (!std::isfinite(v)) {
                throw NumericalError("harvest: non-finite sensor value");
            }
            out.values[i++] = v;
        }
    }
    if (cfg.include_bias) {
        out.values[i++] = 1.0;
    }
    return out;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw NumericalError("spectral_radius: matrix must be square and non-empty");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("spectral_radius: eigenvalue computation failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double power_iteration_radius(const Eigen::MatrixXd& m, int max_iters, double rel_tol) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i + 1));  // deterministic start
    }
    v.normalize();
    double log_sum = 0.0;
    long counted = 0;
    double prev_avg = 0.0;
    const int burn_in = 50;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = m * v;
        const double growth = w.norm();
        if (growth == 0.0) return 0.0;
        v = w / growth;
        if (it >= burn_in) {
            log_sum += std::log(growth);
            ++counted;
            const double avg = log_sum / static_cast<double>(counted);
            if (counted > 100 && std::abs(avg - prev_avg) < rel_tol * std::abs(avg)) {
                return std::exp(avg);
            }
            prev_avg = avg;
        }
    }
    if (counted == 0) {
        throw NumericalError("power_iteration_radius: no iterations accumulated");
    }
    return std::exp(log_sum / static_cast<double>(counted));
}

void EsnParams::validate() const {
    if (node_count < 1) {
        throw ConfigError("esn: node_count must be >= 1");
    }
    if (coupling < 0.0) {
        throw ConfigError("esn: coupling must be non-negative");
    }
    if (input_dim < 1) {
        throw ConfigError("esn: input_dim must be >= 1");
    }
}

Esn::Esn(const EsnParams& p) : params_(p) {
    params_.validate();
    const int n = p.node_count;
    CounterRng internal_rng = CounterRng(p.seed).stream("esn-internal");
    CounterRng input_rng = CounterRng(p.seed).stream("esn-input");
    w_.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            w_(i, j) = internal_rng.uniform(-1.0, 1.0);
        }
    }
    w_in_.resize(n, p.input_dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p.input_dim; ++j) {
            w_in_(i, j) = input_rng.uniform(-1.0, 1.0);
        }
    }
    const double rho = spectral_radius(w_);
    if (!(rho > 0.0)) {
        throw NumericalError("esn: drawn internal matrix has zero spectral radius");
    }
    w_ /= rho;
}

Eigen::VectorXd Esn::zero_state() const {
    return Eigen::VectorXd::Zero(params_.node_count);
}

Eigen::VectorXd Esn::step(const Eigen::VectorXd& state, const Eigen::VectorXd& input) const {
    if (state.size() != params_.node_count || input.size() != params_.input_dim) {
        throw NumericalError("esn_step: dimension mismatch");
    }
    return (params_.coupling * (w_ * state) + params_.input_scale * (w_in_ * input))
        .array()
        .tanh()
        .matrix();
}

Eigen::VectorXd Esn::features(const Eigen::VectorXd& state) const {
    Eigen::VectorXd f(state.size() + 1);
    f.head(state.size()) = state;
    f[state.size()] = 1.0;
    return f;
}

}  // namespace pamrc
