#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pamrc/pam.hpp"

namespace pamrc {

enum class SensorChannel { pressure, length, resistance, load };

const char* sensor_channel_name(SensorChannel c);

// Time-multiplexing layout: L sub-samples per input interval, masked sensor
// channels in fixed order (pressure, length, resistance, load), bias last.
struct MultiplexConfig {
    int samples_per_interval = 5;  // L
    std::vector<SensorChannel> sensor_mask = {SensorChannel::pressure, SensorChannel::length,
                                              SensorChannel::resistance, SensorChannel::load};
    bool include_bias = true;

    int dimension() const;
    void validate() const;
};

struct ReservoirVector {
    Eigen::VectorXd values;
    long step_index = 0;
};

// Concatenates the masked channels of exactly L frames (ascending sub-sample
// index), appending the bias entry 1.
ReservoirVector harvest(std::span<const SensorFrame> frames, const MultiplexConfig& cfg,
                        long step_index);

// Largest |eigenvalue| via the real Schur form (Eigen's EigenSolver).
double spectral_radius(const Eigen::MatrixXd& m);

// Power-iteration estimate of the spectral radius using the average log
// growth rate; tolerant of complex dominant pairs. Test-side oracle.
double power_iteration_radius(const Eigen::MatrixXd& m, int max_iters = 10000,
                              double rel_tol = 1e-9);

struct EsnParams {
    int node_count = 100;      // N
    double input_scale = 1.0;  // A_in
    double coupling = 0.9;     // A_cp, spectral radius of the scaled matrix
    std::uint64_t seed = 1;
    int input_dim = 1;

    void validate() const;
};

// Random tanh network: W and W_in i.i.d. uniform [-1, 1], W normalized to
// unit spectral radius. The state update is
//   x_t = tanh(A_cp W x_{t-1} + A_in W_in u_t).
class Esn {
public:
    explicit Esn(const EsnParams& p);

    Eigen::VectorXd step(const Eigen::VectorXd& state, const Eigen::VectorXd& input) const;
    Eigen::VectorXd zero_state() const;

    // Readout features: state with the bias entry 1 appended.
    Eigen::VectorXd features(const Eigen::VectorXd& state) const;

    const Eigen::MatrixXd& internal_weights() const { return w_; }
    const Eigen::MatrixXd& input_weights() const { return w_in_; }
    const EsnParams& params() const { return params_; }
    int feature_dim() const { return params_.node_count + 1; }

private:
    EsnParams params_;
    Eigen::MatrixXd w_;     // normalized to spectral radius 1
    Eigen::MatrixXd w_in_;  // node_count x input_dim
};

}  // namespace pamrc
