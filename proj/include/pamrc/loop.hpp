#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pamrc/pam.hpp"
#include "pamrc/readout.hpp"
#include "pamrc/reservoir.hpp"
#include "pamrc/rng.hpp"

namespace pamrc {

struct ClipRange {
    double u_min_mpa = 0.0;
    double u_max_mpa = 0.5;

    void validate() const;
};

// Feedback clamp: the previous output passes through unchanged inside the
// range and saturates at the bounds.
double clip_feedback(double y_prev_mpa, const ClipRange& range);

struct LoadSchedule {
    struct Segment {
        double load_n = 0.0;
        long hold_steps = 1;
    };
    std::vector<Segment> segments;

    static LoadSchedule constant(double load_n, long steps);
    static LoadSchedule sweep(double from_n, double to_n, double step_n, long hold_steps);

    long total_steps() const;
    double load_at(long step) const;
    void validate() const;
};

// Affine map between teacher units and control pressure, with exact inverse.
struct TeacherScaling {
    double gain = 1.0;    // MPa per teacher unit
    double offset = 0.0;  // MPa

    static TeacherScaling from_range(double y_lo, double y_hi, double u_lo_mpa = 0.1,
                                     double u_hi_mpa = 0.5);
    double to_pressure(double y) const { return gain * y + offset; }
    double to_teacher(double u_mpa) const { return (u_mpa - offset) / gain; }
};

struct SensorLogRow {
    double t_s = 0.0;
    double control_mpa = 0.0;
    SensorFrame frame;
};

// One input interval of a driven reservoir: apply the held control value,
// return the harvested feature vector.
class ReservoirSource {
public:
    virtual ~ReservoirSource() = default;
    virtual void reset() = 0;
    virtual Eigen::VectorXd advance(double u_mpa, double load_n) = 0;
    virtual int feature_dim() const = 0;
};

class PamReservoirSource : public ReservoirSource {
public:
    PamReservoirSource(const PamGeometry& geom, const PamDynParams& params,
                       const ResistanceCalib& calib, const NoiseConfig& noise,
                       const MultiplexConfig& mux, double tau_s, std::uint64_t noise_seed);

    void reset() override;
    Eigen::VectorXd advance(double u_mpa, double load_n) override;
    int feature_dim() const override { return mux_.dimension(); }

    // Noise-free channels at the current time (end of the last interval).
    const SensorFrame& clean_end_frame() const { return clean_end_frame_; }

    void set_logging(bool enabled) { logging_ = enabled; }
    const std::vector<SensorLogRow>& sensor_log() const { return sensor_log_; }
    void clear_sensor_log() { sensor_log_.clear(); }

    const PamSimulator& simulator() const { return *sim_; }
    double tau_s() const { return tau_s_; }
    const MultiplexConfig& multiplex() const { return mux_; }

private:
    PamGeometry geom_;
    PamDynParams params_;
    ResistanceCalib calib_;
    NoiseConfig noise_;
    MultiplexConfig mux_;
    double tau_s_;
    std::uint64_t noise_seed_;
    std::unique_ptr<PamSimulator> sim_;
    std::vector<SensorFrame> frames_;
    SensorFrame clean_end_frame_;
    std::vector<SensorLogRow> sensor_log_;
    bool logging_ = false;
    long step_count_ = 0;
};

// The external recurrent-network comparator; the scalar control value is
// normalized onto [-1, 1] before entering the network, load is ignored.
class EsnReservoirSource : public ReservoirSource {
public:
    explicit EsnReservoirSource(const EsnParams& params, double input_center_mpa = 0.1,
                                double input_halfspan_mpa = 0.4);

    void reset() override;
    Eigen::VectorXd advance(double u_mpa, double load_n) override;
    int feature_dim() const override { return esn_.feature_dim(); }
    const Esn& esn() const { return esn_; }

private:
    Esn esn_;
    Eigen::VectorXd state_;
    double center_;
    double halfspan_;
};

struct OpenLoopRun {
    Eigen::MatrixXd features;       // steps x dim
    std::vector<double> drive_mpa;  // control value applied per step
};

// Drives the reservoir with an external control sequence at constant load.
OpenLoopRun run_open_loop(ReservoirSource& source, std::span<const double> drive_mpa,
                          long steps, double load_n);

// Teacher-forced dataset: row n holds the features harvested while injecting
// the scaled teacher value y_n; target column 0 is the scaled y_{n+1}, any
// further teacher dimensions stay in their own units. Optional Gaussian
// drive noise (teacher units) fattens the visited neighbourhood of the
// attractor, which stabilizes the later feedback loop; targets stay clean.
Dataset harvest_teacher_dataset(const Eigen::MatrixXd& teacher, const TeacherScaling& scaling,
                                ReservoirSource& source, long n_wash, long n_train,
                                const ClipRange& clip, double load_n,
                                double drive_noise_std = 0.0, CounterRng* noise_rng = nullptr,
                                double load_dither_n = 0.0, long load_dither_period = 400);

ReadoutWeights teacher_force_train(const Eigen::MatrixXd& teacher, const TeacherScaling& scaling,
                                   ReservoirSource& source, double lambda, long n_wash,
                                   long n_train, const ClipRange& clip, double load_n,
                                   double drive_noise_std = 0.0, CounterRng* noise_rng = nullptr);

enum class InitProtocol { teacher_driven, zero_input, random_input };

struct ClosedLoopRun {
    Eigen::MatrixXd outputs;        // per step, K columns; column 0 in teacher units
    std::vector<double> input_mpa;  // control applied per step
    std::vector<double> load_n;     // load applied per step
    long switch_step = 0;           // first closed-loop step index
};

// Open-loop initialization for init_steps, then feedback through the clip
// over the load schedule. The reservoir state carries across the switch and
// across load changes.
ClosedLoopRun run_closed_loop(const ReadoutWeights& weights, ReservoirSource& source,
                              InitProtocol init, std::span<const double> init_teacher,
                              const TeacherScaling& scaling, long init_steps,
                              const LoadSchedule& schedule, const ClipRange& clip,
                              CounterRng& rng);

// Trained one-step map evaluated by holding the scaled grid value for
// settle_steps intervals from a reset reservoir; result in teacher units.
std::function<double(double)> make_held_input_map(const ReadoutWeights& weights,
                                                  const TeacherScaling& scaling,
                                                  ReservoirSource& source, int settle_steps,
                                                  double load_n);

}  // namespace pamrc
