#include "pamrc/loop.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pamrc/errors.hpp"

namespace pamrc {

void ClipRange::validate() const {
    if (!(u_min_mpa < u_max_mpa)) {
        throw ConfigError("clip range: requires u_min < u_max");
    }
}

double clip_feedback(double y_prev_mpa, const ClipRange& range) {
    if (y_prev_mpa < range.u_min_mpa) return range.u_min_mpa;
    if (y_prev_mpa > range.u_max_mpa) return range.u_max_mpa;
    return y_prev_mpa;
}

LoadSchedule LoadSchedule::constant(double load_n, long steps) {
    LoadSchedule s;
    s.segments.push_back({load_n, steps});
    return s;
}

LoadSchedule LoadSchedule::sweep(double from_n, double to_n, double step_n, long hold_steps) {
    if (!(step_n > 0.0) || to_n < from_n) {
        throw ConfigError("load sweep: requires ascending loads and positive step");
    }
    LoadSchedule s;
    for (double load = from_n; load <= to_n + 1e-9; load += step_n) {
        s.segments.push_back({load, hold_steps});
    }
    return s;
}

long LoadSchedule::total_steps() const {
    long total = 0;
    for (const auto& seg : segments) total += seg.hold_steps;
    return total;
}

double LoadSchedule::load_at(long step) const {
    long acc = 0;
    for (const auto& seg : segments) {
        acc += seg.hold_steps;
        if (step < acc) return seg.load_n;
    }
    return segments.empty() ? 0.0 : segments.back().load_n;
}

void LoadSchedule::validate() const {
    if (segments.empty()) {
        throw ConfigError("load schedule: empty");
    }
    for (const auto& seg : segments) {
        if (seg.hold_steps < 1) {
            throw ConfigError("load schedule: hold steps must be >= 1");
        }
    }
}

TeacherScaling TeacherScaling::from_range(double y_lo, double y_hi, double u_lo_mpa,
                                          double u_hi_mpa) {
    if (!(y_hi > y_lo)) {
        throw ConfigError("teacher scaling: degenerate teacher range");
    }
    TeacherScaling s;
    s.gain = (u_hi_mpa - u_lo_mpa) / (y_hi - y_lo);
    s.offset = u_lo_mpa - s.gain * y_lo;
    return s;
}

PamReservoirSource::PamReservoirSource(const PamGeometry& geom, const PamDynParams& params,
                                       const ResistanceCalib& calib, const NoiseConfig& noise,
                                       const MultiplexConfig& mux, double tau_s,
                                       std::uint64_t noise_seed)
    : geom_(geom),
      params_(params),
      calib_(calib),
      noise_(noise),
      mux_(mux),
      tau_s_(tau_s),
      noise_seed_(noise_seed) {
    mux_.validate();
    if (!(tau_s_ > 0.0)) {
        throw ConfigError("reservoir source: tau must be positive");
    }
    reset();
}

void PamReservoirSource::reset() {
    sim_ = std::make_unique<PamSimulator>(geom_, params_, calib_, noise_,
                                          CounterRng(noise_seed_).stream("pam-sensor-noise"));
    frames_.assign(static_cast<std::size_t>(mux_.samples_per_interval), SensorFrame{});
    clean_end_frame_ = sim_->clean_sample(0.0);
    sensor_log_.clear();
    step_count_ = 0;
}

Eigen::VectorXd PamReservoirSource::advance(double u_mpa, double load_n) {
    const int samples = mux_.samples_per_interval;
    const double sub = tau_s_ / static_cast<double>(samples);
    for (int k = 0; k < samples; ++k) {
        frames_[static_cast<std::size_t>(k)] = sim_->sample(load_n);
        if (logging_) {
            sensor_log_.push_back({sim_->time_s(), u_mpa, frames_[static_cast<std::size_t>(k)]});
        }
        sim_->run(u_mpa, load_n, sub);
    }
    clean_end_frame_ = sim_->clean_sample(load_n);
    return harvest(frames_, mux_, step_count_++).values;
}

EsnReservoirSource::EsnReservoirSource(const EsnParams& params, double input_center_mpa,
                                       double input_halfspan_mpa)
    : esn_(params), center_(input_center_mpa), halfspan_(input_halfspan_mpa) {
    if (!(halfspan_ > 0.0)) {
        throw ConfigError("esn source: input halfspan must be positive");
    }
    state_ = esn_.zero_state();
}

void EsnReservoirSource::reset() { state_ = esn_.zero_state(); }

Eigen::VectorXd EsnReservoirSource::advance(double u_mpa, double /*load_n*/) {
    Eigen::VectorXd input(1);
    input[0] = (u_mpa - center_) / halfspan_;
    state_ = esn_.step(state_, input);
    return esn_.features(state_);
}

OpenLoopRun run_open_loop(ReservoirSource& source, std::span<const double> drive_mpa,
                          long steps, double load_n) {
    if (static_cast<long>(drive_mpa.size()) < steps) {
        throw ConfigError("run_open_loop: drive shorter than requested steps");
    }
    OpenLoopRun run;
    run.features.resize(steps, source.feature_dim());
    run.drive_mpa.reserve(static_cast<std::size_t>(steps));
    for (long n = 0; n < steps; ++n) {
        const double u = drive_mpa[static_cast<std::size_t>(n)];
        try {
            run.features.row(n) = source.advance(u, load_n).transpose();
        } catch (const SimulationBlowup& e) {
            throw SimulationBlowup(std::string(e.what()) + " (open-loop step " +
                                   std::to_string(n) + ")");
        }
        run.drive_mpa.push_back(u);
    }
    return run;
}

Dataset harvest_teacher_dataset(const Eigen::MatrixXd& teacher, const TeacherScaling& scaling,
                                ReservoirSource& source, long n_wash, long n_train,
                                const ClipRange& clip, double load_n, double drive_noise_std,
                                CounterRng* noise_rng, double load_dither_n,
                                long load_dither_period) {
    clip.validate();
    const long rows = n_wash + n_train;
    if (teacher.rows() < rows + 1) {
        throw ConfigError("teacher forcing: series shorter than washout + training + 1");
    }
    if (drive_noise_std > 0.0 && noise_rng == nullptr) {
        throw ConfigError("teacher forcing: drive noise requested without a generator");
    }
    // The scaled drive must stay inside the clip range or the closed loop
    // could never reproduce it.
    for (long n = 0; n < rows + 1; ++n) {
        const double u = scaling.to_pressure(teacher(n, 0));
        if (u < clip.u_min_mpa - 1e-12 || u > clip.u_max_mpa + 1e-12) {
            throw ConfigError("teacher forcing: scaled teacher value " + std::to_string(u) +
                              " MPa escapes the clip range");
        }
    }
    Dataset ds;
    ds.features.resize(rows, source.feature_dim());
    ds.targets.resize(rows, teacher.cols());
    ds.n_wash = n_wash;
    ds.n_train = n_train;
    ds.n_eval = 0;
    for (long n = 0; n < rows; ++n) {
        double u = scaling.to_pressure(teacher(n, 0));
        if (drive_noise_std > 0.0) {
            u = clip_feedback(u + scaling.gain * noise_rng->gaussian(drive_noise_std), clip);
        }
        // A slow load wobble during training teaches the readout which
        // feature directions are load-induced ("nearly constant" load).
        double load = load_n;
        if (load_dither_n > 0.0) {
            load += load_dither_n * std::sin(2.0 * std::numbers::pi *
                                             static_cast<double>(n % load_dither_period) /
                                             static_cast<double>(load_dither_period));
        }
        try {
            ds.features.row(n) = source.advance(u, load).transpose();
        } catch (const SimulationBlowup& e) {
            throw SimulationBlowup(std::string(e.what()) + " (teacher-forcing step " +
                                   std::to_string(n) + ")");
        }
        ds.targets(n, 0) = scaling.to_pressure(teacher(n + 1, 0));
        for (Eigen::Index k = 1; k < teacher.cols(); ++k) {
            ds.targets(n, k) = teacher(n + 1, k);
        }
    }
    return ds;
}

ReadoutWeights teacher_force_train(const Eigen::MatrixXd& teacher, const TeacherScaling& scaling,
                                   ReservoirSource& source, double lambda, long n_wash,
                                   long n_train, const ClipRange& clip, double load_n,
                                   double drive_noise_std, CounterRng* noise_rng) {
    const Dataset ds = harvest_teacher_dataset(teacher, scaling, source, n_wash, n_train, clip,
                                               load_n, drive_noise_std, noise_rng);
    return fit_ridge(ds, lambda);
}

ClosedLoopRun run_closed_loop(const ReadoutWeights& weights, ReservoirSource& source,
                              InitProtocol init, std::span<const double> init_teacher,
                              const TeacherScaling& scaling, long init_steps,
                              const LoadSchedule& schedule, const ClipRange& clip,
                              CounterRng& rng) {
    clip.validate();
    schedule.validate();
    const long closed_steps = schedule.total_steps();
    const long total = init_steps + closed_steps;
    const Eigen::Index k_out = weights.w_out.cols();

    ClosedLoopRun run;
    run.outputs.resize(total, k_out);
    run.input_mpa.reserve(static_cast<std::size_t>(total));
    run.load_n.reserve(static_cast<std::size_t>(total));
    run.switch_step = init_steps;

    Eigen::VectorXd y_prev = Eigen::VectorXd::Zero(k_out);
    const double init_load = schedule.segments.front().load_n;

    if (init == InitProtocol::teacher_driven &&
        static_cast<long>(init_teacher.size()) < init_steps) {
        throw ConfigError("run_closed_loop: init teacher shorter than init_steps");
    }

    for (long n = 0; n < total; ++n) {
        const bool closed = n >= init_steps;
        double u;
        if (!closed) {
            switch (init) {
                case InitProtocol::teacher_driven:
                    u = scaling.to_pressure(init_teacher[static_cast<std::size_t>(n)]);
                    break;
                case InitProtocol::zero_input:
                    u = 0.0;
                    break;
                case InitProtocol::random_input:
                    u = rng.uniform(clip.u_min_mpa, clip.u_max_mpa);
                    break;
                default:
                    u = 0.0;
            }
        } else {
            u = clip_feedback(y_prev[0], clip);
        }
        if (closed && (u < clip.u_min_mpa || u > clip.u_max_mpa)) {
            throw NumericalError("run_closed_loop: clipped input escaped the range");
        }
        const double load = closed ? schedule.load_at(n - init_steps) : init_load;
        Eigen::VectorXd x;
        try {
            x = source.advance(u, load);
        } catch (const SimulationBlowup& e) {
            throw SimulationBlowup(std::string(e.what()) + " (closed-loop step " +
                                   std::to_string(n) + ")");
        }
        const Eigen::VectorXd y = predict(weights, x);
        if (!y.allFinite()) {
            throw NumericalError("run_closed_loop: non-finite output at step " +
                                 std::to_string(n) + "; last stable step " +
                                 std::to_string(n - 1));
        }
        run.outputs(n, 0) = scaling.to_teacher(y[0]);
        for (Eigen::Index k = 1; k < k_out; ++k) run.outputs(n, k) = y[k];
        run.input_mpa.push_back(u);
        run.load_n.push_back(load);
        y_prev = y;
    }
    return run;
}

std::function<double(double)> make_held_input_map(const ReadoutWeights& weights,
                                                  const TeacherScaling& scaling,
                                                  ReservoirSource& source, int settle_steps,
                                                  double load_n) {
    return [&source, weights, scaling, settle_steps, load_n](double grid_value) {
        source.reset();
        const double u = scaling.to_pressure(grid_value);
        Eigen::VectorXd x;
        for (int i = 0; i < settle_steps; ++i) {
            x = source.advance(u, load_n);
        }
        return scaling.to_teacher(predict(weights, x)[0]);
    };
}

}  // namespace pamrc
