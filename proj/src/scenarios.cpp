#include "pamrc/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pamrc/analysis.hpp"
#include "pamrc/csv.hpp"
#include "pamrc/errors.hpp"
#include "pamrc/signals.hpp"

namespace pamrc {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<int> multiplex_columns(const MultiplexConfig& full,
                                   std::span<const SensorChannel> subset, bool keep_bias) {
    std::vector<int> cols;
    const int m = static_cast<int>(full.sensor_mask.size());
    for (int k = 0; k < full.samples_per_interval; ++k) {
        for (SensorChannel c : subset) {
            int idx = -1;
            for (int j = 0; j < m; ++j) {
                if (full.sensor_mask[static_cast<std::size_t>(j)] == c) idx = j;
            }
            if (idx < 0) {
                throw ConfigError("multiplex_columns: channel not present in the full mask");
            }
            cols.push_back(k * m + idx);
        }
    }
    if (keep_bias) {
        if (!full.include_bias) {
            throw ConfigError("multiplex_columns: full layout has no bias column");
        }
        cols.push_back(m * full.samples_per_interval);
    }
    return cols;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, std::span<const int> cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
    }
    return out;
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory: " + dir.string());
    }
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << doc.dump(2) << "\n";
}

void write_bundle_config(const RunConfig& cfg, const fs::path& dir) {
    write_json(dir / "config.json", cfg.resolved);
}

void write_weights_bundle(const fs::path& dir, const ReadoutWeights& w, const RunConfig& cfg,
                          long n_wash, long n_train) {
    std::vector<std::string> header;
    for (Eigen::Index k = 0; k < w.w_out.cols(); ++k) {
        header.push_back("output_" + std::to_string(k));
    }
    write_matrix_csv(dir / "weights.csv", header, w.w_out);
    json meta;
    meta["lambda"] = w.ridge_lambda;
    meta["rows"] = w.w_out.rows();
    meta["cols"] = w.w_out.cols();
    meta["train_rows_begin"] = n_wash;
    meta["train_rows_end"] = n_wash + n_train;
    meta["config_hash"] = cfg.content_hash;
    write_json(dir / "weights_meta.json", meta);
}

void write_teacher_csv(const fs::path& dir, const Eigen::MatrixXd& teacher) {
    CsvWriter w(dir / "teacher.csv", {"step", "value"});
    for (Eigen::Index n = 0; n < teacher.rows(); ++n) {
        w.write_row({static_cast<double>(n), teacher(n, 0)});
    }
}

void write_sensor_log(const fs::path& dir, const std::vector<SensorLogRow>& log) {
    CsvWriter w(dir / "sensors.csv",
                {"t", "control_pressure", "pressure", "length", "resistance", "load"});
    for (const auto& row : log) {
        w.write_row({row.t_s, row.control_mpa, row.frame.pressure_mpa, row.frame.length_mm,
                     row.frame.resistance, row.frame.load_n});
    }
}

void write_output_csv(const fs::path& dir, const ClosedLoopRun& run) {
    std::vector<std::string> header = {"step", "phase", "load", "u_n", "y_hat"};
    for (Eigen::Index k = 1; k < run.outputs.cols(); ++k) {
        header.push_back("y_hat_" + std::to_string(k + 1));
    }
    CsvWriter w(dir / "output.csv", header);
    for (Eigen::Index n = 0; n < run.outputs.rows(); ++n) {
        std::vector<double> row = {static_cast<double>(n), n >= run.switch_step ? 1.0 : 0.0,
                                   run.load_n[static_cast<std::size_t>(n)],
                                   run.input_mpa[static_cast<std::size_t>(n)], run.outputs(n, 0)};
        for (Eigen::Index k = 1; k < run.outputs.cols(); ++k) row.push_back(run.outputs(n, k));
        w.write_row(row);
    }
}

void write_spectrum_csv(const fs::path& path, const SpectrumEstimate& s) {
    CsvWriter w(path, {"frequency_hz", "power"});
    for (std::size_t i = 0; i < s.frequency_hz.size(); ++i) {
        w.write_row({s.frequency_hz[i], s.power[i]});
    }
}

// Control-pressure sequence for the open-loop scenarios.
std::vector<double> make_drive(const RunConfig& cfg, long steps) {
    std::vector<double> drive;
    drive.reserve(static_cast<std::size_t>(steps));
    if (cfg.schedule.kind == ScheduleKind::sinusoid) {
        for (long n = 0; n < steps; ++n) {
            drive.push_back(to_pressure(gen_sine_sequence(n, cfg.schedule), cfg.schedule));
        }
    } else if (cfg.schedule.kind == ScheduleKind::uniform_random) {
        CounterRng rng = cfg.master_rng().stream("drive");
        for (long n = 0; n < steps; ++n) {
            drive.push_back(to_pressure(rng.uniform01(), cfg.schedule));
        }
    } else {
        const CsvTable table = read_csv(cfg.schedule_external_file);
        const auto values = table.column("value");
        if (static_cast<long>(values.size()) < steps) {
            throw ConfigError("make_drive: external sequence shorter than the protocol");
        }
        for (long n = 0; n < steps; ++n) {
            const double u = values[static_cast<std::size_t>(n)];
            if (u < 0.0) {
                throw ConfigError("make_drive: external sequence contains a negative pressure");
            }
            drive.push_back(u);
        }
    }
    return drive;
}

struct EmulationRun {
    Eigen::MatrixXd features;          // full-mask harvest
    std::vector<double> drive;         // pressures
    std::vector<double> target_length; // noise-free length at interval end
    std::vector<double> loads;
};

EmulationRun run_emulation_harvest(const RunConfig& cfg, PamReservoirSource& source, long steps,
                                   bool log_sensors) {
    EmulationRun run;
    run.drive = make_drive(cfg, steps);
    run.features.resize(steps, source.feature_dim());
    run.target_length.reserve(static_cast<std::size_t>(steps));
    run.loads.reserve(static_cast<std::size_t>(steps));
    source.set_logging(log_sensors);
    for (long n = 0; n < steps; ++n) {
        const double load = cfg.loads.load_at(n);
        run.features.row(n) =
            source.advance(run.drive[static_cast<std::size_t>(n)], load).transpose();
        run.target_length.push_back(source.clean_end_frame().length_mm);
        run.loads.push_back(load);
    }
    return run;
}

double eval_nmse(const ReadoutWeights& w, const Eigen::MatrixXd& x,
                 const std::vector<double>& targets, long begin, long count) {
    std::vector<double> pred;
    std::vector<double> truth;
    pred.reserve(static_cast<std::size_t>(count));
    truth.reserve(static_cast<std::size_t>(count));
    for (long n = begin; n < begin + count; ++n) {
        pred.push_back(predict(w, x.row(n).transpose())[0]);
        truth.push_back(targets[static_cast<std::size_t>(n)]);
    }
    return nmse(pred, truth);
}

ScenarioResult run_sensor_emulation(const RunConfig& cfg, const fs::path& dir) {
    const long steps = cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.n_eval;
    PamReservoirSource source = cfg.make_pam_source();
    EmulationRun run = run_emulation_harvest(cfg, source, steps, true);
    write_sensor_log(dir, source.sensor_log());
    source.set_logging(false);

    const std::vector<SensorChannel> with_load = {SensorChannel::pressure,
                                                  SensorChannel::resistance, SensorChannel::load};
    const std::vector<SensorChannel> without_load = {SensorChannel::pressure,
                                                     SensorChannel::resistance};
    const auto cols_with = multiplex_columns(cfg.multiplex, with_load, true);
    const auto cols_without = multiplex_columns(cfg.multiplex, without_load, true);

    Eigen::MatrixXd y(steps, 1);
    for (long n = 0; n < steps; ++n) y(n, 0) = run.target_length[static_cast<std::size_t>(n)];

    auto fit_and_eval = [&](const std::vector<int>& cols, ReadoutWeights* w_out) {
        const Eigen::MatrixXd x = select_columns(run.features, cols);
        Dataset ds;
        ds.features = x;
        ds.targets = y;
        ds.n_wash = cfg.protocol.n_wash;
        ds.n_train = cfg.protocol.n_train;
        ds.n_eval = cfg.protocol.n_eval;
        ReadoutWeights w = cfg.lambda_grid.empty()
                               ? fit_ridge(ds, cfg.readout_lambda)
                               : fit_ridge_grid(ds, cfg.lambda_grid);
        const double score = eval_nmse(w, x, run.target_length,
                                       cfg.protocol.n_wash + cfg.protocol.n_train,
                                       cfg.protocol.n_eval);
        if (w_out) *w_out = w;
        return score;
    };

    ReadoutWeights weights_with;
    const double nmse_with = fit_and_eval(cols_with, &weights_with);
    const double nmse_without = fit_and_eval(cols_without, nullptr);
    write_weights_bundle(dir, weights_with, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);

    // External-network comparator on the same drive and targets.
    std::vector<std::uint64_t> seeds = {CounterRng::mix(cfg.seed, 101),
                                        CounterRng::mix(cfg.seed, 202),
                                        CounterRng::mix(cfg.seed, 303)};
    std::vector<double> grid = cfg.esn.coupling_grid;
    if (grid.empty()) grid = {cfg.esn.coupling};
    EsnGridResult esn_result =
        esn_gridsearch(run.drive, y, cfg.protocol.n_wash, cfg.protocol.n_train,
                       cfg.protocol.n_eval, cfg.esn, cfg.readout_lambda, grid, seeds);

    json summary;
    summary["nmse_with_load"] = nmse_with;
    summary["nmse_without_load"] = nmse_without;
    summary["esn_nmse"] = esn_result.best_nmse;
    summary["esn_best_coupling"] = esn_result.best_coupling;

    if (!cfg.training_sizes.empty()) {
        const auto table = training_size_study(cfg, cfg.training_sizes);
        CsvWriter w(dir / "training_sizes.csv", {"size", "prc_nmse", "esn600_nmse"});
        json rows = json::array();
        for (const auto& row : table) {
            w.write_row({static_cast<double>(row.size), row.prc_nmse, row.esn_nmse});
            rows.push_back({{"size", row.size},
                            {"prc_nmse", row.prc_nmse},
                            {"esn600_nmse", row.esn_nmse}});
        }
        summary["training_sizes"] = rows;
    }

    ScenarioResult result;
    result.summary = summary;
    result.summary_line = "sensor-emulation: nmse_with_load=" +
                          CsvWriter::format_value(nmse_with) +
                          " nmse_without_load=" + CsvWriter::format_value(nmse_without) +
                          " esn_nmse=" + CsvWriter::format_value(esn_result.best_nmse);
    return result;
}

ScenarioResult run_narma2(const RunConfig& cfg, const fs::path& dir) {
    const long steps = cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.n_eval;
    PamReservoirSource source = cfg.make_pam_source();
    EmulationRun run = run_emulation_harvest(cfg, source, steps, false);

    // Second-order NARMA driven by the control value:
    //   y_{n+1} = 0.4 y_n + 0.4 y_n y_{n-1} + 0.6 u_n^3 + 0.1
    std::vector<double> target(static_cast<std::size_t>(steps));
    double y_prev = 0.1, y_prev2 = 0.1;
    for (long n = 0; n < steps; ++n) {
        const double u = run.drive[static_cast<std::size_t>(n)];
        const double y_next = 0.4 * y_prev + 0.4 * y_prev * y_prev2 + 0.6 * u * u * u + 0.1;
        target[static_cast<std::size_t>(n)] = y_next;
        y_prev2 = y_prev;
        y_prev = y_next;
    }

    Dataset ds;
    ds.features = run.features;
    ds.targets.resize(steps, 1);
    for (long n = 0; n < steps; ++n) ds.targets(n, 0) = target[static_cast<std::size_t>(n)];
    ds.n_wash = cfg.protocol.n_wash;
    ds.n_train = cfg.protocol.n_train;
    ds.n_eval = cfg.protocol.n_eval;
    ReadoutWeights w = fit_ridge(ds, cfg.readout_lambda);
    const double score = eval_nmse(w, run.features, target,
                                   cfg.protocol.n_wash + cfg.protocol.n_train,
                                   cfg.protocol.n_eval);
    write_weights_bundle(dir, w, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);

    ScenarioResult result;
    result.summary["nmse"] = score;
    result.summary_line = "narma2: nmse=" + CsvWriter::format_value(score);
    return result;
}

// Reference orbit as a point cloud in (y_t, y_{t+lag}) delay coordinates.
struct OrbitCloud {
    std::vector<std::pair<double, double>> points;
    double rms = 0.0;  // centered RMS of the reference series
    int lag = 3;
};

OrbitCloud orbit_cloud(std::span<const double> reference, int lag) {
    OrbitCloud cloud;
    cloud.lag = lag;
    double mean = 0.0;
    for (double v : reference) mean += v;
    mean /= static_cast<double>(reference.size());
    double var = 0.0;
    for (double v : reference) var += (v - mean) * (v - mean);
    cloud.rms = std::sqrt(var / static_cast<double>(reference.size()));
    for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < reference.size(); ++t) {
        cloud.points.emplace_back(reference[t], reference[t + static_cast<std::size_t>(lag)]);
    }
    return cloud;
}

// First step (relative to `begin`) whose following period stays within
// tol_frac of the reference RMS from the orbit cloud; the set distance is
// insensitive to the slow phase drift of the autonomous cycle. -1 if never.
long return_step(std::span<const double> series, long begin, const OrbitCloud& cloud,
                 int period, double tol_frac) {
    const double tol = tol_frac * cloud.rms * std::numbers::sqrt2;  // two delay coordinates
    const long usable = static_cast<long>(series.size()) - cloud.lag;
    std::vector<double> dist(static_cast<std::size_t>(usable));
    for (long t = begin; t < usable; ++t) {
        const double a = series[static_cast<std::size_t>(t)];
        const double b = series[static_cast<std::size_t>(t + cloud.lag)];
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [x, y] : cloud.points) {
            const double d = (a - x) * (a - x) + (b - y) * (b - y);
            best = std::min(best, d);
        }
        dist[static_cast<std::size_t>(t)] = std::sqrt(best);
    }
    for (long s = begin; s + period <= usable; ++s) {
        double worst = 0.0;
        for (int j = 0; j < period; ++j) {
            worst = std::max(worst, dist[static_cast<std::size_t>(s + j)]);
        }
        if (worst <= tol) return s - begin;
    }
    return -1;
}

std::vector<double> column_slice(const Eigen::MatrixXd& m, Eigen::Index col, long begin,
                                 long count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long n = begin; n < begin + count; ++n) out.push_back(m(n, col));
    return out;
}

Eigen::MatrixXd sine_teacher(const RunConfig& cfg, long count, double period_s) {
    InputSchedule sched = cfg.schedule;
    sched.kind = ScheduleKind::sinusoid;
    sched.period_s = period_s;
    Eigen::MatrixXd teacher(count, 1);
    for (long n = 0; n < count; ++n) teacher(n, 0) = gen_sine_sequence(n, sched);
    return teacher;
}

ScenarioResult run_embed_sine(const RunConfig& cfg, const fs::path& dir) {
    const long teach_len =
        cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.init_steps + 16;
    const Eigen::MatrixXd teacher = sine_teacher(cfg, teach_len, cfg.schedule.period_s);
    const TeacherScaling scaling =
        TeacherScaling::from_range(-1.0, 1.0, cfg.teacher_u_lo_mpa, cfg.teacher_u_hi_mpa);

    PamReservoirSource source = cfg.make_pam_source();
    CounterRng teacher_noise = cfg.master_rng().stream("teacher-drive-noise");
    const Dataset train_ds = harvest_teacher_dataset(
        teacher, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
        cfg.loads.constant_n, cfg.teacher_drive_noise_std, &teacher_noise,
        cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
    const ReadoutWeights weights = fit_ridge(train_ds, cfg.readout_lambda);
    const double train_nmse =
        nmse(predict_all(weights, train_ds.train_features()), train_ds.train_targets());
    write_weights_bundle(dir, weights, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);
    write_teacher_csv(dir, teacher);

    const LoadSchedule schedule =
        LoadSchedule::constant(cfg.loads.constant_n, cfg.protocol.closed_steps);
    CounterRng loop_rng = cfg.master_rng().stream("closed-loop");

    // Teacher-driven run continues from the training state.
    std::vector<double> init_teacher(static_cast<std::size_t>(cfg.protocol.init_steps));
    for (long n = 0; n < cfg.protocol.init_steps; ++n) {
        init_teacher[static_cast<std::size_t>(n)] =
            teacher(cfg.protocol.n_wash + cfg.protocol.n_train + 1 + n, 0);
    }
    source.set_logging(true);
    const ClosedLoopRun teacher_run =
        run_closed_loop(weights, source, InitProtocol::teacher_driven, init_teacher, scaling,
                        cfg.protocol.init_steps, schedule, cfg.clip, loop_rng);
    write_sensor_log(dir, source.sensor_log());
    source.set_logging(false);
    write_output_csv(dir, teacher_run);

    const int period = static_cast<int>(std::llround(cfg.schedule.period_s / cfg.schedule.tau_s));
    const long settle = 10 * period;
    const std::vector<double> closed_tail = column_slice(
        teacher_run.outputs, 0, teacher_run.switch_step + settle,
        cfg.protocol.closed_steps - settle);
    const SpectrumEstimate spectrum =
        power_spectrum(closed_tail, cfg.schedule.tau_s, SpectrumMethod::periodogram);
    write_spectrum_csv(dir / "spectrum.csv", spectrum);
    const double peak_hz = dominant_frequency(spectrum);

    // The trained cycle as an orbit cloud in delay coordinates; return is
    // measured as orbit-set distance (robust to phase drift of the
    // autonomous cycle).
    const OrbitCloud cloud = orbit_cloud(closed_tail, period / 4);

    auto restart_metric = [&](InitProtocol protocol) {
        source.reset();
        const ClosedLoopRun run =
            run_closed_loop(weights, source, protocol, init_teacher, scaling,
                            cfg.protocol.init_steps, schedule, cfg.clip, loop_rng);
        const std::vector<double> out =
            column_slice(run.outputs, 0, 0, run.outputs.rows());
        return return_step(out, run.switch_step, cloud, period, 0.05);
    };
    const long return_zero = restart_metric(InitProtocol::zero_input);
    const long return_random = restart_metric(InitProtocol::random_input);

    ScenarioResult result;
    result.summary["train_nmse"] = train_nmse;
    result.summary["dominant_freq_hz"] = peak_hz;
    result.summary["target_freq_hz"] = 1.0 / cfg.schedule.period_s;
    result.summary["return_step_zero"] = return_zero;
    result.summary["return_step_random"] = return_random;
    result.summary_line = "embed-sine: dominant_freq_hz=" + CsvWriter::format_value(peak_hz) +
                          " return_zero=" + std::to_string(return_zero) +
                          " return_random=" + std::to_string(return_random);
    return result;
}

Eigen::MatrixXd logistic_teacher(const LogisticParams& params, long count, long discard) {
    const auto seq = logistic_sequence(static_cast<std::size_t>(count), params,
                                       static_cast<std::size_t>(discard));
    Eigen::MatrixXd teacher(count, 1);
    for (long n = 0; n < count; ++n) teacher(n, 0) = seq[static_cast<std::size_t>(n)];
    return teacher;
}

ScenarioResult run_embed_logistic(const RunConfig& cfg, const fs::path& dir) {
    const long teach_len =
        cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.init_steps + 16;
    const Eigen::MatrixXd teacher = logistic_teacher(cfg.logistic, teach_len, 100);
    const TeacherScaling scaling =
        TeacherScaling::from_range(0.0, 1.0, cfg.teacher_u_lo_mpa, cfg.teacher_u_hi_mpa);
    const auto truth = [&](double y) { return cfg.logistic.a * y * (1.0 - y); };
    const std::vector<double> grid = linspace(0.05, 0.95, 91);

    // Simulated-muscle reservoir.
    PamReservoirSource source = cfg.make_pam_source();
    CounterRng teacher_noise = cfg.master_rng().stream("teacher-drive-noise");
    const Dataset train_ds = harvest_teacher_dataset(
        teacher, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
        cfg.loads.constant_n, cfg.teacher_drive_noise_std, &teacher_noise,
        cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
    const ReadoutWeights weights = fit_ridge(train_ds, cfg.readout_lambda);
    const double train_nmse =
        nmse(predict_all(weights, train_ds.train_features()), train_ds.train_targets());
    write_weights_bundle(dir, weights, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);
    write_teacher_csv(dir, teacher);

    std::vector<double> init_teacher(static_cast<std::size_t>(cfg.protocol.init_steps));
    for (long n = 0; n < cfg.protocol.init_steps; ++n) {
        init_teacher[static_cast<std::size_t>(n)] =
            teacher(cfg.protocol.n_wash + cfg.protocol.n_train + 1 + n, 0);
    }
    const LoadSchedule schedule =
        LoadSchedule::constant(cfg.loads.constant_n, cfg.protocol.closed_steps);
    CounterRng loop_rng = cfg.master_rng().stream("closed-loop");
    source.set_logging(true);
    const ClosedLoopRun run =
        run_closed_loop(weights, source, InitProtocol::teacher_driven, init_teacher, scaling,
                        cfg.protocol.init_steps, schedule, cfg.clip, loop_rng);
    write_sensor_log(dir, source.sensor_log());
    source.set_logging(false);
    write_output_csv(dir, run);

    const std::vector<double> closed =
        column_slice(run.outputs, 0, run.switch_step, cfg.protocol.closed_steps);
    const double lo = *std::min_element(closed.begin(), closed.end());
    const double hi = *std::max_element(closed.begin(), closed.end());
    const SpectrumEstimate spectrum =
        power_spectrum(closed, cfg.schedule.tau_s, SpectrumMethod::welch);
    write_spectrum_csv(dir / "spectrum.csv", spectrum);
    const double share = dominant_bin_share(spectrum);

    // One-step map diagnostics. The attractor trajectory never visits
    // [0, 0.26), so the grid-wide map quality is probed on a full-coverage
    // identification set of i.i.d. teacher values; both reservoirs get the
    // same drive.
    const long id_wash = 500, id_train = 4000, id_val = 1000;
    const long id_len = id_wash + id_train + id_val;
    CounterRng ident_rng = cfg.master_rng().stream("map-identification");
    std::vector<double> id_drive(static_cast<std::size_t>(id_len));
    Eigen::MatrixXd id_targets(id_len, 1);
    for (long n = 0; n < id_len; ++n) {
        const double y = ident_rng.uniform01();
        id_drive[static_cast<std::size_t>(n)] = scaling.to_pressure(y);
        id_targets(n, 0) = scaling.to_pressure(truth(y));
    }

    source.reset();
    OpenLoopRun id_run = run_open_loop(source, id_drive, id_len, cfg.loads.constant_n);
    const ReadoutWeights id_weights =
        fit_ridge(id_run.features.middleRows(id_wash, id_train),
                  id_targets.middleRows(id_wash, id_train), cfg.readout_lambda);
    auto pam_map = make_held_input_map(id_weights, scaling, source, 30, cfg.loads.constant_n);
    const double map_error_pam = one_step_map_error(pam_map, truth, grid);

    EsnConfig esn_cfg = cfg.esn;
    std::vector<double> coupling_grid = esn_cfg.coupling_grid;
    if (coupling_grid.empty()) coupling_grid = {esn_cfg.coupling};
    std::vector<std::uint64_t> seeds = {CounterRng::mix(cfg.seed, 404)};
    EsnGridResult esn_grid = esn_gridsearch(id_drive, id_targets, id_wash, id_train, id_val,
                                            esn_cfg, cfg.readout_lambda, coupling_grid, seeds);
    EsnParams esn_params;
    esn_params.node_count = esn_cfg.node_count;
    esn_params.input_scale = esn_cfg.input_scale;
    esn_params.coupling = esn_grid.best_coupling;
    esn_params.seed = seeds[0];
    EsnReservoirSource esn_source(esn_params, esn_cfg.input_center_mpa,
                                  esn_cfg.input_halfspan_mpa);
    OpenLoopRun esn_run = run_open_loop(esn_source, id_drive, id_len, 0.0);
    const ReadoutWeights esn_weights = fit_ridge(esn_run.features.middleRows(id_wash, id_train),
                                                 id_targets.middleRows(id_wash, id_train),
                                                 cfg.readout_lambda);
    auto esn_map = make_held_input_map(esn_weights, scaling, esn_source, 30, 0.0);
    const double map_error_esn = one_step_map_error(esn_map, truth, grid);

    {
        CsvWriter w(dir / "one_step_map.csv", {"y", "truth", "pam", "esn"});
        for (double g : grid) {
            w.write_row({g, truth(g), pam_map(g), esn_map(g)});
        }
    }

    ScenarioResult result;
    result.summary["train_nmse"] = train_nmse;
    result.summary["map_error_esn"] = map_error_esn;
    result.summary["map_error_pam"] = map_error_pam;
    result.summary["esn_coupling"] = esn_grid.best_coupling;
    result.summary["closed_min"] = lo;
    result.summary["closed_max"] = hi;
    result.summary["dominant_bin_share"] = share;
    result.summary_line = "embed-logistic: map_error_esn=" +
                          CsvWriter::format_value(map_error_esn) +
                          " map_error_pam=" + CsvWriter::format_value(map_error_pam) +
                          " closed_range=[" + CsvWriter::format_value(lo) + "," +
                          CsvWriter::format_value(hi) + "]" +
                          " dominant_share=" + CsvWriter::format_value(share);
    return result;
}

ScenarioResult run_embed_rossler(const RunConfig& cfg, const fs::path& dir) {
    const long teach_len =
        cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.init_steps + 16;
    const auto traj = rossler_trajectory(static_cast<std::size_t>(teach_len), cfg.rossler);
    Eigen::MatrixXd teacher(teach_len, 3);
    for (long n = 0; n < teach_len; ++n) {
        for (int k = 0; k < 3; ++k) {
            teacher(n, k) = traj[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        }
    }
    double y1_lo = teacher.col(0).minCoeff();
    double y1_hi = teacher.col(0).maxCoeff();
    const TeacherScaling scaling =
        TeacherScaling::from_range(y1_lo, y1_hi, cfg.teacher_u_lo_mpa, cfg.teacher_u_hi_mpa);

    PamReservoirSource source = cfg.make_pam_source();
    CounterRng teacher_noise = cfg.master_rng().stream("teacher-drive-noise");
    const Dataset train_ds = harvest_teacher_dataset(
        teacher, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
        cfg.loads.constant_n, cfg.teacher_drive_noise_std, &teacher_noise,
        cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
    const ReadoutWeights weights = fit_ridge(train_ds, cfg.readout_lambda);
    const double train_nmse =
        nmse(predict_all(weights, train_ds.train_features()), train_ds.train_targets());
    write_weights_bundle(dir, weights, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);
    write_teacher_csv(dir, teacher);

    std::vector<double> init_teacher(static_cast<std::size_t>(cfg.protocol.init_steps));
    for (long n = 0; n < cfg.protocol.init_steps; ++n) {
        init_teacher[static_cast<std::size_t>(n)] =
            teacher(cfg.protocol.n_wash + cfg.protocol.n_train + 1 + n, 0);
    }
    const LoadSchedule schedule =
        LoadSchedule::constant(cfg.loads.constant_n, cfg.protocol.closed_steps);
    CounterRng loop_rng = cfg.master_rng().stream("closed-loop");
    source.set_logging(true);
    const ClosedLoopRun run =
        run_closed_loop(weights, source, InitProtocol::teacher_driven, init_teacher, scaling,
                        cfg.protocol.init_steps, schedule, cfg.clip, loop_rng);
    write_sensor_log(dir, source.sensor_log());
    write_output_csv(dir, run);

    const std::vector<double> closed =
        column_slice(run.outputs, 0, run.switch_step, cfg.protocol.closed_steps);
    const SpectrumEstimate out_spec =
        power_spectrum(closed, cfg.rossler.sample_interval, SpectrumMethod::welch);
    std::vector<double> target_series(static_cast<std::size_t>(cfg.protocol.n_train));
    for (long n = 0; n < cfg.protocol.n_train; ++n) {
        target_series[static_cast<std::size_t>(n)] = teacher(cfg.protocol.n_wash + n, 0);
    }
    const SpectrumEstimate target_spec =
        power_spectrum(target_series, cfg.rossler.sample_interval, SpectrumMethod::welch);
    write_spectrum_csv(dir / "spectrum.csv", out_spec);
    write_spectrum_csv(dir / "target_spectrum.csv", target_spec);

    ScenarioResult result;
    result.summary["train_nmse"] = train_nmse;
    result.summary["dominant_freq_out_hz"] = dominant_frequency(out_spec);
    result.summary["dominant_freq_target_hz"] = dominant_frequency(target_spec);
    result.summary_line = "embed-rossler: dominant_freq_out=" +
                          CsvWriter::format_value(dominant_frequency(out_spec)) +
                          " target=" + CsvWriter::format_value(dominant_frequency(target_spec)) +
                          " train_nmse=" + CsvWriter::format_value(train_nmse);
    return result;
}

struct PlateauStats {
    double load = 0.0;
    double amplitude = 0.0;
    double dominant_freq_hz = 0.0;
    double dominant_share = 0.0;
    int minima_count = 0;
    std::string regime;
};

ScenarioResult run_bifurcation(const RunConfig& cfg, const fs::path& dir, char tag) {
    const TeacherScaling scaling =
        tag == 'C' || tag == 'D'
            ? TeacherScaling::from_range(0.0, 1.0, cfg.teacher_u_lo_mpa, cfg.teacher_u_hi_mpa)
            : TeacherScaling::from_range(-1.0, 1.0, cfg.teacher_u_lo_mpa, cfg.teacher_u_hi_mpa);

    const long teach_len =
        cfg.protocol.n_wash + cfg.protocol.n_train + cfg.protocol.init_steps + 16;
    PamReservoirSource source = cfg.make_pam_source();

    ReadoutWeights weights;
    Eigen::MatrixXd init_teacher_mat;
    CounterRng teacher_noise = cfg.master_rng().stream("teacher-drive-noise");
    if (tag == 'A' || tag == 'B') {
        const Eigen::MatrixXd teacher_a = sine_teacher(cfg, teach_len, cfg.schedule.period_s);
        if (tag == 'A') {
            const Dataset ds = harvest_teacher_dataset(
                teacher_a, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
                cfg.loads.sweep_from_n, cfg.teacher_drive_noise_std, &teacher_noise,
                cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
            weights = fit_ridge(ds, cfg.readout_lambda);
        } else {
            // Joint training: the same readout serves both load conditions.
            const Eigen::MatrixXd teacher_b =
                sine_teacher(cfg, teach_len, 2.0 * cfg.schedule.period_s);
            const Dataset ds_a = harvest_teacher_dataset(
                teacher_a, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
                cfg.loads.sweep_from_n, cfg.teacher_drive_noise_std, &teacher_noise,
                cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
            source.reset();
            const Dataset ds_b = harvest_teacher_dataset(
                teacher_b, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
                cfg.loads.sweep_to_n, cfg.teacher_drive_noise_std, &teacher_noise,
                cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
            Eigen::MatrixXd x(ds_a.n_train + ds_b.n_train, ds_a.features.cols());
            Eigen::MatrixXd y(ds_a.n_train + ds_b.n_train, ds_a.targets.cols());
            x.topRows(ds_a.n_train) = ds_a.train_features();
            x.bottomRows(ds_b.n_train) = ds_b.train_features();
            y.topRows(ds_a.n_train) = ds_a.train_targets();
            y.bottomRows(ds_b.n_train) = ds_b.train_targets();
            weights = fit_ridge(x, y, cfg.readout_lambda);
            source.reset();
        }
        init_teacher_mat = teacher_a;
    } else {
        const Eigen::MatrixXd teacher =
            logistic_teacher(cfg.logistic, teach_len, tag == 'D' ? 2000 : 100);
        const Dataset ds = harvest_teacher_dataset(
            teacher, scaling, source, cfg.protocol.n_wash, cfg.protocol.n_train, cfg.clip,
            cfg.loads.sweep_from_n, cfg.teacher_drive_noise_std, &teacher_noise,
            cfg.loads.train_dither_n, cfg.loads.train_dither_period_steps);
        weights = fit_ridge(ds, cfg.readout_lambda);
        init_teacher_mat = teacher;
    }
    write_weights_bundle(dir, weights, cfg, cfg.protocol.n_wash, cfg.protocol.n_train);

    std::vector<double> init_teacher(static_cast<std::size_t>(cfg.protocol.init_steps));
    for (long n = 0; n < cfg.protocol.init_steps; ++n) {
        init_teacher[static_cast<std::size_t>(n)] =
            init_teacher_mat(cfg.protocol.n_wash + cfg.protocol.n_train + 1 + n, 0);
    }

    const LoadSchedule schedule = LoadSchedule::sweep(
        cfg.loads.sweep_from_n, cfg.loads.sweep_to_n, cfg.loads.sweep_step_n,
        cfg.loads.sweep_hold_steps);
    CounterRng loop_rng = cfg.master_rng().stream("closed-loop");
    const ClosedLoopRun run =
        run_closed_loop(weights, source, InitProtocol::teacher_driven, init_teacher, scaling,
                        cfg.protocol.init_steps, schedule, cfg.clip, loop_rng);
    write_output_csv(dir, run);

    // Per-plateau statistics after discarding the leading transient fraction.
    const int trained_period =
        static_cast<int>(std::llround(cfg.schedule.period_s / cfg.schedule.tau_s));
    std::vector<PlateauStats> plateaus;
    std::vector<double> plateau_loads;
    std::vector<std::vector<double>> plateau_series;
    long offset = run.switch_step;
    for (const auto& seg : schedule.segments) {
        const long discard = static_cast<long>(cfg.analysis.transient_discard_frac *
                                               static_cast<double>(seg.hold_steps));
        PlateauStats st;
        st.load = seg.load_n;
        const std::vector<double> slice =
            column_slice(run.outputs, 0, offset + discard, seg.hold_steps - discard);
        double mean = 0.0;
        for (double v : slice) mean += v;
        mean /= static_cast<double>(slice.size());
        double var = 0.0;
        for (double v : slice) var += (v - mean) * (v - mean);
        st.amplitude = std::sqrt(var / static_cast<double>(slice.size()));
        const SpectrumEstimate spec =
            power_spectrum(slice, cfg.schedule.tau_s, SpectrumMethod::welch);
        st.dominant_freq_hz = dominant_frequency(spec);
        st.dominant_share = dominant_bin_share(spec);
        if (static_cast<long>(slice.size()) >= 3 * trained_period) {
            st.minima_count =
                local_minima_per_period(slice, trained_period).typical_count();
        }
        plateaus.push_back(st);
        plateau_loads.push_back(seg.load_n);
        plateau_series.push_back(slice);
        offset += seg.hold_steps;
    }

    const double amp_ref = plateaus.front().amplitude;
    for (auto& st : plateaus) {
        if (st.amplitude < 0.1 * amp_ref) {
            st.regime = "static";
        } else if (st.dominant_share > cfg.analysis.periodic_share_threshold) {
            st.regime = "periodic";
        } else {
            st.regime = "broadband";
        }
    }

    const AttractorSampling sampling = cfg.analysis.attractor_sampling == "local_minima"
                                           ? AttractorSampling::local_minima
                                           : AttractorSampling::stroboscopic;
    const BifurcationDiagram diagram =
        bifurcation_diagram(plateau_loads, plateau_series, 0.0, sampling);
    {
        CsvWriter w(dir / "bifurcation.csv", {"load", "sample"});
        for (std::size_t i = 0; i < diagram.parameter.size(); ++i) {
            for (double v : diagram.samples[i]) {
                w.write_row({diagram.parameter[i], v});
            }
        }
    }
    {
        CsvWriter w(dir / "plateaus.csv",
                    {"load", "amplitude", "dominant_freq_hz", "dominant_share", "minima_count"});
        for (const auto& st : plateaus) {
            w.write_row({st.load, st.amplitude, st.dominant_freq_hz, st.dominant_share,
                         static_cast<double>(st.minima_count)});
        }
    }

    json regimes = json::array();
    bool periodic_to_static = false;
    bool broadband_to_periodic = false;
    bool periodic_to_broadband = false;
    bool seen_periodic = false;
    bool seen_broadband = false;
    for (const auto& st : plateaus) {
        regimes.push_back({{"load", st.load},
                           {"regime", st.regime},
                           {"amplitude", st.amplitude},
                           {"dominant_freq_hz", st.dominant_freq_hz},
                           {"dominant_share", st.dominant_share},
                           {"minima_count", st.minima_count}});
        if (st.regime == "periodic") seen_periodic = true;
        if (st.regime == "broadband") seen_broadband = true;
        if (seen_periodic && st.regime == "static") periodic_to_static = true;
        if (seen_broadband && st.regime == "periodic") broadband_to_periodic = true;
        if (seen_periodic && st.regime == "broadband") periodic_to_broadband = true;
    }

    std::vector<double> freqs;
    for (const auto& st : plateaus) freqs.push_back(st.dominant_freq_hz);
    double freq_spearman = 0.0;
    try {
        freq_spearman = spearman(plateau_loads, freqs);
    } catch (const NumericalError&) {
        freq_spearman = 0.0;  // all plateaus identical
    }

    ScenarioResult result;
    result.summary["regimes"] = regimes;
    result.summary["periodic_to_static"] = periodic_to_static;
    result.summary["broadband_to_periodic"] = broadband_to_periodic;
    result.summary["periodic_to_broadband"] = periodic_to_broadband;
    result.summary["freq_load_spearman"] = freq_spearman;
    result.summary["regime_changes"] =
        static_cast<int>(periodic_to_static) + static_cast<int>(broadband_to_periodic) +
        static_cast<int>(periodic_to_broadband);
    std::string first = plateaus.front().regime;
    std::string last = plateaus.back().regime;
    result.summary_line = std::string("bifurcation-") + tag + ": regimes " + first + "->" + last +
                          " spearman(load,freq)=" + CsvWriter::format_value(freq_spearman);
    return result;
}

ScenarioResult run_ipc_sensors(const RunConfig& cfg, const fs::path& dir) {
    const long total_steps = cfg.ipc.washout + cfg.ipc.samples;
    // One shared drive across loads so capacities are comparable.
    CounterRng drive_rng = cfg.master_rng().stream("ipc-input");
    std::vector<double> u_raw(static_cast<std::size_t>(total_steps));
    std::vector<double> pressures(static_cast<std::size_t>(total_steps));
    InputSchedule affine = cfg.schedule;
    affine.kind = ScheduleKind::sinusoid;  // reuse A/B fields for the affine map only
    for (long n = 0; n < total_steps; ++n) {
        const double u = drive_rng.uniform(-1.0, 1.0);
        u_raw[static_cast<std::size_t>(n)] = u;
        pressures[static_cast<std::size_t>(n)] = affine.magnitude_mpa * u + affine.bias_mpa;
    }

    struct SetSpec {
        std::string name;
        std::vector<SensorChannel> channels;
        bool single;  // single late sub-sample instead of the full multiplex
    };
    const std::vector<SetSpec> sets = {
        {"pressure", {SensorChannel::pressure}, true},
        {"length", {SensorChannel::length}, true},
        {"resistance", {SensorChannel::resistance}, true},
        {"load", {SensorChannel::load}, true},
        {"all", cfg.multiplex.sensor_mask, false},
    };

    CsvWriter totals(dir / "ipc_totals.csv",
                     {"load", "sensor_set", "total", "rank", "feature_count"});
    CsvWriter marginals(dir / "ipc_marginals.csv", {"load", "sensor_set", "kind", "index", "value"});
    json summary;
    json per_load = json::array();

    bool exported = false;
    for (double load : cfg.ipc.loads) {
        PamReservoirSource source = cfg.make_pam_source();
        OpenLoopRun run = run_open_loop(source, pressures, total_steps, load);
        const Eigen::MatrixXd states = run.features.bottomRows(cfg.ipc.samples);
        std::span<const double> u_tail(u_raw.data() + cfg.ipc.washout,
                                       static_cast<std::size_t>(cfg.ipc.samples));
        if (!exported) {
            // Reservoir matrix and drive for external re-analysis via the
            // `ipc` subcommand (rows = steps, final column bias).
            std::vector<std::string> header;
            for (int k = 0; k < cfg.multiplex.samples_per_interval; ++k) {
                for (SensorChannel c : cfg.multiplex.sensor_mask) {
                    header.push_back(std::string(sensor_channel_name(c)) + "_" +
                                     std::to_string(k));
                }
            }
            header.push_back("bias");
            write_matrix_csv(dir / "states.csv", header, states);
            CsvWriter w(dir / "input.csv", {"step", "value"});
            for (long n = 0; n < cfg.ipc.samples; ++n) {
                w.write_row({static_cast<double>(n), u_tail[static_cast<std::size_t>(n)]});
            }
            exported = true;
        }

        json load_entry;
        load_entry["load"] = load;
        for (const auto& set : sets) {
            Eigen::MatrixXd x;
            if (set.single) {
                // Latest sub-sample of the interval: the settled response.
                const int m = static_cast<int>(cfg.multiplex.sensor_mask.size());
                int idx = -1;
                for (int j = 0; j < m; ++j) {
                    if (cfg.multiplex.sensor_mask[static_cast<std::size_t>(j)] ==
                        set.channels[0]) {
                        idx = j;
                    }
                }
                const int col = (cfg.multiplex.samples_per_interval - 1) * m + idx;
                x.resize(states.rows(), 2);
                x.col(0) = states.col(col);
                x.col(1).setOnes();
            } else {
                x = states;
            }
            const CapacitySpectrum spectrum = total_ipc(x, u_tail, cfg.ipc.core);
            totals.write_cells_then_values(
                {CsvWriter::format_value(load), set.name},
                {spectrum.total, static_cast<double>(spectrum.rank),
                 static_cast<double>(spectrum.feature_count)});
            for (const auto& [deg, v] : spectrum.by_degree) {
                marginals.write_cells_then_values(
                    {CsvWriter::format_value(load), set.name, "degree", std::to_string(deg)}, {v});
            }
            for (const auto& [delay, v] : spectrum.by_max_delay) {
                marginals.write_cells_then_values(
                    {CsvWriter::format_value(load), set.name, "delay", std::to_string(delay)}, {v});
            }
            // Per-term spectrum only for the full set at the first load (the
            // detailed table); singles stay summary-only.
            if (!set.single && load == cfg.ipc.loads.front()) {
                CsvWriter terms(dir / "ipc_spectrum.csv",
                                {"term", "delays", "degrees", "capacity", "thresholded"});
                for (const auto& e : spectrum.entries) {
                    std::string delays, degrees;
                    for (const auto& f : e.term.factors) {
                        delays += (delays.empty() ? "" : ";") + std::to_string(f.delay);
                        degrees += (degrees.empty() ? "" : ";") + std::to_string(f.degree);
                    }
                    terms.write_cells_then_values({e.term.label(), delays, degrees},
                                                  {e.raw, e.thresholded});
                }
            }
            load_entry[set.name] = {{"total", spectrum.total},
                                    {"feature_count", spectrum.feature_count},
                                    {"degenerate", spectrum.degenerate_warning}};
        }
        per_load.push_back(load_entry);
    }
    summary["per_load"] = per_load;

    ScenarioResult result;
    result.summary = summary;
    const auto& first = per_load.front();
    result.summary_line =
        "ipc-sensors: load=" + CsvWriter::format_value(cfg.ipc.loads.front()) +
        " pressure=" + CsvWriter::format_value(first["pressure"]["total"].get<double>()) +
        " length=" + CsvWriter::format_value(first["length"]["total"].get<double>()) +
        " resistance=" + CsvWriter::format_value(first["resistance"]["total"].get<double>()) +
        " load_ch=" + CsvWriter::format_value(first["load"]["total"].get<double>()) +
        " all=" + CsvWriter::format_value(first["all"]["total"].get<double>());
    return result;
}

ScenarioResult run_pam_sweep(const RunConfig& cfg, const fs::path& dir) {
    // Static response map (length for control load and pressure).
    {
        CsvWriter w(dir / "static_length.csv", {"load", "pressure", "length"});
        for (double load = cfg.sweep.load_from_n; load <= cfg.sweep.load_to_n + 1e-9;
             load += cfg.sweep.load_step_n) {
            for (double p = cfg.sweep.pressure_from_mpa; p <= cfg.sweep.pressure_to_mpa + 1e-9;
                 p += cfg.sweep.pressure_step_mpa) {
                w.write_row({load, p, static_balance_length(p, load, cfg.dynamics, cfg.geometry)});
            }
        }
    }

    // Thickness profile and its peak.
    double argmax_l = 0.0;
    {
        CsvWriter w(dir / "thickness.csv", {"length", "thickness"});
        double best = -1e300;
        for (double l = 95.0; l <= 120.0 + 1e-9; l += 0.25) {
            const double d = thickness(l, cfg.geometry);
            w.write_row({l, d});
            if (d > best) {
                best = d;
                argmax_l = l;
            }
        }
    }

    // Sinusoid-driven resistance sweep; the simulator state carries across
    // load plateaus.
    const int period_steps =
        static_cast<int>(std::llround(cfg.schedule.period_s / cfg.schedule.tau_s));
    const int sub = cfg.multiplex.samples_per_interval;
    const int samples_per_period = period_steps * sub;
    PamSimulator sim(cfg.geometry, cfg.dynamics, cfg.resistance, cfg.noise,
                     cfg.master_rng().stream("pam-sweep-noise"));
    long global_step = 0;
    CsvWriter counts(dir / "resistance_minima_counts.csv", {"load", "minima_per_period"});
    CsvWriter diagram(dir / "resistance_bifurcation.csv", {"load", "resistance_minimum"});
    std::vector<int> count_sequence;
    std::vector<double> load_values;
    for (double load = cfg.sweep.resistance_load_from_n;
         load <= cfg.sweep.resistance_load_to_n + 1e-9; load += cfg.sweep.resistance_load_step_n) {
        std::vector<double> resistance_series;
        resistance_series.reserve(
            static_cast<std::size_t>(cfg.sweep.periods_per_load * samples_per_period));
        for (int period = 0; period < cfg.sweep.periods_per_load; ++period) {
            for (int s = 0; s < period_steps; ++s) {
                const double u =
                    to_pressure(gen_sine_sequence(global_step, cfg.schedule), cfg.schedule);
                for (int k = 0; k < sub; ++k) {
                    resistance_series.push_back(sim.clean_sample(load).resistance);
                    sim.run(u, load, cfg.schedule.tau_s / sub);
                }
                ++global_step;
            }
        }
        const std::size_t discard =
            static_cast<std::size_t>(cfg.analysis.transient_discard_frac *
                                     static_cast<double>(resistance_series.size()));
        // Align the retained window to a period boundary.
        const std::size_t aligned =
            (discard + static_cast<std::size_t>(samples_per_period) - 1) /
            static_cast<std::size_t>(samples_per_period) *
            static_cast<std::size_t>(samples_per_period);
        std::span<const double> tail(resistance_series.data() + aligned,
                                     resistance_series.size() - aligned);
        const PeriodMinima minima = local_minima_per_period(tail, samples_per_period);
        const int count = minima.typical_count();
        counts.write_row({load, static_cast<double>(count)});
        for (const auto& per_period : minima.per_period) {
            for (double v : per_period) diagram.write_row({load, v});
        }
        count_sequence.push_back(count);
        load_values.push_back(load);
    }

    // Collapse consecutive duplicates into the phase pattern.
    std::string pattern;
    for (std::size_t i = 0; i < count_sequence.size(); ++i) {
        if (i == 0 || count_sequence[i] != count_sequence[i - 1]) {
            pattern += (pattern.empty() ? "" : "-") + std::to_string(count_sequence[i]);
        }
    }

    ScenarioResult result;
    result.summary["thickness_argmax_mm"] = argmax_l;
    result.summary["minima_pattern"] = pattern;
    json counts_json = json::array();
    for (std::size_t i = 0; i < count_sequence.size(); ++i) {
        counts_json.push_back({{"load", load_values[i]}, {"count", count_sequence[i]}});
    }
    result.summary["minima_counts"] = counts_json;
    result.summary_line = "pam-sweep: thickness_argmax=" + CsvWriter::format_value(argmax_l) +
                          "mm minima_pattern=" + pattern;
    return result;
}

}  // namespace

std::vector<TrainingSizeRow> training_size_study(const RunConfig& cfg,
                                                 std::span<const long> sizes) {
    if (sizes.empty()) {
        throw ConfigError("training_size_study: empty size list");
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        if (sizes[i] < sizes[i - 1]) {
            throw ConfigError("training_size_study: sizes must ascend");
        }
    }
    const long pool = sizes.back();
    const long steps = cfg.protocol.n_wash + pool + cfg.protocol.n_eval;

    PamReservoirSource source = cfg.make_pam_source();
    EmulationRun run = run_emulation_harvest(cfg, source, steps, false);
    const std::vector<SensorChannel> with_load = {SensorChannel::pressure,
                                                  SensorChannel::resistance, SensorChannel::load};
    const Eigen::MatrixXd x =
        select_columns(run.features, multiplex_columns(cfg.multiplex, with_load, true));
    Eigen::MatrixXd y(steps, 1);
    for (long n = 0; n < steps; ++n) y(n, 0) = run.target_length[static_cast<std::size_t>(n)];

    // Large-network comparator on the same drive.
    EsnParams esn_params;
    esn_params.node_count = 600;
    esn_params.input_scale = cfg.esn.input_scale;
    esn_params.coupling = cfg.esn.coupling;
    esn_params.seed = CounterRng::mix(cfg.seed, 606);
    EsnReservoirSource esn_source(esn_params, cfg.esn.input_center_mpa,
                                  cfg.esn.input_halfspan_mpa);
    OpenLoopRun esn_run = run_open_loop(esn_source, run.drive, steps, cfg.loads.constant_n);

    const long eval_begin = cfg.protocol.n_wash + pool;
    std::vector<TrainingSizeRow> table;
    for (long size : sizes) {
        if (size > pool) {
            throw ConfigError("training_size_study: size exceeds harvested data");
        }
        TrainingSizeRow row;
        row.size = size;
        {
            const ReadoutWeights w = fit_ridge(x.middleRows(cfg.protocol.n_wash, size),
                                               y.middleRows(cfg.protocol.n_wash, size),
                                               cfg.readout_lambda);
            row.prc_nmse = eval_nmse(w, x, run.target_length, eval_begin, cfg.protocol.n_eval);
        }
        {
            const ReadoutWeights w =
                fit_ridge(esn_run.features.middleRows(cfg.protocol.n_wash, size),
                          y.middleRows(cfg.protocol.n_wash, size), cfg.readout_lambda);
            row.esn_nmse =
                eval_nmse(w, esn_run.features, run.target_length, eval_begin, cfg.protocol.n_eval);
        }
        table.push_back(row);
    }
    return table;
}

EsnGridResult esn_gridsearch(std::span<const double> drive_mpa, const Eigen::MatrixXd& targets,
                             long n_wash, long n_train, long n_eval, const EsnConfig& esn,
                             double lambda, std::span<const double> grid,
                             std::span<const std::uint64_t> seeds) {
    if (grid.empty()) {
        throw ConfigError("esn_gridsearch: empty grid");
    }
    if (seeds.empty()) {
        throw ConfigError("esn_gridsearch: empty seed set");
    }
    const long steps = n_wash + n_train + n_eval;
    if (static_cast<long>(drive_mpa.size()) < steps || targets.rows() < steps) {
        throw ConfigError("esn_gridsearch: drive/targets shorter than the protocol");
    }
    EsnGridResult result;
    result.best_nmse = std::numeric_limits<double>::infinity();
    for (double coupling : grid) {
        double mean_score = 0.0;
        for (std::uint64_t seed : seeds) {
            EsnParams params;
            params.node_count = esn.node_count;
            params.input_scale = esn.input_scale;
            params.coupling = coupling;
            params.seed = seed;
            EsnReservoirSource source(params, esn.input_center_mpa, esn.input_halfspan_mpa);
            OpenLoopRun run = run_open_loop(source, drive_mpa, steps, 0.0);
            const ReadoutWeights w = fit_ridge(run.features.middleRows(n_wash, n_train),
                                               targets.middleRows(n_wash, n_train), lambda);
            mean_score += nmse(predict_all(w, run.features.middleRows(n_wash + n_train, n_eval)),
                               targets.middleRows(n_wash + n_train, n_eval));
        }
        mean_score /= static_cast<double>(seeds.size());
        result.table.push_back({coupling, mean_score});
        if (mean_score < result.best_nmse) {  // strict: ties keep the smaller coupling
            result.best_nmse = mean_score;
            result.best_coupling = coupling;
        }
    }
    return result;
}

ScenarioResult run_scenario(const RunConfig& cfg, const fs::path& out_dir) {
    ensure_dir(out_dir);
    write_bundle_config(cfg, out_dir);

    ScenarioResult result;
    if (cfg.scenario == "sensor-emulation") {
        result = run_sensor_emulation(cfg, out_dir);
    } else if (cfg.scenario == "narma2") {
        result = run_narma2(cfg, out_dir);
    } else if (cfg.scenario == "embed-sine") {
        result = run_embed_sine(cfg, out_dir);
    } else if (cfg.scenario == "embed-logistic") {
        result = run_embed_logistic(cfg, out_dir);
    } else if (cfg.scenario == "embed-rossler") {
        result = run_embed_rossler(cfg, out_dir);
    } else if (cfg.scenario == "bifurcation-A") {
        result = run_bifurcation(cfg, out_dir, 'A');
    } else if (cfg.scenario == "bifurcation-B") {
        result = run_bifurcation(cfg, out_dir, 'B');
    } else if (cfg.scenario == "bifurcation-C") {
        result = run_bifurcation(cfg, out_dir, 'C');
    } else if (cfg.scenario == "bifurcation-D") {
        result = run_bifurcation(cfg, out_dir, 'D');
    } else if (cfg.scenario == "ipc-sensors") {
        result = run_ipc_sensors(cfg, out_dir);
    } else if (cfg.scenario == "pam-sweep") {
        result = run_pam_sweep(cfg, out_dir);
    } else {
        throw ConfigError("unknown scenario: " + cfg.scenario);
    }

    json summary = result.summary;
    summary["scenario"] = cfg.scenario;
    summary["seed"] = cfg.seed;
    summary["content_hash"] = cfg.content_hash;
    summary["summary_line"] = result.summary_line;
    write_json(out_dir / "summary.json", summary);
    result.summary = summary;
    return result;
}

void analyze_bundle(const fs::path& bundle_dir, const std::string& report) {
    const fs::path output_csv = bundle_dir / "output.csv";
    std::ifstream config_in(bundle_dir / "config.json");
    if (!config_in) {
        throw ConfigError("analyze: bundle has no config.json: " + bundle_dir.string());
    }
    json config;
    config_in >> config;
    const double tau = config.at("schedule").at("tau_s").get<double>();

    const CsvTable table = read_csv(output_csv);
    const auto phase = table.column("phase");
    const auto load = table.column("load");
    const auto y_hat = table.column("y_hat");
    std::vector<double> closed;
    std::vector<double> closed_load;
    for (std::size_t i = 0; i < phase.size(); ++i) {
        if (phase[i] > 0.5) {
            closed.push_back(y_hat[i]);
            closed_load.push_back(load[i]);
        }
    }
    if (closed.empty()) {
        throw ConfigError("analyze: bundle has no closed-loop rows");
    }

    if (report == "spectra") {
        const SpectrumEstimate s = power_spectrum(closed, tau, SpectrumMethod::welch);
        write_spectrum_csv(bundle_dir / "report_spectra.csv", s);
        std::ofstream gp(bundle_dir / "report_spectra.gp");
        gp << "set logscale y\nset xlabel 'frequency (Hz)'\nset ylabel 'power'\n"
           << "plot 'report_spectra.csv' every ::1 using 1:2 with lines title 'output PSD'\n";
    } else if (report == "bifurcation") {
        std::vector<double> params;
        std::vector<std::vector<double>> runs;
        for (std::size_t i = 0; i < closed.size(); ++i) {
            if (params.empty() || closed_load[i] != params.back()) {
                params.push_back(closed_load[i]);
                runs.emplace_back();
            }
            runs.back().push_back(closed[i]);
        }
        const BifurcationDiagram d = bifurcation_diagram(params, runs, 0.25,
                                                         AttractorSampling::stroboscopic);
        CsvWriter w(bundle_dir / "report_bifurcation.csv", {"load", "sample"});
        for (std::size_t i = 0; i < d.parameter.size(); ++i) {
            for (double v : d.samples[i]) w.write_row({d.parameter[i], v});
        }
        std::ofstream gp(bundle_dir / "report_bifurcation.gp");
        gp << "set xlabel 'load (N)'\nset ylabel 'output'\n"
           << "plot 'report_bifurcation.csv' every ::1 using 1:2 with dots notitle\n";
    } else if (report == "attractor") {
        const auto points = delay_embed(closed, 2, 1);
        CsvWriter w(bundle_dir / "report_attractor.csv", {"y_t", "y_t1"});
        for (const auto& p : points) w.write_row({p[0], p[1]});
        std::ofstream gp(bundle_dir / "report_attractor.gp");
        gp << "set xlabel 'y(t)'\nset ylabel 'y(t+1)'\n"
           << "plot 'report_attractor.csv' every ::1 using 1:2 with dots notitle\n";
    } else {
        throw ConfigError("analyze: unknown report '" + report +
                          "' (expected spectra|bifurcation|attractor)");
    }
}

}  // namespace pamrc
