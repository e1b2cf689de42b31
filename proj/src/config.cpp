#include "pamrc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "pamrc/errors.hpp"

namespace pamrc {

using nlohmann::json;

LoadSchedule LoadConfig::schedule(long steps_for_constant) const {
    switch (mode) {
        case LoadMode::sweep:
            return LoadSchedule::sweep(sweep_from_n, sweep_to_n, sweep_step_n, sweep_hold_steps);
        case LoadMode::constant:
        case LoadMode::slow_sine:
        default:
            return LoadSchedule::constant(constant_n, steps_for_constant);
    }
}

double LoadConfig::load_at(long step) const {
    switch (mode) {
        case LoadMode::constant:
            return constant_n;
        case LoadMode::slow_sine:
            return sine_mean_n +
                   sine_amplitude_n * std::sin(2.0 * std::numbers::pi *
                                               static_cast<double>(step % sine_period_steps) /
                                               static_cast<double>(sine_period_steps));
        case LoadMode::sweep:
        default: {
            return schedule(1).load_at(step);
        }
    }
}

std::vector<std::string> known_scenarios() {
    return {"sensor-emulation", "narma2",        "embed-sine",    "embed-logistic",
            "embed-rossler",    "bifurcation-A", "bifurcation-B", "bifurcation-C",
            "bifurcation-D",    "ipc-sensors",   "pam-sweep"};
}

namespace {

json base_defaults() {
    json d;
    d["seed"] = 1;
    d["rng_algorithm"] = "splitmix64-counter";
    d["content_hash"] = "";
    d["geometry"] = {{"l0_mm", 108.0},
                     {"outer_d0_mm", 11.0},
                     {"inner_d0_mm", 9.0},
                     {"braid_angle_rad", std::numbers::pi / 6.0},
                     {"schulze_scale", 21.2}};
    d["dynamics"] = {{"a_elas", 6353.0},   {"b_visc", 80.05},
                     {"c_coul", 1000.0},   {"d_force", 200.0},
                     {"sgn_smooth_delta", 1.5}, {"pressure_lag_tau", 0.02},
                     {"integrator_dt", 1e-3}};
    d["resistance"] = {{"gain", 0.27}, {"offset", 0.73}};
    d["noise"] = {{"std_pressure_mpa", 2e-4},
                  {"std_length_mm", 0.003},
                  {"std_resistance", 3e-5},
                  {"std_load_n", 0.5}};
    d["schedule"] = {{"kind", "sinusoid"},
                     {"magnitude_mpa", 0.2},
                     {"bias_mpa", 0.3},
                     {"tau_s", 0.1},
                     {"period_s", 1.2},
                     {"external_file", ""}};
    d["multiplex"] = {{"samples_per_interval", 5},
                      {"sensors", json::array({"pressure", "length", "resistance", "load"})},
                      {"include_bias", true}};
    d["clip"] = {{"u_min_mpa", 0.0}, {"u_max_mpa", 0.5}};
    d["teacher"] = {{"u_lo_mpa", 0.1}, {"u_hi_mpa", 0.5}, {"drive_noise_std", 0.0}};
    d["readout"] = {{"lambda", 1e-6}, {"lambda_grid", json::array()}};
    d["protocol"] = {{"n_wash", 1000},
                     {"n_train", 4000},
                     {"n_eval", 2000},
                     {"init_steps", 1000},
                     {"closed_steps", 5000}};
    d["loads"] = {{"mode", "constant"},
                  {"constant_n", 100.0},
                  {"sweep_from_n", 100.0},
                  {"sweep_to_n", 250.0},
                  {"sweep_step_n", 5.0},
                  {"sweep_hold_steps", 2000},
                  {"sine_mean_n", 100.0},
                  {"sine_amplitude_n", 30.0},
                  {"sine_period_steps", 400},
                  {"train_dither_n", 0.0},
                  {"train_dither_period_steps", 400}};
    d["esn"] = {{"node_count", 100},
                {"input_scale", 1.0},
                {"coupling", 0.9},
                {"coupling_grid", json::array()},
                {"input_center_mpa", 0.1},
                {"input_halfspan_mpa", 0.4}};
    d["analysis"] = {{"transient_discard_frac", 0.25},
                     {"attractor_sampling", "stroboscopic"},
                     {"periodic_share_threshold", 0.8}};
    d["ipc"] = {{"max_delay", 10},
                {"max_degree", 4},
                {"samples", 50000},
                {"washout", 1000},
                {"surrogates", 100},
                {"threshold_sigmas", 4.0},
                {"loads", json::array({50.0, 100.0, 150.0, 200.0, 250.0})}};
    d["logistic"] = {{"a", 3.7}, {"y0", 0.3}};
    d["rossler"] = {{"a", 0.2},
                    {"b", 0.2},
                    {"c", 5.7},
                    {"dt", 0.01},
                    {"sample_interval_s", 0.5},
                    {"y_init", json::array({1.0, 1.0, 1.0})},
                    {"transient_s", 100.0}};
    d["training_sizes"] = json::array({100, 300, 1000, 3000, 10000});
    d["sweep"] = {{"load_from_n", 40.0},
                  {"load_to_n", 260.0},
                  {"load_step_n", 10.0},
                  {"pressure_from_mpa", 0.0},
                  {"pressure_to_mpa", 0.5},
                  {"pressure_step_mpa", 0.025},
                  {"resistance_load_from_n", 30.0},
                  {"resistance_load_to_n", 300.0},
                  {"resistance_load_step_n", 15.0},
                  {"periods_per_load", 40}};
    return d;
}

}  // namespace

json scenario_defaults(const std::string& scenario) {
    json d = base_defaults();
    d["scenario"] = scenario;
    if (scenario == "sensor-emulation") {
        d["schedule"]["kind"] = "uniform-random";
        d["schedule"]["magnitude_mpa"] = 0.5;
        d["schedule"]["bias_mpa"] = 0.0;
        d["protocol"]["n_wash"] = 1000;
        d["protocol"]["n_train"] = 40000;
        d["protocol"]["n_eval"] = 9000;
        d["loads"]["mode"] = "slow_sine";
        d["esn"]["node_count"] = 15;
        d["esn"]["coupling_grid"] = json::array({0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2});
        d["esn"]["input_center_mpa"] = 0.0;
        d["esn"]["input_halfspan_mpa"] = 0.5;
    } else if (scenario == "narma2") {
        d["schedule"]["kind"] = "uniform-random";
        d["schedule"]["magnitude_mpa"] = 0.5;
        d["schedule"]["bias_mpa"] = 0.0;
        d["protocol"]["n_wash"] = 1000;
        d["protocol"]["n_train"] = 5000;
        d["protocol"]["n_eval"] = 2000;
        d["esn"]["input_center_mpa"] = 0.0;
        d["esn"]["input_halfspan_mpa"] = 0.5;
    } else if (scenario == "embed-sine") {
        // limit cycle, period 1.2 s at tau = 0.1 s
        d["teacher"]["drive_noise_std"] = 0.02;
    } else if (scenario == "embed-logistic") {
        d["schedule"]["tau_s"] = 0.2;
        d["esn"]["node_count"] = 100;
        d["esn"]["coupling_grid"] = json::array({0.0, 0.1, 0.2, 0.3, 0.5, 0.8});
        d["teacher"]["drive_noise_std"] = 0.02;
    } else if (scenario == "embed-rossler") {
        d["protocol"]["closed_steps"] = 4000;
    } else if (scenario == "bifurcation-A" || scenario == "bifurcation-B") {
        d["loads"]["mode"] = "sweep";
        d["analysis"]["attractor_sampling"] = "local_minima";
    } else if (scenario == "bifurcation-C" || scenario == "bifurcation-D") {
        d["schedule"]["tau_s"] = 0.2;
        d["loads"]["mode"] = "sweep";
        d["teacher"]["drive_noise_std"] = 0.02;
        if (scenario == "bifurcation-D") {
            d["logistic"]["a"] = 3.55;  // period-4 band
            d["loads"]["train_dither_n"] = 5.0;
        }
    } else if (scenario == "ipc-sensors") {
        // defaults already carry the IPC block
    } else if (scenario == "pam-sweep") {
        // Structural diagnostic; run the channels noise-free.
        d["noise"] = {{"std_pressure_mpa", 0.0},
                      {"std_length_mm", 0.0},
                      {"std_resistance", 0.0},
                      {"std_load_n", 0.0}};
    } else {
        throw ConfigError("unknown scenario: " + scenario);
    }
    return d;
}

namespace {

void merge_strict(json& target, const json& overrides, const std::string& path) {
    if (!overrides.is_object()) {
        throw ConfigError("config: expected object at " + (path.empty() ? "<root>" : path));
    }
    for (const auto& [key, value] : overrides.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!target.contains(key)) {
            throw ConfigError("config: unknown key '" + here + "'");
        }
        json& slot = target[key];
        if (slot.is_object() && value.is_object()) {
            merge_strict(slot, value, here);
        } else if (slot.is_object() != value.is_object()) {
            throw ConfigError("config: type mismatch at '" + here + "'");
        } else {
            if (slot.is_number() && !value.is_number() && !value.is_null()) {
                throw ConfigError("config: expected number at '" + here + "'");
            }
            slot = value;
        }
    }
}

json parse_scalar(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);  // bare strings allowed
    }
}

void apply_key_value(json& target, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    const std::string path = kv.substr(0, eq);
    const json value = parse_scalar(kv.substr(eq + 1));
    json* slot = &target;
    std::size_t start = 0;
    std::string walked;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        walked = walked.empty() ? key : walked + "." + key;
        if (!slot->contains(key)) {
            throw ConfigError("config: unknown key '" + walked + "'");
        }
        slot = &(*slot)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (slot->is_object()) {
        throw ConfigError("--set cannot replace the object at '" + walked + "'");
    }
    *slot = value;
}

double num(const json& j, const char* key) { return j.at(key).get<double>(); }
long integer(const json& j, const char* key) { return j.at(key).get<long>(); }

ScheduleKind parse_kind(const std::string& s) {
    if (s == "sinusoid") return ScheduleKind::sinusoid;
    if (s == "uniform-random") return ScheduleKind::uniform_random;
    if (s == "external-sequence") return ScheduleKind::external_sequence;
    throw ConfigError("config: unknown schedule kind '" + s + "'");
}

SensorChannel parse_channel(const std::string& s) {
    if (s == "pressure") return SensorChannel::pressure;
    if (s == "length") return SensorChannel::length;
    if (s == "resistance") return SensorChannel::resistance;
    if (s == "load") return SensorChannel::load;
    throw ConfigError("config: unknown sensor channel '" + s + "'");
}

LoadMode parse_load_mode(const std::string& s) {
    if (s == "constant") return LoadMode::constant;
    if (s == "sweep") return LoadMode::sweep;
    if (s == "slow_sine") return LoadMode::slow_sine;
    throw ConfigError("config: unknown load mode '" + s + "'");
}

}  // namespace

std::string config_hash(const json& doc) {
    // nlohmann::json keeps object keys sorted, so the dump is canonical.
    const std::string canonical = doc.dump();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(CounterRng::hash_name(canonical)));
    return buf;
}

RunConfig resolve_config(const std::string& scenario, const json& user,
                         const std::vector<std::string>& key_value_overrides,
                         std::int64_t seed_override) {
    json doc = scenario_defaults(scenario);
    if (!user.is_null()) {
        merge_strict(doc, user, "");
    }
    for (const auto& kv : key_value_overrides) {
        apply_key_value(doc, kv);
    }
    if (seed_override >= 0) {
        doc["seed"] = seed_override;
    }
    if (doc.at("scenario").get<std::string>() != scenario) {
        throw ConfigError("config: scenario name mismatch");
    }

    RunConfig cfg;
    cfg.scenario = scenario;
    cfg.seed = doc.at("seed").get<std::uint64_t>();

    const json& g = doc.at("geometry");
    cfg.geometry.l0_mm = num(g, "l0_mm");
    cfg.geometry.outer_d0_mm = num(g, "outer_d0_mm");
    cfg.geometry.inner_d0_mm = num(g, "inner_d0_mm");
    cfg.geometry.braid_angle_rad = num(g, "braid_angle_rad");
    cfg.geometry.schulze_scale = num(g, "schulze_scale");
    cfg.geometry.validate();

    const json& dy = doc.at("dynamics");
    cfg.dynamics.a_elas = num(dy, "a_elas");
    cfg.dynamics.b_visc = num(dy, "b_visc");
    cfg.dynamics.c_coul = num(dy, "c_coul");
    cfg.dynamics.d_force = num(dy, "d_force");
    cfg.dynamics.sgn_smooth_delta = num(dy, "sgn_smooth_delta");
    cfg.dynamics.pressure_lag_tau = num(dy, "pressure_lag_tau");
    cfg.dynamics.integrator_dt = num(dy, "integrator_dt");
    cfg.dynamics.validate();

    cfg.resistance.gain = num(doc.at("resistance"), "gain");
    cfg.resistance.offset = num(doc.at("resistance"), "offset");
    cfg.resistance.validate();

    const json& nz = doc.at("noise");
    cfg.noise.std_pressure_mpa = num(nz, "std_pressure_mpa");
    cfg.noise.std_length_mm = num(nz, "std_length_mm");
    cfg.noise.std_resistance = num(nz, "std_resistance");
    cfg.noise.std_load_n = num(nz, "std_load_n");

    const json& sch = doc.at("schedule");
    cfg.schedule.kind = parse_kind(sch.at("kind").get<std::string>());
    cfg.schedule.magnitude_mpa = num(sch, "magnitude_mpa");
    cfg.schedule.bias_mpa = num(sch, "bias_mpa");
    cfg.schedule.tau_s = num(sch, "tau_s");
    cfg.schedule.period_s = num(sch, "period_s");
    cfg.schedule_external_file = sch.at("external_file").get<std::string>();
    if (cfg.schedule.kind == ScheduleKind::external_sequence &&
        cfg.schedule_external_file.empty()) {
        throw ConfigError("config: external-sequence schedule needs schedule.external_file");
    }
    cfg.schedule.validate();

    const json& mx = doc.at("multiplex");
    cfg.multiplex.samples_per_interval = static_cast<int>(integer(mx, "samples_per_interval"));
    cfg.multiplex.sensor_mask.clear();
    for (const auto& s : mx.at("sensors")) {
        cfg.multiplex.sensor_mask.push_back(parse_channel(s.get<std::string>()));
    }
    cfg.multiplex.include_bias = mx.at("include_bias").get<bool>();
    cfg.multiplex.validate();

    cfg.clip.u_min_mpa = num(doc.at("clip"), "u_min_mpa");
    cfg.clip.u_max_mpa = num(doc.at("clip"), "u_max_mpa");
    cfg.clip.validate();

    cfg.teacher_u_lo_mpa = num(doc.at("teacher"), "u_lo_mpa");
    cfg.teacher_u_hi_mpa = num(doc.at("teacher"), "u_hi_mpa");
    cfg.teacher_drive_noise_std = num(doc.at("teacher"), "drive_noise_std");
    if (!(cfg.teacher_u_lo_mpa < cfg.teacher_u_hi_mpa)) {
        throw ConfigError("config: teacher range must be ascending");
    }
    if (cfg.teacher_drive_noise_std < 0.0) {
        throw ConfigError("config: teacher.drive_noise_std must be non-negative");
    }

    cfg.readout_lambda = num(doc.at("readout"), "lambda");
    cfg.lambda_grid.clear();
    for (const auto& v : doc.at("readout").at("lambda_grid")) {
        cfg.lambda_grid.push_back(v.get<double>());
    }

    const json& pr = doc.at("protocol");
    cfg.protocol.n_wash = integer(pr, "n_wash");
    cfg.protocol.n_train = integer(pr, "n_train");
    cfg.protocol.n_eval = integer(pr, "n_eval");
    cfg.protocol.init_steps = integer(pr, "init_steps");
    cfg.protocol.closed_steps = integer(pr, "closed_steps");

    const json& lo = doc.at("loads");
    cfg.loads.mode = parse_load_mode(lo.at("mode").get<std::string>());
    cfg.loads.constant_n = num(lo, "constant_n");
    cfg.loads.sweep_from_n = num(lo, "sweep_from_n");
    cfg.loads.sweep_to_n = num(lo, "sweep_to_n");
    cfg.loads.sweep_step_n = num(lo, "sweep_step_n");
    cfg.loads.sweep_hold_steps = integer(lo, "sweep_hold_steps");
    cfg.loads.sine_mean_n = num(lo, "sine_mean_n");
    cfg.loads.sine_amplitude_n = num(lo, "sine_amplitude_n");
    cfg.loads.sine_period_steps = integer(lo, "sine_period_steps");
    cfg.loads.train_dither_n = num(lo, "train_dither_n");
    cfg.loads.train_dither_period_steps = integer(lo, "train_dither_period_steps");

    const json& es = doc.at("esn");
    cfg.esn.node_count = static_cast<int>(integer(es, "node_count"));
    cfg.esn.input_scale = num(es, "input_scale");
    cfg.esn.coupling = num(es, "coupling");
    cfg.esn.coupling_grid.clear();
    for (const auto& v : es.at("coupling_grid")) cfg.esn.coupling_grid.push_back(v.get<double>());
    cfg.esn.input_center_mpa = num(es, "input_center_mpa");
    cfg.esn.input_halfspan_mpa = num(es, "input_halfspan_mpa");
    if (!(cfg.esn.input_halfspan_mpa > 0.0)) {
        throw ConfigError("config: esn.input_halfspan_mpa must be positive");
    }

    const json& an = doc.at("analysis");
    cfg.analysis.transient_discard_frac = num(an, "transient_discard_frac");
    cfg.analysis.attractor_sampling = an.at("attractor_sampling").get<std::string>();
    cfg.analysis.periodic_share_threshold = num(an, "periodic_share_threshold");
    if (cfg.analysis.attractor_sampling != "stroboscopic" &&
        cfg.analysis.attractor_sampling != "local_minima") {
        throw ConfigError("config: attractor_sampling must be stroboscopic or local_minima");
    }

    const json& ip = doc.at("ipc");
    cfg.ipc.core.max_delay = static_cast<int>(integer(ip, "max_delay"));
    cfg.ipc.core.max_degree = static_cast<int>(integer(ip, "max_degree"));
    cfg.ipc.core.surrogates = static_cast<int>(integer(ip, "surrogates"));
    cfg.ipc.core.threshold_sigmas = num(ip, "threshold_sigmas");
    cfg.ipc.core.seed = cfg.seed;
    cfg.ipc.samples = integer(ip, "samples");
    cfg.ipc.washout = integer(ip, "washout");
    cfg.ipc.loads.clear();
    for (const auto& v : ip.at("loads")) cfg.ipc.loads.push_back(v.get<double>());

    cfg.logistic.a = num(doc.at("logistic"), "a");
    cfg.logistic.y0 = num(doc.at("logistic"), "y0");
    cfg.logistic.validate();

    const json& ro = doc.at("rossler");
    cfg.rossler.a = num(ro, "a");
    cfg.rossler.b = num(ro, "b");
    cfg.rossler.c = num(ro, "c");
    cfg.rossler.dt = num(ro, "dt");
    cfg.rossler.sample_interval = num(ro, "sample_interval_s");
    for (int i = 0; i < 3; ++i) cfg.rossler.y_init[i] = ro.at("y_init").at(i).get<double>();
    cfg.rossler.validate();

    cfg.training_sizes.clear();
    for (const auto& v : doc.at("training_sizes")) cfg.training_sizes.push_back(v.get<long>());

    const json& sw = doc.at("sweep");
    cfg.sweep.load_from_n = num(sw, "load_from_n");
    cfg.sweep.load_to_n = num(sw, "load_to_n");
    cfg.sweep.load_step_n = num(sw, "load_step_n");
    cfg.sweep.pressure_from_mpa = num(sw, "pressure_from_mpa");
    cfg.sweep.pressure_to_mpa = num(sw, "pressure_to_mpa");
    cfg.sweep.pressure_step_mpa = num(sw, "pressure_step_mpa");
    cfg.sweep.resistance_load_from_n = num(sw, "resistance_load_from_n");
    cfg.sweep.resistance_load_to_n = num(sw, "resistance_load_to_n");
    cfg.sweep.resistance_load_step_n = num(sw, "resistance_load_step_n");
    cfg.sweep.periods_per_load = static_cast<int>(integer(sw, "periods_per_load"));

    // The hash is computed with its own slot blanked, so a bundle's
    // config.json resolves back to the same hash.
    doc["rng_algorithm"] = "splitmix64-counter";
    doc["content_hash"] = "";
    cfg.content_hash = config_hash(doc);
    doc["content_hash"] = cfg.content_hash;
    cfg.resolved = doc;
    return cfg;
}

RunConfig resolve_config_file(const std::string& scenario, const std::filesystem::path& file,
                              const std::vector<std::string>& key_value_overrides,
                              std::int64_t seed_override) {
    json user;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            throw ConfigError("cannot open config file: " + file.string());
        }
        try {
            in >> user;
        } catch (const json::parse_error& e) {
            throw ConfigError("config parse error in " + file.string() + ": " + e.what());
        }
    }
    return resolve_config(scenario, user, key_value_overrides, seed_override);
}

PamReservoirSource RunConfig::make_pam_source() const {
    return PamReservoirSource(geometry, dynamics, resistance, noise, multiplex, schedule.tau_s,
                              CounterRng::mix(seed, CounterRng::hash_name("pam-noise")));
}

}  // namespace pamrc
