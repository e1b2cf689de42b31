#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pamrc/ipc.hpp"
#include "pamrc/loop.hpp"
#include "pamrc/pam.hpp"
#include "pamrc/readout.hpp"
#include "pamrc/reservoir.hpp"
#include "pamrc/signals.hpp"

namespace pamrc {

enum class LoadMode { constant, sweep, slow_sine };

struct LoadConfig {
    LoadMode mode = LoadMode::constant;
    double constant_n = 100.0;
    double sweep_from_n = 100.0;
    double sweep_to_n = 250.0;
    double sweep_step_n = 5.0;
    long sweep_hold_steps = 2000;
    double sine_mean_n = 100.0;
    double sine_amplitude_n = 30.0;
    long sine_period_steps = 400;
    double train_dither_n = 0.0;
    long train_dither_period_steps = 400;

    LoadSchedule schedule(long steps_for_constant) const;
    double load_at(long step) const;  // slow_sine/constant evaluation per step
};

struct ProtocolConfig {
    long n_wash = 1000;
    long n_train = 4000;
    long n_eval = 2000;
    long init_steps = 1000;
    long closed_steps = 5000;
};

struct EsnConfig {
    int node_count = 100;
    double input_scale = 1.0;
    double coupling = 0.9;
    std::vector<double> coupling_grid;  // non-empty enables grid search
    double input_center_mpa = 0.1;      // control-value normalization
    double input_halfspan_mpa = 0.4;
};

struct AnalysisConfig {
    double transient_discard_frac = 0.25;
    std::string attractor_sampling = "stroboscopic";  // or "local_minima"
    double periodic_share_threshold = 0.8;
};

struct IpcRunConfig {
    IpcConfig core;
    long samples = 50000;
    long washout = 1000;
    std::vector<double> loads = {50.0, 100.0, 150.0, 200.0, 250.0};
};

struct SweepConfig {
    double load_from_n = 40.0;
    double load_to_n = 260.0;
    double load_step_n = 10.0;
    double pressure_from_mpa = 0.0;
    double pressure_to_mpa = 0.5;
    double pressure_step_mpa = 0.025;
    // Sinusoid-driven resistance sweep; extension-only behaviour needs loads
    // several times the compression bound, see the geometry limits.
    double resistance_load_from_n = 40.0;
    double resistance_load_to_n = 820.0;
    double resistance_load_step_n = 30.0;
    int periods_per_load = 40;
};

struct RunConfig {
    std::string scenario;
    std::uint64_t seed = 1;

    PamGeometry geometry;
    PamDynParams dynamics;
    ResistanceCalib resistance;
    NoiseConfig noise;
    InputSchedule schedule;
    std::string schedule_external_file;  // external-sequence drive CSV
    MultiplexConfig multiplex;
    ClipRange clip;
    double teacher_u_lo_mpa = 0.1;
    double teacher_u_hi_mpa = 0.5;
    double teacher_drive_noise_std = 0.0;  // teacher units, training drive only
    double readout_lambda = 1e-6;
    std::vector<double> lambda_grid;
    ProtocolConfig protocol;
    LoadConfig loads;
    EsnConfig esn;
    AnalysisConfig analysis;
    IpcRunConfig ipc;
    LogisticParams logistic;
    RosslerParams rossler;
    std::vector<long> training_sizes;
    SweepConfig sweep;

    nlohmann::json resolved;   // canonical resolved document
    std::string content_hash;  // stable under key reordering

    PamReservoirSource make_pam_source() const;
    CounterRng master_rng() const { return CounterRng(seed); }
};

std::vector<std::string> known_scenarios();

// Complete default document for a scenario (every key present).
nlohmann::json scenario_defaults(const std::string& scenario);

// Defaults overlaid with a user document and key=value overrides; unknown or
// type-mismatched keys are rejected with their full path.
RunConfig resolve_config(const std::string& scenario, const nlohmann::json& user,
                         const std::vector<std::string>& key_value_overrides = {},
                         std::int64_t seed_override = -1);

RunConfig resolve_config_file(const std::string& scenario, const std::filesystem::path& file,
                              const std::vector<std::string>& key_value_overrides = {},
                              std::int64_t seed_override = -1);

// FNV-1a 64 over the canonical (sorted-key) dump.
std::string config_hash(const nlohmann::json& doc);

}  // namespace pamrc
