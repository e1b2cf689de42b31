#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pamrc/config.hpp"

namespace pamrc {

struct ScenarioResult {
    std::string summary_line;
    nlohmann::json summary;
};

// Executes a named scenario and writes its run bundle (config.json,
// summary.json, CSVs) under out_dir.
ScenarioResult run_scenario(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct TrainingSizeRow {
    long size = 0;
    double prc_nmse = 0.0;
    double esn_nmse = 0.0;
};

// Refits the readout on truncations of a fixed harvested dataset and runs the
// large-network comparator on the same drive.
std::vector<TrainingSizeRow> training_size_study(const RunConfig& cfg,
                                                 std::span<const long> sizes);

struct EsnGridResult {
    double best_coupling = 0.0;
    double best_nmse = 0.0;
    std::vector<std::pair<double, double>> table;  // coupling -> mean NMSE
};

// Grid search over the coupling magnitude with a fixed seed set; ties go to
// the smaller coupling.
EsnGridResult esn_gridsearch(std::span<const double> drive_mpa, const Eigen::MatrixXd& targets,
                             long n_wash, long n_train, long n_eval, const EsnConfig& esn,
                             double lambda, std::span<const double> grid,
                             std::span<const std::uint64_t> seeds);

// Column indices of a sensor subset inside the full multiplexed layout.
std::vector<int> multiplex_columns(const MultiplexConfig& full,
                                   std::span<const SensorChannel> subset, bool keep_bias);

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, std::span<const int> cols);

// Bundle post-processing used by the analyze subcommand.
void analyze_bundle(const std::filesystem::path& bundle_dir, const std::string& report);

}  // namespace pamrc
