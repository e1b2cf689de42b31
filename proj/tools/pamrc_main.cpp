#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pamrc/config.hpp"
#include "pamrc/csv.hpp"
#include "pamrc/errors.hpp"
#include "pamrc/ipc.hpp"
#include "pamrc/scenarios.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitNumerical = 4;

int run_command(const std::string& scenario, const std::string& config_file,
                const std::string& out_dir, long long seed,
                const std::vector<std::string>& sets) {
    pamrc::RunConfig cfg =
        pamrc::resolve_config_file(scenario, config_file, sets, seed);
    const pamrc::ScenarioResult result = pamrc::run_scenario(cfg, out_dir);
    std::cout << result.summary_line << "\n";
    return 0;
}

int ipc_command(const std::string& states_file, const std::string& input_file, int max_delay,
                int max_degree, const std::string& out_csv) {
    const pamrc::CsvTable states_table = pamrc::read_csv(states_file);
    const pamrc::CsvTable input_table = pamrc::read_csv(input_file);
    const Eigen::MatrixXd states = states_table.to_matrix();
    const auto input_u = input_table.column(input_table.header.size() == 1
                                                ? input_table.header[0]
                                                : std::string("value"));
    pamrc::IpcConfig cfg;
    cfg.max_delay = max_delay;
    cfg.max_degree = max_degree;
    const pamrc::CapacitySpectrum spectrum = pamrc::total_ipc(states, input_u, cfg);

    if (!out_csv.empty()) {
        pamrc::CsvWriter w(out_csv, {"term", "delays", "degrees", "capacity", "thresholded"});
        for (const auto& e : spectrum.entries) {
            std::string delays, degrees;
            for (const auto& f : e.term.factors) {
                delays += (delays.empty() ? "" : ";") + std::to_string(f.delay);
                degrees += (degrees.empty() ? "" : ";") + std::to_string(f.degree);
            }
            w.write_cells_then_values({e.term.label(), delays, degrees}, {e.raw, e.thresholded});
        }
    }
    nlohmann::json summary;
    summary["total"] = spectrum.total;
    summary["rank"] = spectrum.rank;
    summary["feature_count"] = spectrum.feature_count;
    summary["n_samples"] = spectrum.n_samples;
    summary["degenerate"] = spectrum.degenerate_warning;
    for (const auto& [deg, v] : spectrum.by_degree) {
        summary["by_degree"][std::to_string(deg)] = v;
    }
    for (const auto& [delay, v] : spectrum.by_max_delay) {
        summary["by_delay"][std::to_string(delay)] = v;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAM physical-reservoir-computing workbench"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a named scenario");
    std::string scenario;
    std::string config_file;
    std::string out_dir = "run-out";
    long long seed = -1;
    std::vector<std::string> sets;
    run->add_option("scenario", scenario, "scenario name")->required();
    run->add_option("--config", config_file, "JSON config file");
    run->add_option("--out", out_dir, "output bundle directory");
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--set", sets, "dotted-path override, key=value");

    auto* ipc = app.add_subcommand("ipc", "capacity analysis of an external reservoir");
    std::string states_file;
    std::string input_file;
    std::string ipc_out;
    int max_delay = 10;
    int max_degree = 4;
    ipc->add_option("--states", states_file, "states CSV (rows = steps)")->required();
    ipc->add_option("--input", input_file, "input CSV with a 'value' column")->required();
    ipc->add_option("--out", ipc_out, "per-term spectrum CSV");
    ipc->add_option("--max-delay", max_delay, "delay depth D");
    ipc->add_option("--max-degree", max_degree, "degree bound K");

    auto* analyze = app.add_subcommand("analyze", "post-process a run bundle");
    std::string bundle;
    std::string report;
    analyze->add_option("--bundle", bundle, "bundle directory")->required();
    analyze->add_option("--report", report, "spectra|bifurcation|attractor")->required();

    auto* config = app.add_subcommand("config", "print the resolved config for a scenario");
    std::string config_scenario;
    config->add_option("scenario", config_scenario, "scenario name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(scenario, config_file, out_dir, seed, sets);
        }
        if (ipc->parsed()) {
            return ipc_command(states_file, input_file, max_delay, max_degree, ipc_out);
        }
        if (analyze->parsed()) {
            pamrc::analyze_bundle(bundle, report);
            std::cout << "report written to " << bundle << "\n";
            return 0;
        }
        if (config->parsed()) {
            const pamrc::RunConfig cfg =
                pamrc::resolve_config(config_scenario, nlohmann::json::object());
            std::cout << cfg.resolved.dump(2) << "\n";
            return 0;
        }
    } catch (const pamrc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const pamrc::SimulationBlowup& e) {
        std::cerr << "simulation blowup: " << e.what() << "\n";
        return kExitBlowup;
    } catch (const pamrc::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
