// dwmtj-sim: command-line front end for the DW-MTJ neuron/crossbar simulator.
// Subcommands: simulate-neuron, simulate-network, sweep, map-weights, verify.
// Exit codes: 0 success, 1 validation error, 2 runtime error.
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dwmtj/config.hpp"
#include "dwmtj/csv.hpp"
#include "dwmtj/mapping.hpp"
#include "dwmtj/netsim.hpp"

namespace {

using dwmtj::ExperimentConfig;
using nlohmann::json;

struct CliOptions {
    std::string config_path;
    std::string out_path;
    bool dump_config = false;
    std::optional<std::uint64_t> seed;
    // sweep only
    std::string param;
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 0;
};

std::string config_dir(const std::string& config_path) {
    return std::filesystem::path(config_path).parent_path().string();
}

std::string events_path_for(const std::string& trace_path) {
    const std::string suffix = ".csv";
    if (trace_path.size() > suffix.size() &&
        trace_path.compare(trace_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return trace_path.substr(0, trace_path.size() - suffix.size()) + "_events.csv";
    }
    return trace_path + "_events.csv";
}

ExperimentConfig load_config_or_exit(const CliOptions& opts) {
    if (opts.config_path.empty()) {
        std::cerr << "error: --config is required\n";
        std::exit(1);
    }
    dwmtj::ParseResult parsed = dwmtj::parse_config_file(opts.config_path);
    if (!parsed.ok()) {
        std::cerr << "invalid config " << opts.config_path << ":\n";
        for (const std::string& e : parsed.errors) {
            std::cerr << "  " << e << "\n";
        }
        std::exit(1);
    }
    ExperimentConfig config = *parsed.config;
    if (opts.seed) {
        config.drive.seed = *opts.seed;
    }
    return config;
}

int dump_config(const CliOptions& opts) {
    const ExperimentConfig config = load_config_or_exit(opts);
    std::cout << config.to_json().dump(2) << "\n";
    return 0;
}

std::string required_out(const CliOptions& opts, const std::optional<std::string>& fallback,
                         const char* what) {
    if (!opts.out_path.empty()) return opts.out_path;
    if (fallback) return *fallback;
    std::cerr << "error: " << what << " requires --out or the matching output path in the config\n";
    std::exit(1);
}

int simulate_neuron(const CliOptions& opts) {
    const ExperimentConfig config = load_config_or_exit(opts);
    const dwmtj::DriveWaveform drive = dwmtj::build_neuron_drive(config);
    const dwmtj::SimTrace trace =
        dwmtj::run_single_neuron(config.device, drive, dwmtj::build_run_config(config));
    const std::string trace_path = required_out(opts, config.output.trace_csv, "simulate-neuron");
    dwmtj::write_trace_csv(trace, trace_path);
    const std::string events_path =
        (opts.out_path.empty() && config.output.events_csv) ? *config.output.events_csv
                                                            : events_path_for(trace_path);
    dwmtj::write_events_csv(trace, events_path);
    std::cout << "samples=" << trace.sample_count() << " fires=" << trace.events.size()
              << "\n";
    return 0;
}

int simulate_network(const CliOptions& opts) {
    const ExperimentConfig config = load_config_or_exit(opts);
    const dwmtj::Network net = dwmtj::build_network(config, config_dir(opts.config_path));
    const dwmtj::DriveWaveform drive = dwmtj::build_network_drive(config, net.input_width);
    const dwmtj::SimTrace trace =
        dwmtj::run_network(net, drive, dwmtj::build_run_config(config));
    const std::string trace_path =
        required_out(opts, config.output.trace_csv, "simulate-network");
    dwmtj::write_trace_csv(trace, trace_path);
    const std::string events_path =
        (opts.out_path.empty() && config.output.events_csv) ? *config.output.events_csv
                                                            : events_path_for(trace_path);
    dwmtj::write_events_csv(trace, events_path);
    std::cout << "samples=" << trace.sample_count() << " fires=" << trace.events.size()
              << "\n";
    return 0;
}

int verify(const CliOptions& opts) {
    const ExperimentConfig config = load_config_or_exit(opts);
    const dwmtj::Network net = dwmtj::build_network(config, config_dir(opts.config_path));
    const dwmtj::DriveWaveform drive = dwmtj::build_network_drive(config, net.input_width);
    const dwmtj::OracleReport report =
        dwmtj::verify_against_oracle(net, drive, dwmtj::build_run_config(config));
    const std::string text = report.to_string();
    std::cout << text;
    std::optional<std::string> report_path;
    if (!opts.out_path.empty()) report_path = opts.out_path;
    else if (config.output.report_txt) report_path = config.output.report_txt;
    if (report_path) {
        std::ofstream file(*report_path, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open for writing: " + *report_path);
        file << text;
    }
    return 0;
}

int map_weights_cmd(const CliOptions& opts) {
    const ExperimentConfig config = load_config_or_exit(opts);
    if (!config.mapping) {
        std::cerr << "error: map-weights requires a mapping section in the config\n";
        return 1;
    }
    const std::string dir = config_dir(opts.config_path);
    const std::string weights_path =
        (config.mapping->weights_csv.front() == '/' || dir.empty())
            ? config.mapping->weights_csv
            : dir + "/" + config.mapping->weights_csv;
    const dwmtj::Matrix weights = dwmtj::read_matrix_csv(weights_path);
    dwmtj::MappedWeights mapped =
        dwmtj::map_weights(weights, config.synapse.barrier.g_antiparallel_S,
                           config.synapse.barrier.g_parallel_S);

    if (config.mapping->quantize_levels) {
        // Quantize through the device state: conductance -> wall position ->
        // nearest programming level -> conductance.
        const dwmtj::MtjStack& b = config.synapse.barrier;
        const auto quantize_g = [&](double g) {
            const double f = (g - b.g_antiparallel_S) / (b.g_parallel_S - b.g_antiparallel_S);
            const double x = b.window_start_m + f * (b.window_end_m - b.window_start_m);
            const double xq = dwmtj::quantize_position(x, *config.mapping->quantize_levels,
                                                       b.window_start_m, b.window_end_m);
            const double fq = (xq - b.window_start_m) / (b.window_end_m - b.window_start_m);
            return b.g_antiparallel_S + fq * (b.g_parallel_S - b.g_antiparallel_S);
        };
        for (double& g : mapped.g_plus.data) g = quantize_g(g);
        for (double& g : mapped.g_minus.data) g = quantize_g(g);
    }

    std::string plus_path;
    std::string minus_path;
    if (!opts.out_path.empty()) {
        plus_path = opts.out_path + "_gplus.csv";
        minus_path = opts.out_path + "_gminus.csv";
    } else if (config.output.gplus_csv && config.output.gminus_csv) {
        plus_path = *config.output.gplus_csv;
        minus_path = *config.output.gminus_csv;
    } else {
        std::cerr << "error: map-weights requires --out <prefix> or output.gplus_csv and "
                     "output.gminus_csv\n";
        return 1;
    }
    dwmtj::write_matrix_csv(mapped.g_plus, plus_path);
    dwmtj::write_matrix_csv(mapped.g_minus, minus_path);
    std::printf("scale_S_per_unit=%.17g\n", mapped.mapping.scale_S_per_unit);
    return 0;
}

struct SweepPoint {
    double value = 0.0;
    std::size_t total_fires = 0;
    double first_fire_s = -1.0;
    double mean_rate_hz = 0.0;
};

json* navigate(json& root, const std::string& dotted) {
    json* node = &root;
    std::size_t begin = 0;
    while (begin <= dotted.size()) {
        const std::size_t dot = dotted.find('.', begin);
        const std::string key = dotted.substr(begin, dot - begin);
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        begin = dot + 1;
    }
    return node;
}

SweepPoint run_sweep_point(const json& base, const std::string& param, double value,
                           const std::string& base_dir) {
    json j = base;
    json* node = navigate(j, param);
    if (node == nullptr || !node->is_number()) {
        throw std::invalid_argument("sweep parameter not found or not numeric: " + param);
    }
    *node = value;
    dwmtj::ParseResult parsed = dwmtj::parse_config_json(j);
    if (!parsed.ok()) {
        std::string msg = "sweep point " + std::to_string(value) + " invalid:";
        for (const std::string& e : parsed.errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    const ExperimentConfig& config = *parsed.config;

    dwmtj::SimTrace trace;
    if (config.network) {
        const dwmtj::Network net = dwmtj::build_network(config, base_dir);
        const dwmtj::DriveWaveform drive = dwmtj::build_network_drive(config, net.input_width);
        trace = dwmtj::run_network(net, drive, dwmtj::build_run_config(config));
    } else {
        const dwmtj::DriveWaveform drive = dwmtj::build_neuron_drive(config);
        trace = dwmtj::run_single_neuron(config.device, drive, dwmtj::build_run_config(config));
    }
    SweepPoint point;
    point.value = value;
    point.total_fires = trace.events.size();
    point.first_fire_s = trace.events.empty() ? -1.0 : trace.events.front().time_s;
    point.mean_rate_hz = static_cast<double>(trace.events.size()) / config.t_end_s;
    return point;
}

int sweep(const CliOptions& opts) {
    if (opts.param.empty() || opts.steps == 0) {
        std::cerr << "error: sweep requires --param, --from, --to and --steps\n";
        return 1;
    }
    const ExperimentConfig config = load_config_or_exit(opts);  // validates the base config
    const std::string summary_path = required_out(opts, config.output.summary_csv, "sweep");

    std::ifstream file(opts.config_path);
    json base = json::parse(file);
    if (opts.seed) {
        if (base.contains("drive") && base["drive"].is_object()) {
            base["drive"]["seed"] = *opts.seed;
        }
    }
    const std::string base_dir = config_dir(opts.config_path);

    std::vector<double> values(opts.steps);
    for (std::size_t k = 0; k < opts.steps; ++k) {
        values[k] = (opts.steps == 1)
                        ? opts.from
                        : opts.from + (opts.to - opts.from) * static_cast<double>(k) /
                                          static_cast<double>(opts.steps - 1);
    }

    std::vector<SweepPoint> points(values.size());
    std::vector<std::string> failures(values.size());
#ifdef _OPENMP
    int threads = omp_get_max_threads();
    if (const char* cap = std::getenv("DWMTJ_SIM_THREADS")) {
        const int limit = std::atoi(cap);
        if (limit > 0) threads = std::min(threads, limit);
    }
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(values.size()); ++k) {
        try {
            points[k] = run_sweep_point(base, opts.param, values[k], base_dir);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    }
    for (const std::string& f : failures) {
        if (!f.empty()) throw std::invalid_argument(f);
    }

    // Points were generated in ascending parameter order already.
    std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + summary_path);
    out << "param_value,total_fires,first_fire_time_s,mean_fire_rate_hz\n";
    for (const SweepPoint& point : points) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.8e,%zu,%.8e,%.8e\n", point.value,
                      point.total_fires, point.first_fire_s, point.mean_rate_hz);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + summary_path);
    std::cout << "sweep points=" << points.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwmtj-sim: behavioral DW-MTJ neuron, synapse and crossbar simulator"};
    app.require_subcommand(1);

    CliOptions opts;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
        cmd->add_option("--out", opts.out_path, "primary output path");
        cmd->add_flag("--dump-config", opts.dump_config,
                      "print the validated config with defaults filled in and exit");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { opts.seed = s; }, "override drive.seed");
    };

    CLI::App* cmd_neuron =
        app.add_subcommand("simulate-neuron", "single-device integrate/leak/fire trace");
    CLI::App* cmd_network =
        app.add_subcommand("simulate-network", "multilayer crossbar network simulation");
    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "vary one config parameter and summarize each run");
    CLI::App* cmd_map =
        app.add_subcommand("map-weights", "convert a weight CSV into conductance CSVs");
    CLI::App* cmd_verify =
        app.add_subcommand("verify", "cross-check a network against the normalized LIF model");
    for (CLI::App* cmd : {cmd_neuron, cmd_network, cmd_sweep, cmd_map, cmd_verify}) {
        add_common(cmd);
    }
    cmd_sweep->add_option("--param", opts.param, "dotted config path, e.g. drive.amplitude_A");
    cmd_sweep->add_option("--from", opts.from, "first parameter value");
    cmd_sweep->add_option("--to", opts.to, "last parameter value");
    cmd_sweep->add_option("--steps", opts.steps, "number of sweep points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (opts.dump_config) {
            return dump_config(opts);
        }
        if (cmd_neuron->parsed()) return simulate_neuron(opts);
        if (cmd_network->parsed()) return simulate_network(opts);
        if (cmd_sweep->parsed()) return sweep(opts);
        if (cmd_map->parsed()) return map_weights_cmd(opts);
        if (cmd_verify->parsed()) return verify(opts);
        std::cerr << app.help();
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
