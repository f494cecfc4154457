// config.hpp
// Experiment configuration: a strict JSON schema (unknown keys rejected) that
// fills documented defaults and reports every validation problem with its key
// path, not just the first one.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwmtj/linalg.hpp"
#include "dwmtj/netsim.hpp"

namespace dwmtj {

enum class DriveKind { Dc, Rate, DcCurrent, PulsedCurrent };

struct DriveSpec {
    DriveKind kind = DriveKind::DcCurrent;
    std::vector<double> values;    // dc / rate, one entry per word line
    double v_max_V = 0.1;          // dc
    double f_max_hz = 1e7;         // rate
    double pulse_width_s = 1e-8;   // rate
    double v_pulse_V = 0.1;        // rate
    std::uint64_t seed = 0;        // rate (reserved for jittered mode)
    double amplitude_A = 1e-4;     // dc_current / pulsed_current
    double on_s = 5e-8;            // pulsed_current
    double off_s = 5e-8;           // pulsed_current
};

// Exactly one of positions / position_fraction / conductance_csv / weights /
// weights_csv defines the synapse states of a layer. Weight-based layers
// become differential pairs; the other forms are plain crossbars.
struct LayerSpec {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double wire_resistance_per_segment_ohm = 0.0;
    std::optional<Matrix> positions;
    std::optional<double> position_fraction;
    std::optional<std::string> conductance_csv;
    std::optional<Matrix> weights;
    std::optional<std::string> weights_csv;
    std::optional<NeuronDevice> neuron_override;
};

struct NetworkSpec {
    std::size_t input_width = 0;
    double sense_resistance_ohm = 1e4;
    std::vector<LayerSpec> layers;
};

struct OutputSpec {
    std::optional<std::string> trace_csv;
    std::optional<std::string> events_csv;
    std::optional<std::string> report_txt;
    std::optional<std::string> summary_csv;
    std::optional<std::string> gplus_csv;
    std::optional<std::string> gminus_csv;
};

struct MappingSpec {
    std::string weights_csv;
    std::optional<std::size_t> quantize_levels;
};

struct ExperimentConfig {
    NeuronDevice device;
    SynapseDevice synapse;
    std::optional<NetworkSpec> network;
    DriveSpec drive;
    double dt_s = 1e-9;
    double t_end_s = 1e-6;
    std::size_t sample_stride = 1;
    InhibitionPolicy inhibition = NoInhibition{};
    OutputSpec output;
    std::optional<MappingSpec> mapping;

    nlohmann::json to_json() const;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && config.has_value(); }
};

ParseResult parse_config_file(const std::string& path);
ParseResult parse_config_json(const nlohmann::json& j);

// Materialize the configured network: weight layers are mapped onto
// differential conductance pairs, position layers onto plain crossbars.
// Relative CSV paths resolve against base_dir. Throws std::invalid_argument
// on inconsistent shapes, std::runtime_error on I/O failure.
Network build_network(const ExperimentConfig& config, const std::string& base_dir = "");

// Word-line waveform for the configured network drive (kinds dc / rate).
DriveWaveform build_network_drive(const ExperimentConfig& config, std::size_t input_width);

// Terminal current waveform for a single-neuron run (dc_current /
// pulsed_current).
DriveWaveform build_neuron_drive(const ExperimentConfig& config);

RunConfig build_run_config(const ExperimentConfig& config);

}  // namespace dwmtj
