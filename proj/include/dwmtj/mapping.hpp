// mapping.hpp
// Real-valued weight matrices mapped onto differential synapse conductances,
// device-state quantization, and a normalized LIF reference model. The
// reference network integrates membrane = position / L on the same time grid
// as the device simulation, which makes it a direct cross-check for networks
// of constant-width dipolar-drift neurons.
#pragma once

#include <cstddef>
#include <string>

#include "dwmtj/crossbar.hpp"
#include "dwmtj/linalg.hpp"
#include "dwmtj/netsim.hpp"

namespace dwmtj {

struct WeightMapping {
    double scale_S_per_unit = 1.0;
    double g_floor_S = 1e-5;  // both differential halves offset by g_AP
};

struct MappedWeights {
    Matrix g_plus;
    Matrix g_minus;
    WeightMapping mapping;
};

struct AbstractLifNeuron {
    double membrane = 0.0;   // in [0, 1]
    double threshold = 0.8;  // in (0, 1]
    double leak_rate = 0.0;  // 1/s
    double gain = 0.0;       // (1/s) per ampere
};

struct LifStepResult {
    AbstractLifNeuron neuron;
    bool fired = false;
};

struct OracleReport {
    double max_deviation_s = 0.0;
    bool spike_count_match = true;
    std::size_t device_spikes = 0;
    std::size_t oracle_spikes = 0;

    std::string to_string() const;  // fixed field names, one per line
};

// s = (g_P - g_AP) / max|W|; positive parts of W land in the plus half,
// negative parts in the minus half, both offset by g_AP. A zero matrix maps
// to all-g_AP with unit scale. Non-finite entries throw std::domain_error.
MappedWeights map_weights(const Matrix& weights, double g_antiparallel_S,
                          double g_parallel_S);

// W' = (G_plus - G_minus) / s.
Matrix decode_weights(const Matrix& g_plus, const Matrix& g_minus,
                      const WeightMapping& mapping);

// Nearest of n_levels equally spaced positions in [a, b]; ties round toward b.
double quantize_position(double x_m, std::size_t n_levels, double window_start_m,
                         double window_end_m);

// m' = clamp(m + (gain * I - leak_rate) * dt, 0, 1); fires at threshold and
// resets to zero.
LifStepResult lif_oracle_step(const AbstractLifNeuron& neuron, double input_current_A,
                              double dt_s);

// Normalized equivalent of a device: gain = stt_mobility / (w * t * L),
// leak_rate = drift / L, threshold = fire position / L. Only constant-width
// tracks with dipolar (or absent) drift reduce exactly; anything else throws
// std::invalid_argument.
AbstractLifNeuron abstract_from_device(const NeuronDevice& device);

// Runs the device network and its normalized equivalent on the same drive
// schedule and matches spike trains greedily in time order per neuron.
OracleReport verify_against_oracle(const Network& net, const DriveWaveform& drives,
                                   const RunConfig& config);

}  // namespace dwmtj
