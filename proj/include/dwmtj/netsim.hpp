// netsim.hpp
// Feed-forward networks of crossbar layers and four-terminal neurons, driven
// by word-line waveforms on a fixed time grid. Signal flows strictly forward:
// within each step the layers are evaluated in order, each one reading the
// output-MTJ currents of the layer just stepped. The output MTJ is not
// galvanically connected to the input track, so nothing propagates backward.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dwmtj/crossbar.hpp"
#include "dwmtj/device.hpp"

namespace dwmtj {

struct NoInhibition {};
struct WinnerTakeAll {};
struct PartialInhibition {
    double inhibit_displacement_m = 2e-7;  // > 0
};
using InhibitionPolicy = std::variant<NoInhibition, WinnerTakeAll, PartialInhibition>;

// Piecewise-constant per-input drive: amplitude inside [start_s, end_s),
// zero elsewhere. Pulses are kept sorted and non-overlapping per input.
struct DriveWaveform {
    struct Pulse {
        double start_s = 0.0;
        double end_s = 0.0;
        double amplitude = 0.0;
    };
    std::vector<std::vector<Pulse>> inputs;

    double value_at(std::size_t input, double t_s) const;
};

struct NetworkLayer {
    std::variant<CrossbarLayer, DifferentialLayer> synapses;
    std::vector<NeuronDevice> neurons;  // one per bit line

    std::size_t input_count() const;
    std::size_t output_count() const;
};

struct Network {
    std::size_t input_width = 0;
    double sense_resistance_ohm = 1e4;  // output current -> next word-line voltage
    std::vector<NetworkLayer> layers;
};

struct FireEvent {
    std::size_t layer = 0;
    std::size_t neuron = 0;
    double time_s = 0.0;
};

// Columnar time series: positions/mtj states are neuron-major per sample in
// layer order, bit currents likewise per bit line.
struct SimTrace {
    std::vector<std::size_t> neurons_per_layer;
    std::vector<double> time_s;
    std::vector<double> positions_m;       // samples x total_neurons
    std::vector<std::uint8_t> mtj_states;  // samples x total_neurons, AP=0 P=1
    std::vector<double> bit_currents_A;    // samples x total_neurons
    std::vector<FireEvent> events;

    std::size_t total_neurons() const;
    std::size_t sample_count() const { return time_s.size(); }
};

struct RunConfig {
    double dt_s = 1e-9;
    double t_end_s = 1e-6;
    std::size_t sample_stride = 1;
    InhibitionPolicy inhibition = NoInhibition{};
};

// Constant drive V_i = v_max * u_i, u in [0, 1]. Out-of-range values throw
// std::domain_error.
DriveWaveform dc_encode(std::span<const double> values, double v_max);

// Deterministic regular pulse train at frequency u_i * f_max over
// [0, duration_s); the seed is reserved for a future jittered mode. A pulse
// width of at least one period throws std::invalid_argument.
DriveWaveform rate_encode(std::span<const double> values, double f_max_hz,
                          double pulse_width_s, double v_pulse, std::uint64_t seed,
                          double duration_s);

// V_j = I_j * R_sense; throws std::invalid_argument unless R_sense > 0.
std::vector<double> wordline_drive(std::span<const double> neuron_outputs_A,
                                   double sense_resistance_ohm);

// Advance every neuron of one layer by one step; results land in the
// caller-provided state/fired slots. The parallel variant splits neurons
// across threads and is bit-identical to the serial one.
void step_layer(std::span<const NeuronDevice> devices, std::span<NeuronState> states,
                std::span<const double> input_currents_A, double t_s, double dt_s,
                std::span<std::uint8_t> fired);
void step_layer_serial(std::span<const NeuronDevice> devices, std::span<NeuronState> states,
                       std::span<const double> input_currents_A, double t_s, double dt_s,
                       std::span<std::uint8_t> fired);

// Lateral inhibition after a fire: winner-take-all resets every non-winner to
// its reset position; partial inhibition knocks non-winners back by a fixed
// displacement (clamped at 0).
void apply_inhibition(std::span<NeuronState> states, std::span<const NeuronDevice> devices,
                      std::size_t winner_index, const InhibitionPolicy& policy);

// Per-layer readout with the step-invariant parts (conductance matrices)
// computed once. Layers with wire parasitics fall back to a nodal solve per
// evaluation.
class LayerEvaluator {
  public:
    explicit LayerEvaluator(const NetworkLayer& layer);
    std::vector<double> currents(std::span<const double> word_voltages_V) const;

  private:
    const NetworkLayer* layer_;
    Matrix g_plus_;
    Matrix g_minus_;
    bool differential_ = false;
    bool nodal_ = false;
};

// Fixed-step simulation of the whole network. Samples are recorded at the
// start of every sample_stride-th step together with the bit-line currents
// applied over that step. Deterministic: identical inputs give bit-identical
// traces.
SimTrace run_network(const Network& net, const DriveWaveform& drives, const RunConfig& config);
SimTrace run_network(const Network& net, const DriveWaveform& drives, const RunConfig& config,
                     std::vector<std::vector<NeuronState>> initial_states);

// Single-device run: the waveform's first input is the terminal current in
// amperes. Produces a one-neuron trace with no bit-current columns.
SimTrace run_single_neuron(const NeuronDevice& device, const DriveWaveform& drive,
                           const RunConfig& config, const NeuronState& initial = {});

std::vector<std::vector<NeuronState>> default_initial_states(const Network& net);

void check_valid(const DriveWaveform& w);
void check_valid(const Network& net);

}  // namespace dwmtj
