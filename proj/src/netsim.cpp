#include "dwmtj/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dwmtj {

double DriveWaveform::value_at(std::size_t input, double t_s) const {
    const std::vector<Pulse>& pulses = inputs[input];
    // First pulse starting after t, then check its predecessor.
    auto it = std::upper_bound(pulses.begin(), pulses.end(), t_s,
                               [](double t, const Pulse& p) { return t < p.start_s; });
    if (it == pulses.begin()) return 0.0;
    --it;
    return (t_s < it->end_s) ? it->amplitude : 0.0;
}

std::size_t NetworkLayer::input_count() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CrossbarLayer>) return s.rows_n;
            else return s.plus.rows_n;
        },
        synapses);
}

std::size_t NetworkLayer::output_count() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CrossbarLayer>) return s.cols_m;
            else return s.plus.cols_m;
        },
        synapses);
}

std::size_t SimTrace::total_neurons() const {
    std::size_t total = 0;
    for (std::size_t m : neurons_per_layer) total += m;
    return total;
}

DriveWaveform dc_encode(std::span<const double> values, double v_max) {
    DriveWaveform w;
    w.inputs.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
            throw std::domain_error("dc_encode: values must lie in [0, 1]");
        }
        if (values[i] > 0.0) {
            w.inputs[i].push_back({0.0, std::numeric_limits<double>::infinity(),
                                   v_max * values[i]});
        }
    }
    return w;
}

DriveWaveform rate_encode(std::span<const double> values, double f_max_hz,
                          double pulse_width_s, double v_pulse, std::uint64_t /*seed*/,
                          double duration_s) {
    if (f_max_hz <= 0.0 || pulse_width_s <= 0.0 || duration_s <= 0.0) {
        throw std::invalid_argument("rate_encode: f_max, pulse width and duration must be > 0");
    }
    if (pulse_width_s >= 1.0 / f_max_hz) {
        throw std::invalid_argument("rate_encode: pulse width must be shorter than one period");
    }
    DriveWaveform w;
    w.inputs.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
            throw std::domain_error("rate_encode: values must lie in [0, 1]");
        }
        if (values[i] == 0.0) continue;
        const double period = 1.0 / (values[i] * f_max_hz);
        for (std::size_t k = 0;; ++k) {
            const double start = static_cast<double>(k) * period;
            if (start >= duration_s) break;
            w.inputs[i].push_back({start, start + pulse_width_s, v_pulse});
        }
    }
    return w;
}

std::vector<double> wordline_drive(std::span<const double> neuron_outputs_A,
                                   double sense_resistance_ohm) {
    if (sense_resistance_ohm <= 0.0) {
        throw std::invalid_argument("wordline_drive: sense resistance must be > 0");
    }
    std::vector<double> v(neuron_outputs_A.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = neuron_outputs_A[j] * sense_resistance_ohm;
    }
    return v;
}

namespace {

template <bool Parallel>
void step_layer_impl(std::span<const NeuronDevice> devices, std::span<NeuronState> states,
                     std::span<const double> input_currents_A, double t_s, double dt_s,
                     std::span<std::uint8_t> fired) {
    const std::size_t m = devices.size();
    if (states.size() != m || input_currents_A.size() != m || fired.size() != m) {
        throw std::invalid_argument("step_layer: span sizes must match");
    }
    const auto step_one = [&](std::size_t j) {
        NeuronStepResult r =
            step_neuron(states[j], devices[j], input_currents_A[j], t_s, dt_s);
        states[j] = r.state;
        fired[j] = r.fired ? 1 : 0;
    };
    if (Parallel && m >= 256) {
#pragma omp parallel for schedule(static)
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(m); ++j) {
            step_one(static_cast<std::size_t>(j));
        }
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            step_one(j);
        }
    }
}

// Rebuilt state for a neuron whose integration was cut off by a winner: the
// wall returns to the reset position and the MTJ follows the position rule,
// without the refractory or fire bookkeeping an actual fire would set.
NeuronState inhibited_reset_state(const NeuronState& pre_step, const NeuronDevice& device) {
    NeuronState s = pre_step;
    s.dw_position_m = device.reset_position_m;
    s.mtj_state = mtj_output_state(s, device);
    return s;
}

}  // namespace

LayerEvaluator::LayerEvaluator(const NetworkLayer& layer) : layer_(&layer) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CrossbarLayer>) {
                nodal_ = s.wire_resistance_per_segment_ohm > 0.0;
                if (!nodal_) g_plus_ = conductance_matrix(s);
            } else {
                differential_ = true;
                nodal_ = s.plus.wire_resistance_per_segment_ohm > 0.0 ||
                         s.minus.wire_resistance_per_segment_ohm > 0.0;
                if (!nodal_) {
                    g_plus_ = conductance_matrix(s.plus);
                    g_minus_ = conductance_matrix(s.minus);
                }
            }
        },
        layer.synapses);
}

std::vector<double> LayerEvaluator::currents(std::span<const double> word_voltages_V) const {
    if (!differential_) {
        if (nodal_) {
            return nodal_solve(std::get<CrossbarLayer>(layer_->synapses), word_voltages_V)
                .bit_currents_A;
        }
        return ideal_layer_currents(word_voltages_V, g_plus_);
    }
    const DifferentialLayer& diff = std::get<DifferentialLayer>(layer_->synapses);
    if (nodal_) {
        std::vector<double> plus = nodal_solve(diff.plus, word_voltages_V).bit_currents_A;
        const std::vector<double> minus =
            nodal_solve(diff.minus, word_voltages_V).bit_currents_A;
        for (std::size_t j = 0; j < plus.size(); ++j) plus[j] -= minus[j];
        return plus;
    }
    std::vector<double> plus = ideal_layer_currents(word_voltages_V, g_plus_);
    const std::vector<double> minus = ideal_layer_currents(word_voltages_V, g_minus_);
    for (std::size_t j = 0; j < plus.size(); ++j) plus[j] -= minus[j];
    return plus;
}

void step_layer(std::span<const NeuronDevice> devices, std::span<NeuronState> states,
                std::span<const double> input_currents_A, double t_s, double dt_s,
                std::span<std::uint8_t> fired) {
    step_layer_impl<true>(devices, states, input_currents_A, t_s, dt_s, fired);
}

void step_layer_serial(std::span<const NeuronDevice> devices, std::span<NeuronState> states,
                       std::span<const double> input_currents_A, double t_s, double dt_s,
                       std::span<std::uint8_t> fired) {
    step_layer_impl<false>(devices, states, input_currents_A, t_s, dt_s, fired);
}

void apply_inhibition(std::span<NeuronState> states, std::span<const NeuronDevice> devices,
                      std::size_t winner_index, const InhibitionPolicy& policy) {
    if (winner_index >= states.size()) {
        throw std::invalid_argument("apply_inhibition: winner index out of range");
    }
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, NoInhibition>) {
                return;
            } else {
                for (std::size_t j = 0; j < states.size(); ++j) {
                    if (j == winner_index) continue;
                    if constexpr (std::is_same_v<T, WinnerTakeAll>) {
                        states[j].dw_position_m = devices[j].reset_position_m;
                    } else {
                        states[j].dw_position_m = std::max(
                            0.0, states[j].dw_position_m - p.inhibit_displacement_m);
                    }
                    states[j].mtj_state = mtj_output_state(states[j], devices[j]);
                }
            }
        },
        policy);
}

std::vector<std::vector<NeuronState>> default_initial_states(const Network& net) {
    std::vector<std::vector<NeuronState>> states(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        states[l].resize(net.layers[l].neurons.size());
        for (std::size_t j = 0; j < states[l].size(); ++j) {
            states[l][j].dw_position_m = net.layers[l].neurons[j].reset_position_m;
            states[l][j].mtj_state = mtj_output_state(states[l][j], net.layers[l].neurons[j]);
        }
    }
    return states;
}

SimTrace run_network(const Network& net, const DriveWaveform& drives, const RunConfig& config) {
    return run_network(net, drives, config, default_initial_states(net));
}

SimTrace run_network(const Network& net, const DriveWaveform& drives, const RunConfig& config,
                     std::vector<std::vector<NeuronState>> states) {
    check_valid(net);
    check_valid(drives);
    if (config.dt_s <= 0.0 || config.t_end_s <= 0.0) {
        throw std::invalid_argument("run_network: dt_s and t_end_s must be > 0");
    }
    if (config.sample_stride < 1) {
        throw std::invalid_argument("run_network: sample_stride must be >= 1");
    }
    if (drives.inputs.size() != net.input_width) {
        throw std::invalid_argument("run_network: drive count != network input width");
    }
    if (states.size() != net.layers.size()) {
        throw std::invalid_argument("run_network: initial state layer count mismatch");
    }
    for (std::size_t l = 0; l < states.size(); ++l) {
        if (states[l].size() != net.layers[l].neurons.size()) {
            throw std::invalid_argument("run_network: initial state neuron count mismatch");
        }
    }

    const std::size_t n_layers = net.layers.size();
    SimTrace trace;
    trace.neurons_per_layer.resize(n_layers);
    std::size_t total_neurons = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        trace.neurons_per_layer[l] = net.layers[l].neurons.size();
        total_neurons += trace.neurons_per_layer[l];
    }

    const long steps = static_cast<long>(
        std::ceil(config.t_end_s / config.dt_s - 1e-9));
    std::vector<std::vector<std::uint8_t>> fired(n_layers);
    std::vector<std::vector<double>> outputs(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        fired[l].assign(net.layers[l].neurons.size(), 0);
        outputs[l].assign(net.layers[l].neurons.size(), 0.0);
    }

    std::vector<LayerEvaluator> evaluators;
    evaluators.reserve(n_layers);
    for (const NetworkLayer& layer : net.layers) {
        evaluators.emplace_back(layer);
    }

    const std::size_t samples_upper =
        static_cast<std::size_t>(steps / static_cast<long>(config.sample_stride)) + 1;
    trace.time_s.reserve(samples_upper);
    trace.positions_m.reserve(samples_upper * total_neurons);
    trace.mtj_states.reserve(samples_upper * total_neurons);
    trace.bit_currents_A.reserve(samples_upper * total_neurons);

    std::vector<double> input_v(net.input_width, 0.0);
    std::vector<NeuronState> pre_step;
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt_s;
        const bool sampling = (static_cast<std::size_t>(k) % config.sample_stride) == 0;
        if (sampling) {
            trace.time_s.push_back(t);
            for (std::size_t l = 0; l < n_layers; ++l) {
                for (const NeuronState& s : states[l]) {
                    trace.positions_m.push_back(s.dw_position_m);
                    trace.mtj_states.push_back(static_cast<std::uint8_t>(s.mtj_state));
                }
            }
        }

        for (std::size_t i = 0; i < net.input_width; ++i) {
            input_v[i] = drives.value_at(i, t);
        }
        std::span<const double> upstream(input_v);

        for (std::size_t l = 0; l < n_layers; ++l) {
            const NetworkLayer& layer = net.layers[l];
            const std::vector<double> currents = evaluators[l].currents(upstream);
            if (sampling) {
                trace.bit_currents_A.insert(trace.bit_currents_A.end(), currents.begin(),
                                            currents.end());
            }

            const bool wta = std::holds_alternative<WinnerTakeAll>(config.inhibition);
            if (wta) {
                pre_step.assign(states[l].begin(), states[l].end());
            }
            step_layer(layer.neurons, states[l], currents, t, config.dt_s, fired[l]);

            // Deterministic reduction after the (possibly parallel) step:
            // lowest-index firing neuron wins simultaneous ties.
            std::size_t winner = layer.neurons.size();
            for (std::size_t j = 0; j < fired[l].size(); ++j) {
                if (fired[l][j]) {
                    winner = j;
                    break;
                }
            }
            if (winner != layer.neurons.size()) {
                for (std::size_t j = 0; j < fired[l].size(); ++j) {
                    if (!fired[l][j]) continue;
                    if (wta && j != winner) {
                        // The winner's reset pre-empts this crossing: no event,
                        // no refractory, no fire bookkeeping.
                        states[l][j] = inhibited_reset_state(pre_step[j], layer.neurons[j]);
                        continue;
                    }
                    trace.events.push_back({l, j, t + config.dt_s});
                }
                apply_inhibition(states[l], layer.neurons, winner, config.inhibition);
            }

            for (std::size_t j = 0; j < layer.neurons.size(); ++j) {
                outputs[l][j] = neuron_output_current(states[l][j], layer.neurons[j]);
            }
            outputs[l] = wordline_drive(outputs[l], net.sense_resistance_ohm);
            upstream = outputs[l];
        }
    }
    return trace;
}

SimTrace run_single_neuron(const NeuronDevice& device, const DriveWaveform& drive,
                           const RunConfig& config, const NeuronState& initial) {
    check_valid(device);
    check_valid(drive);
    if (drive.inputs.size() != 1) {
        throw std::invalid_argument("run_single_neuron: expects exactly one drive input");
    }
    if (config.dt_s <= 0.0 || config.t_end_s <= 0.0) {
        throw std::invalid_argument("run_single_neuron: dt_s and t_end_s must be > 0");
    }
    if (config.sample_stride < 1) {
        throw std::invalid_argument("run_single_neuron: sample_stride must be >= 1");
    }

    SimTrace trace;
    trace.neurons_per_layer = {1};
    NeuronState state = initial;
    const long steps = static_cast<long>(
        std::ceil(config.t_end_s / config.dt_s - 1e-9));
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt_s;
        if ((static_cast<std::size_t>(k) % config.sample_stride) == 0) {
            trace.time_s.push_back(t);
            trace.positions_m.push_back(state.dw_position_m);
            trace.mtj_states.push_back(static_cast<std::uint8_t>(state.mtj_state));
        }
        const double current = drive.value_at(0, t);
        NeuronStepResult r = step_neuron(state, device, current, t, config.dt_s);
        state = r.state;
        if (r.fired) {
            trace.events.push_back({0, 0, r.fire_time_s});
        }
    }
    return trace;
}

void check_valid(const DriveWaveform& w) {
    for (std::size_t i = 0; i < w.inputs.size(); ++i) {
        double prev_end = 0.0;
        bool first = true;
        for (const DriveWaveform::Pulse& p : w.inputs[i]) {
            if (p.start_s < 0.0 || p.end_s <= p.start_s) {
                throw std::invalid_argument("drive: pulse times must be non-negative and ordered");
            }
            if (!first && p.start_s < prev_end) {
                throw std::invalid_argument("drive: pulses must not overlap");
            }
            prev_end = p.end_s;
            first = false;
        }
    }
}

void check_valid(const Network& net) {
    if (net.input_width < 1) {
        throw std::invalid_argument("network: input_width must be >= 1");
    }
    if (net.sense_resistance_ohm <= 0.0) {
        throw std::invalid_argument("network: sense_resistance_ohm must be > 0");
    }
    if (net.layers.empty()) {
        throw std::invalid_argument("network: requires at least one layer");
    }
    std::size_t expected_inputs = net.input_width;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const NetworkLayer& layer = net.layers[l];
        std::visit([](const auto& s) { check_valid(s); }, layer.synapses);
        if (layer.input_count() != expected_inputs) {
            throw std::invalid_argument("network: layer input count breaks the layer chain");
        }
        if (layer.neurons.size() != layer.output_count()) {
            throw std::invalid_argument("network: neuron count != layer output count");
        }
        for (const NeuronDevice& n : layer.neurons) {
            check_valid(n);
        }
        expected_inputs = layer.output_count();
    }
}

}  // namespace dwmtj
