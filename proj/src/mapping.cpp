#include "dwmtj/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

namespace dwmtj {

std::string OracleReport::to_string() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max_deviation_s=%.9e\nspike_count_match=%s\ndevice_spikes=%zu\noracle_spikes=%zu\n",
                  max_deviation_s, spike_count_match ? "true" : "false", device_spikes,
                  oracle_spikes);
    return buf;
}

MappedWeights map_weights(const Matrix& weights, double g_antiparallel_S,
                          double g_parallel_S) {
    if (!(0.0 < g_antiparallel_S && g_antiparallel_S < g_parallel_S)) {
        throw std::invalid_argument("map_weights: requires 0 < g_AP < g_P");
    }
    double max_abs = 0.0;
    for (double w : weights.data) {
        if (!std::isfinite(w)) {
            throw std::domain_error("map_weights: weights must be finite");
        }
        max_abs = std::max(max_abs, std::abs(w));
    }
    MappedWeights out;
    out.mapping.g_floor_S = g_antiparallel_S;
    out.mapping.scale_S_per_unit =
        (max_abs > 0.0) ? (g_parallel_S - g_antiparallel_S) / max_abs : 1.0;
    out.g_plus = Matrix(weights.rows, weights.cols, g_antiparallel_S);
    out.g_minus = Matrix(weights.rows, weights.cols, g_antiparallel_S);
    for (std::size_t idx = 0; idx < weights.data.size(); ++idx) {
        const double w = weights.data[idx];
        if (w > 0.0) {
            out.g_plus.data[idx] += out.mapping.scale_S_per_unit * w;
        } else if (w < 0.0) {
            out.g_minus.data[idx] += out.mapping.scale_S_per_unit * (-w);
        }
    }
    return out;
}

Matrix decode_weights(const Matrix& g_plus, const Matrix& g_minus,
                      const WeightMapping& mapping) {
    if (g_plus.rows != g_minus.rows || g_plus.cols != g_minus.cols) {
        throw std::invalid_argument("decode_weights: dimension mismatch");
    }
    if (mapping.scale_S_per_unit <= 0.0) {
        throw std::invalid_argument("decode_weights: scale must be > 0");
    }
    Matrix w(g_plus.rows, g_plus.cols);
    for (std::size_t idx = 0; idx < w.data.size(); ++idx) {
        w.data[idx] = (g_plus.data[idx] - g_minus.data[idx]) / mapping.scale_S_per_unit;
    }
    return w;
}

double quantize_position(double x_m, std::size_t n_levels, double window_start_m,
                         double window_end_m) {
    if (n_levels < 2) {
        throw std::invalid_argument("quantize_position: n_levels must be >= 2");
    }
    if (window_end_m <= window_start_m) {
        throw std::invalid_argument("quantize_position: window must be non-empty");
    }
    const double step = (window_end_m - window_start_m) / static_cast<double>(n_levels - 1);
    const double u = (x_m - window_start_m) / step;
    // floor(u + 0.5) rounds half toward the far end of the window.
    double k = std::floor(u + 0.5);
    k = std::clamp(k, 0.0, static_cast<double>(n_levels - 1));
    return window_start_m + k * step;
}

LifStepResult lif_oracle_step(const AbstractLifNeuron& neuron, double input_current_A,
                              double dt_s) {
    if (dt_s <= 0.0) {
        throw std::invalid_argument("lif_oracle_step: dt_s must be > 0");
    }
    LifStepResult r;
    r.neuron = neuron;
    const double m_new = std::clamp(
        neuron.membrane + (neuron.gain * input_current_A - neuron.leak_rate) * dt_s, 0.0,
        1.0);
    if (m_new >= neuron.threshold) {
        r.fired = true;
        r.neuron.membrane = 0.0;
    } else {
        r.neuron.membrane = m_new;
    }
    return r;
}

AbstractLifNeuron abstract_from_device(const NeuronDevice& device) {
    if (device.geometry.width_start_m != device.geometry.width_end_m) {
        throw std::invalid_argument(
            "abstract_from_device: tapered tracks have no exact normalized equivalent");
    }
    if (std::holds_alternative<AnisotropyGradient>(device.leak) ||
        std::holds_alternative<ShapeTaper>(device.leak)) {
        throw std::invalid_argument(
            "abstract_from_device: only dipolar or absent drift is supported");
    }
    if (device.refractory_s != 0.0) {
        throw std::invalid_argument(
            "abstract_from_device: refractory windows are not representable");
    }
    AbstractLifNeuron n;
    const double length = device.geometry.length_m;
    n.gain = device.material.stt_mobility /
             (device.geometry.width_start_m * device.geometry.thickness_m * length);
    n.leak_rate = std::holds_alternative<DipolarField>(device.leak)
                      ? std::get<DipolarField>(device.leak).drift_speed_mps / length
                      : 0.0;
    n.threshold = device.fire_position_m / length;
    n.membrane = device.reset_position_m / length;
    return n;
}

namespace {

struct AbstractRun {
    std::vector<FireEvent> events;
};

// Mirror of run_network over normalized neurons: same per-step layer order,
// same inhibition reduction, same one-step elevated output after a fire.
AbstractRun run_abstract_network(const Network& net, const DriveWaveform& drives,
                                 const RunConfig& config) {
    std::vector<std::vector<AbstractLifNeuron>> neurons(net.layers.size());
    std::vector<std::vector<double>> reset_membrane(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        for (const NeuronDevice& d : net.layers[l].neurons) {
            neurons[l].push_back(abstract_from_device(d));
            reset_membrane[l].push_back(d.reset_position_m / d.geometry.length_m);
        }
    }

    AbstractRun run;
    std::vector<LayerEvaluator> evaluators;
    evaluators.reserve(net.layers.size());
    for (const NetworkLayer& layer : net.layers) {
        evaluators.emplace_back(layer);
    }
    const long steps = static_cast<long>(std::ceil(config.t_end_s / config.dt_s - 1e-9));
    std::vector<double> input_v(net.input_width, 0.0);
    std::vector<std::uint8_t> fired;
    std::vector<double> outputs;

    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt_s;
        for (std::size_t i = 0; i < net.input_width; ++i) {
            input_v[i] = drives.value_at(i, t);
        }
        std::vector<double> upstream(input_v);

        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            const NetworkLayer& layer = net.layers[l];
            std::vector<double> currents = evaluators[l].currents(upstream);

            fired.assign(neurons[l].size(), 0);
            for (std::size_t j = 0; j < neurons[l].size(); ++j) {
                LifStepResult r = lif_oracle_step(neurons[l][j], currents[j], config.dt_s);
                neurons[l][j] = r.neuron;
                fired[j] = r.fired ? 1 : 0;
                if (r.fired) neurons[l][j].membrane = reset_membrane[l][j];
            }

            std::size_t winner = neurons[l].size();
            for (std::size_t j = 0; j < fired.size(); ++j) {
                if (fired[j]) {
                    winner = j;
                    break;
                }
            }
            if (winner != neurons[l].size()) {
                const bool wta = std::holds_alternative<WinnerTakeAll>(config.inhibition);
                for (std::size_t j = 0; j < fired.size(); ++j) {
                    if (!fired[j]) continue;
                    if (wta && j != winner) {
                        fired[j] = 0;
                        neurons[l][j].membrane = reset_membrane[l][j];
                        continue;
                    }
                    run.events.push_back({l, j, t + config.dt_s});
                }
                std::visit(
                    [&](const auto& p) {
                        using T = std::decay_t<decltype(p)>;
                        if constexpr (std::is_same_v<T, WinnerTakeAll>) {
                            for (std::size_t j = 0; j < neurons[l].size(); ++j) {
                                if (j != winner) {
                                    neurons[l][j].membrane = reset_membrane[l][j];
                                }
                            }
                        } else if constexpr (std::is_same_v<T, PartialInhibition>) {
                            for (std::size_t j = 0; j < neurons[l].size(); ++j) {
                                if (j == winner) continue;
                                const double frac =
                                    p.inhibit_displacement_m /
                                    net.layers[l].neurons[j].geometry.length_m;
                                neurons[l][j].membrane =
                                    std::max(0.0, neurons[l][j].membrane - frac);
                            }
                        }
                    },
                    config.inhibition);
            }

            // Fired neurons output the parallel-state current for exactly this
            // step, everyone else the antiparallel baseline.
            outputs.assign(neurons[l].size(), 0.0);
            for (std::size_t j = 0; j < neurons[l].size(); ++j) {
                const NeuronDevice& d = layer.neurons[j];
                const double g = fired[j] ? d.output_mtj.g_parallel_S
                                          : d.output_mtj.g_antiparallel_S;
                outputs[j] = d.supply_voltage_V * g * net.sense_resistance_ohm;
            }
            upstream = outputs;
        }
    }
    return run;
}

}  // namespace

OracleReport verify_against_oracle(const Network& net, const DriveWaveform& drives,
                                   const RunConfig& config) {
    check_valid(net);
    for (const NetworkLayer& layer : net.layers) {
        for (const NeuronDevice& d : layer.neurons) {
            abstract_from_device(d);  // throws on unsupported configurations
        }
    }

    const SimTrace device_trace = run_network(net, drives, config);
    const AbstractRun oracle = run_abstract_network(net, drives, config);

    // Group spike times per (layer, neuron); events are already time-ordered.
    using Key = std::pair<std::size_t, std::size_t>;
    std::map<Key, std::vector<double>> device_spikes;
    std::map<Key, std::vector<double>> oracle_spikes;
    for (const FireEvent& e : device_trace.events) {
        device_spikes[{e.layer, e.neuron}].push_back(e.time_s);
    }
    for (const FireEvent& e : oracle.events) {
        oracle_spikes[{e.layer, e.neuron}].push_back(e.time_s);
    }

    OracleReport report;
    report.device_spikes = device_trace.events.size();
    report.oracle_spikes = oracle.events.size();
    report.spike_count_match = true;
    std::map<Key, char> all_keys;
    for (const auto& kv : device_spikes) all_keys[kv.first] = 0;
    for (const auto& kv : oracle_spikes) all_keys[kv.first] = 0;
    for (const auto& kv : all_keys) {
        const Key& key = kv.first;
        const auto dev_it = device_spikes.find(key);
        const auto ora_it = oracle_spikes.find(key);
        const std::vector<double> empty;
        const std::vector<double>& dev = (dev_it != device_spikes.end()) ? dev_it->second : empty;
        const std::vector<double>& ora = (ora_it != oracle_spikes.end()) ? ora_it->second : empty;
        if (dev.size() != ora.size()) {
            report.spike_count_match = false;
        }
        const std::size_t paired = std::min(dev.size(), ora.size());
        for (std::size_t k = 0; k < paired; ++k) {
            report.max_deviation_s =
                std::max(report.max_deviation_s, std::abs(dev[k] - ora[k]));
        }
    }
    return report;
}

}  // namespace dwmtj
