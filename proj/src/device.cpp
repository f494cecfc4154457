#include "dwmtj/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwmtj {

double track_width(const TrackGeometry& g, double x_m) {
    if (x_m < 0.0 || x_m > g.length_m) {
        throw std::domain_error("track_width: position outside [0, L]");
    }
    return g.width_start_m + (g.width_end_m - g.width_start_m) * x_m / g.length_m;
}

double current_density(const TrackGeometry& g, double input_current_A, double x_m) {
    return input_current_A / (track_width(g, x_m) * g.thickness_m);
}

double drift_velocity(const LeakMechanism& leak, const TrackGeometry& g, double x_m) {
    if (x_m < 0.0 || x_m > g.length_m) {
        throw std::domain_error("drift_velocity: position outside [0, L]");
    }
    return std::visit(
        [&](const auto& mech) -> double {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, NoLeak>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, DipolarField>) {
                return -mech.drift_speed_mps;
            } else if constexpr (std::is_same_v<T, AnisotropyGradient>) {
                return -mech.mobility_mk * mech.k_slope_jm4;
            } else {
                // ShapeTaper: v = -mu_S * w'(x) / w(x), w' constant for the
                // linear taper. Zero taper degenerates to no drift.
                const double w_slope =
                    (g.width_end_m - g.width_start_m) / g.length_m;
                return -mech.mobility_ms * w_slope / track_width(g, x_m);
            }
        },
        leak);
}

double dw_velocity(const NeuronDevice& n, double input_current_A, double x_m) {
    return n.material.stt_mobility * current_density(n.geometry, input_current_A, x_m) +
           drift_velocity(n.leak, n.geometry, x_m);
}

MtjState mtj_output_state(const NeuronState& s, const NeuronDevice& n) {
    if (s.dw_position_m >= n.fire_position_m) {
        return MtjState::Parallel;
    }
    if (s.dw_position_m <= n.fire_position_m - n.hysteresis_m) {
        return MtjState::Antiparallel;
    }
    return s.mtj_state;
}

NeuronStepResult step_neuron(const NeuronState& s, const NeuronDevice& n,
                             double input_current_A, double t_s, double dt_s) {
    if (dt_s <= 0.0) {
        throw std::invalid_argument("step_neuron: dt_s must be > 0");
    }
    const double x = s.dw_position_m;
    const double current = (t_s < s.refractory_until_s) ? 0.0 : input_current_A;
    const double v = dw_velocity(n, current, x);
    const double x_new = std::clamp(x + v * dt_s, 0.0, n.geometry.length_m);

    NeuronStepResult result;
    result.state = s;
    if (x < n.fire_position_m && x_new >= n.fire_position_m) {
        // Crossed the threshold: the MTJ switched parallel under the wall
        // before the reset teleported it back.
        result.fired = true;
        result.fire_time_s = t_s + dt_s;
        result.state.dw_position_m = n.reset_position_m;
        result.state.mtj_state = MtjState::Parallel;
        result.state.refractory_until_s = t_s + n.refractory_s;
        result.state.last_fire_time_s = result.fire_time_s;
    } else {
        result.state.dw_position_m = x_new;
        result.state.mtj_state = mtj_output_state(result.state, n);
    }
    return result;
}

double neuron_output_current(const NeuronState& s, const NeuronDevice& n) {
    const double g = (s.mtj_state == MtjState::Parallel)
                         ? n.output_mtj.g_parallel_S
                         : n.output_mtj.g_antiparallel_S;
    return n.supply_voltage_V * g;
}

double synapse_conductance(const SynapseDevice& s) {
    const double a = s.barrier.window_start_m;
    const double b = s.barrier.window_end_m;
    const double f = std::clamp((s.dw_position_m - a) / (b - a), 0.0, 1.0);
    return s.barrier.g_antiparallel_S +
           (s.barrier.g_parallel_S - s.barrier.g_antiparallel_S) * f;
}

ProgramResult program_synapse(SynapseDevice& s, double target_conductance_S,
                              const ProgramPulse& pulse) {
    const double g_ap = s.barrier.g_antiparallel_S;
    const double g_p = s.barrier.g_parallel_S;
    if (target_conductance_S < g_ap || target_conductance_S > g_p) {
        throw std::domain_error("program_synapse: target outside [g_AP, g_P]");
    }
    if (pulse.amplitude_A == 0.0) {
        throw std::invalid_argument("program_synapse: pulse amplitude must be nonzero");
    }
    if (pulse.width_s <= 0.0) {
        throw std::invalid_argument("program_synapse: pulse width must be > 0");
    }

    const double a = s.barrier.window_start_m;
    const double b = s.barrier.window_end_m;
    const double x_target = a + (b - a) * (target_conductance_S - g_ap) / (g_p - g_ap);

    // Rectangular synapse track: one pulse moves the wall by a fixed quantum.
    const double speed = std::abs(s.material.stt_mobility *
                                  current_density(s.geometry, pulse.amplitude_A, 0.0));
    const double dx = speed * pulse.width_s;

    ProgramResult result;
    while (std::abs(s.dw_position_m - x_target) >= dx) {
        const double sign = (x_target > s.dw_position_m) ? 1.0 : -1.0;
        s.dw_position_m =
            std::clamp(s.dw_position_m + sign * dx, 0.0, s.geometry.length_m);
        ++result.pulse_count;
    }
    result.final_position_m = s.dw_position_m;
    result.final_conductance_S = synapse_conductance(s);
    return result;
}

void check_valid(const TrackGeometry& g) {
    if (g.length_m <= 0.0) throw std::invalid_argument("geometry.length_m must be > 0");
    if (g.width_start_m <= 0.0) throw std::invalid_argument("geometry.width_start_m must be > 0");
    if (g.width_end_m <= 0.0) throw std::invalid_argument("geometry.width_end_m must be > 0");
    if (g.thickness_m <= 0.0) throw std::invalid_argument("geometry.thickness_m must be > 0");
}

void check_valid(const MtjStack& m, double track_length_m) {
    if (m.g_antiparallel_S <= 0.0 || m.g_parallel_S <= m.g_antiparallel_S) {
        throw std::invalid_argument("mtj: requires 0 < g_antiparallel_S < g_parallel_S");
    }
    if (m.window_start_m < 0.0 || m.window_start_m >= m.window_end_m ||
        m.window_end_m > track_length_m) {
        throw std::invalid_argument("mtj: requires 0 <= window_start_m < window_end_m <= L");
    }
}

void check_valid(const NeuronDevice& n) {
    check_valid(n.geometry);
    check_valid(n.output_mtj, n.geometry.length_m);
    if (n.material.stt_mobility <= 0.0) {
        throw std::invalid_argument("material.stt_mobility must be > 0");
    }
    if (n.reset_position_m < 0.0 || n.reset_position_m >= n.fire_position_m ||
        n.fire_position_m > n.geometry.length_m) {
        throw std::invalid_argument("neuron: requires 0 <= reset_position_m < fire_position_m <= L");
    }
    if (n.fire_position_m < n.output_mtj.window_start_m ||
        n.fire_position_m > n.output_mtj.window_end_m) {
        throw std::invalid_argument("neuron: fire_position_m must lie within the MTJ window");
    }
    if (n.hysteresis_m < 0.0) throw std::invalid_argument("neuron.hysteresis_m must be >= 0");
    if (n.refractory_s < 0.0) throw std::invalid_argument("neuron.refractory_s must be >= 0");
    std::visit(
        [&](const auto& mech) {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, DipolarField>) {
                if (mech.drift_speed_mps <= 0.0) {
                    throw std::invalid_argument("leak.drift_speed_mps must be > 0");
                }
            } else if constexpr (std::is_same_v<T, AnisotropyGradient>) {
                if (mech.mobility_mk <= 0.0) {
                    throw std::invalid_argument("leak.mobility_mk must be > 0");
                }
                if (mech.k_slope_jm4 < 0.0) {
                    throw std::invalid_argument("leak.k_slope_jm4 must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, ShapeTaper>) {
                if (mech.mobility_ms <= 0.0) {
                    throw std::invalid_argument("leak.mobility_ms must be > 0");
                }
                // Drift must point toward the reset end everywhere.
                if (n.geometry.width_start_m > n.geometry.width_end_m) {
                    throw std::invalid_argument(
                        "geometry: shape taper requires width_start_m <= width_end_m");
                }
            }
        },
        n.leak);
}

void check_valid(const SynapseDevice& s) {
    check_valid(s.geometry);
    check_valid(s.barrier, s.geometry.length_m);
    if (s.material.stt_mobility <= 0.0) {
        throw std::invalid_argument("material.stt_mobility must be > 0");
    }
    if (s.dw_position_m < 0.0 || s.dw_position_m > s.geometry.length_m) {
        throw std::invalid_argument("synapse.dw_position_m must lie in [0, L]");
    }
}

}  // namespace dwmtj
