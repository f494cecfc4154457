// device.hpp
// Behavioral model of domain-wall MTJ neurons and synapses.
//
// The state variable of every device is the domain-wall position x along a
// ferromagnetic track of length L. Motion follows an overdamped 1D
// collective-coordinate law
//
//     v(x) = stt_mobility * J(x) + v_drift(x)
//
// where J is the current density through the local track cross-section and
// v_drift is the built-in restoring drift of the chosen leak mechanism
// (always directed toward x = 0). An electrically isolated output MTJ sits
// over the fire end of the track; its free layer follows the track
// magnetization under the junction, so the DW position switches the MTJ
// between the antiparallel and parallel conductance states without any
// galvanic path from input to output.
#pragma once

#include <cstdint>
#include <optional>
#include <variant>

namespace dwmtj {

// Track cross-section, linearly tapered from width_start_m at the reset end
// (x = 0) to width_end_m at the fire end (x = L).
struct TrackGeometry {
    double length_m = 1e-6;
    double width_start_m = 1e-7;
    double width_end_m = 1e-7;
    double thickness_m = 5e-9;
};

struct NoLeak {};

// Constant drift from the stray field of a ferromagnet under the track.
struct DipolarField {
    double drift_speed_mps = 5.0;  // > 0, drift is toward x = 0
};

// Linear anisotropy profile K(x) = k0 + k_slope * x; the energy slope pulls
// the DW toward the low-anisotropy (x = 0) end at constant velocity.
struct AnisotropyGradient {
    double mobility_mk = 0.0;  // (m/s) per (J/m^3 per m)
    double k0_jm3 = 0.0;
    double k_slope_jm4 = 0.0;  // >= 0
};

// Trapezoidal track: the DW lowers its energy by moving toward the narrow
// end, with drift speed proportional to the local relative width gradient.
struct ShapeTaper {
    double mobility_ms = 1e-6;  // m^2/s
};

using LeakMechanism = std::variant<NoLeak, DipolarField, AnisotropyGradient, ShapeTaper>;

struct MaterialParams {
    double stt_mobility = 5e-11;  // (m/s) per (A/m^2)
};

// Tunnel junction footprint [window_start_m, window_end_m] along the track
// and its two terminal conductances.
struct MtjStack {
    double g_parallel_S = 5e-5;
    double g_antiparallel_S = 1e-5;
    double window_start_m = 0.0;
    double window_end_m = 1e-6;
};

enum class MtjState : std::uint8_t { Antiparallel = 0, Parallel = 1 };

struct NeuronDevice {
    TrackGeometry geometry;
    LeakMechanism leak = DipolarField{};
    MaterialParams material;
    MtjStack output_mtj{5e-5, 1e-5, 0.6e-6, 1e-6};
    double fire_position_m = 0.8e-6;
    double reset_position_m = 0.0;
    double hysteresis_m = 5e-8;
    double refractory_s = 0.0;
    double supply_voltage_V = 0.1;
};

struct NeuronState {
    double dw_position_m = 0.0;
    MtjState mtj_state = MtjState::Antiparallel;
    double refractory_until_s = 0.0;
    std::optional<double> last_fire_time_s;
};

// Three-terminal analog synapse: rectangular track, long tunnel barrier.
struct SynapseDevice {
    TrackGeometry geometry;
    MaterialParams material;
    MtjStack barrier{5e-5, 1e-5, 0.0, 1e-6};
    double dw_position_m = 0.0;
};

struct NeuronStepResult {
    NeuronState state;
    bool fired = false;
    double fire_time_s = 0.0;
};

struct ProgramPulse {
    double amplitude_A = 1e-4;
    double width_s = 1e-9;
};

struct ProgramResult {
    int pulse_count = 0;
    double final_position_m = 0.0;
    double final_conductance_S = 0.0;
};

// Local track width w(x); throws std::domain_error outside [0, L].
double track_width(const TrackGeometry& g, double x_m);

// J = I / (w(x) * t). Sign of the result equals the sign of the current.
double current_density(const TrackGeometry& g, double input_current_A, double x_m);

// Built-in drift velocity of the leak mechanism at position x; always <= 0.
double drift_velocity(const LeakMechanism& leak, const TrackGeometry& g, double x_m);

// Net DW velocity under an applied terminal current. Positive current moves
// the wall toward the fire end (+x).
double dw_velocity(const NeuronDevice& n, double input_current_A, double x_m);

// One explicit-Euler step over [t, t + dt]. Input current is ignored while
// the neuron is refractory (leak still applies). A threshold crossing from
// below fires: the wall teleports to reset_position_m and the stored MTJ
// state keeps the parallel value it acquired at the crossing until the next
// step recomputes it, so the output current is elevated for one step.
NeuronStepResult step_neuron(const NeuronState& s, const NeuronDevice& n,
                             double input_current_A, double t_s, double dt_s);

// Position rule with hysteresis: parallel at/above fire_position_m,
// antiparallel at/below fire_position_m - hysteresis_m, prior state between.
MtjState mtj_output_state(const NeuronState& s, const NeuronDevice& n);

// Current through the isolated output MTJ under the supply voltage. Does not
// depend on the input terminal current in any way.
double neuron_output_current(const NeuronState& s, const NeuronDevice& n);

// Area-fraction parallel-conduction law over the barrier window [a, b]:
// G = g_AP + (g_P - g_AP) * clamp((x - a) / (b - a), 0, 1).
double synapse_conductance(const SynapseDevice& s);

// Open-loop programming: inverts the conductance law to a target position and
// applies signed fixed-quantum pulses until the wall is within one pulse
// displacement of it. Throws std::domain_error for targets outside
// [g_AP, g_P] and std::invalid_argument for a zero pulse amplitude.
ProgramResult program_synapse(SynapseDevice& s, double target_conductance_S,
                              const ProgramPulse& pulse);

// Structural invariant checks; throw std::invalid_argument naming the field.
void check_valid(const TrackGeometry& g);
void check_valid(const MtjStack& m, double track_length_m);
void check_valid(const NeuronDevice& n);
void check_valid(const SynapseDevice& s);

}  // namespace dwmtj
