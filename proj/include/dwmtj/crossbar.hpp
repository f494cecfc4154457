// crossbar.hpp
// One N x M synaptic crossbar: N word lines (inputs) crossing M bit lines
// (outputs) with a synapse at every intersection. Readout comes in two
// flavors: the ideal virtual-ground dot product, and a full nodal solve of
// the resistive mesh when wire parasitics matter.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dwmtj/device.hpp"
#include "dwmtj/linalg.hpp"

namespace dwmtj {

struct CrossbarLayer {
    std::size_t rows_n = 0;  // word lines
    std::size_t cols_m = 0;  // bit lines
    std::vector<SynapseDevice> synapses;  // row-major, rows_n * cols_m
    double wire_resistance_per_segment_ohm = 0.0;

    SynapseDevice& at(std::size_t i, std::size_t j) { return synapses[i * cols_m + j]; }
    const SynapseDevice& at(std::size_t i, std::size_t j) const {
        return synapses[i * cols_m + j];
    }
};

// Signed weights realized as two matched crossbars sensed differentially.
struct DifferentialLayer {
    CrossbarLayer plus;
    CrossbarLayer minus;
};

struct NodalSolution {
    std::vector<double> node_voltages;     // word nodes then bit nodes, row-major
    std::vector<double> bit_currents_A;    // per bit line
};

// Uniform-position layer builder used all over the tests and the CLI.
CrossbarLayer make_layer(std::size_t rows, std::size_t cols, const SynapseDevice& prototype,
                         double wire_resistance_per_segment_ohm = 0.0);

// Element (i, j) = synapse_conductance(synapses[i][j]).
Matrix conductance_matrix(const CrossbarLayer& layer);

// I_j = sum_i V_i * G_ij with every bit line held at virtual ground.
// Throws std::invalid_argument on dimension mismatch.
std::vector<double> ideal_layer_currents(std::span<const double> word_voltages_V,
                                         const Matrix& conductances_S);
std::vector<double> ideal_layer_currents_serial(std::span<const double> word_voltages_V,
                                                const Matrix& conductances_S);

// Full nodal analysis of the parasitic mesh: one lumped resistor between
// adjacent crossings along every word and bit line, the synapse conductance
// bridging the lines at each crossing, the driver pinning each word line's
// left end and virtual ground pinning each bit line's far end. A zero segment
// resistance delegates to the ideal model.
NodalSolution nodal_solve(const CrossbarLayer& layer,
                          std::span<const double> word_voltages_V);

// I_net = I_plus - I_minus, both halves evaluated with the ideal model.
std::vector<double> differential_layer_currents(std::span<const double> word_voltages_V,
                                                const DifferentialLayer& diff);

void check_valid(const CrossbarLayer& layer);
void check_valid(const DifferentialLayer& diff);

}  // namespace dwmtj
