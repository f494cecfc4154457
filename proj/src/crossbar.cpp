#include "dwmtj/crossbar.hpp"

#include <cstdint>
#include <stdexcept>

namespace dwmtj {

CrossbarLayer make_layer(std::size_t rows, std::size_t cols, const SynapseDevice& prototype,
                         double wire_resistance_per_segment_ohm) {
    CrossbarLayer layer;
    layer.rows_n = rows;
    layer.cols_m = cols;
    layer.synapses.assign(rows * cols, prototype);
    layer.wire_resistance_per_segment_ohm = wire_resistance_per_segment_ohm;
    return layer;
}

Matrix conductance_matrix(const CrossbarLayer& layer) {
    Matrix g(layer.rows_n, layer.cols_m);
    for (std::size_t i = 0; i < layer.rows_n; ++i) {
        for (std::size_t j = 0; j < layer.cols_m; ++j) {
            g(i, j) = synapse_conductance(layer.at(i, j));
        }
    }
    return g;
}

namespace {

template <bool Parallel>
std::vector<double> ideal_currents_impl(std::span<const double> v, const Matrix& g) {
    if (v.size() != g.rows) {
        throw std::invalid_argument("ideal_layer_currents: voltage count != word lines");
    }
    std::vector<double> currents(g.cols, 0.0);
    // Each bit line sums its own column in fixed row order, so the parallel
    // split over columns is bit-identical to the serial loop.
    const auto column_sum = [&](std::size_t j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < g.rows; ++i) {
            sum += v[i] * g(i, j);
        }
        currents[j] = sum;
    };
    if (Parallel && g.rows * g.cols > 4096) {
#pragma omp parallel for schedule(static)
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(g.cols); ++j) {
            column_sum(static_cast<std::size_t>(j));
        }
    } else {
        for (std::size_t j = 0; j < g.cols; ++j) {
            column_sum(j);
        }
    }
    return currents;
}

}  // namespace

std::vector<double> ideal_layer_currents(std::span<const double> word_voltages_V,
                                         const Matrix& conductances_S) {
    return ideal_currents_impl<true>(word_voltages_V, conductances_S);
}

std::vector<double> ideal_layer_currents_serial(std::span<const double> word_voltages_V,
                                                const Matrix& conductances_S) {
    return ideal_currents_impl<false>(word_voltages_V, conductances_S);
}

NodalSolution nodal_solve(const CrossbarLayer& layer,
                          std::span<const double> word_voltages_V) {
    check_valid(layer);
    const std::size_t n = layer.rows_n;
    const std::size_t m = layer.cols_m;
    if (word_voltages_V.size() != n) {
        throw std::invalid_argument("nodal_solve: voltage count != word lines");
    }
    const double r_seg = layer.wire_resistance_per_segment_ohm;
    const Matrix g = conductance_matrix(layer);

    if (r_seg == 0.0) {
        NodalSolution sol;
        sol.bit_currents_A = ideal_layer_currents(word_voltages_V, g);
        // Ideal wires: word nodes sit at the driver voltage, bit nodes at ground.
        sol.node_voltages.assign(2 * n * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                sol.node_voltages[i * m + j] = word_voltages_V[i];
            }
        }
        return sol;
    }

    // One lumped resistor per segment between adjacent crossings. The driver
    // pins each word line's leftmost crossing at its drive voltage; virtual
    // ground pins each bit line's bottom crossing at zero. Node layout:
    // word nodes (n*m) then bit nodes (n*m), row-major.
    const double g_seg = 1.0 / r_seg;
    const auto wnode = [m](std::size_t i, std::size_t j) { return i * m + j; };
    const auto bnode = [n, m](std::size_t i, std::size_t j) { return n * m + i * m + j; };
    constexpr std::size_t kPinned = static_cast<std::size_t>(-1);

    std::vector<std::size_t> index(2 * n * m, kPinned);
    std::vector<double> pinned(2 * n * m, 0.0);
    std::size_t unknowns = 0;
    for (std::size_t i = 0; i < n; ++i) {
        pinned[wnode(i, 0)] = word_voltages_V[i];
        for (std::size_t j = 1; j < m; ++j) {
            index[wnode(i, j)] = unknowns++;
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            index[bnode(i, j)] = unknowns++;
        }
    }

    Matrix a(unknowns, unknowns);
    std::vector<double> rhs(unknowns, 0.0);
    const auto stamp = [&](std::size_t p, std::size_t q, double cond) {
        const std::size_t up = index[p];
        const std::size_t uq = index[q];
        if (up != kPinned) {
            a(up, up) += cond;
            if (uq != kPinned) a(up, uq) -= cond;
            else rhs[up] += cond * pinned[q];
        }
        if (uq != kPinned) {
            a(uq, uq) += cond;
            if (up != kPinned) a(uq, up) -= cond;
            else rhs[uq] += cond * pinned[p];
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < m; ++j) {
            stamp(wnode(i, j), wnode(i, j + 1), g_seg);
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            stamp(bnode(i, j), bnode(i + 1, j), g_seg);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            stamp(wnode(i, j), bnode(i, j), g(i, j));
        }
    }

    NodalSolution sol;
    sol.node_voltages = pinned;
    if (unknowns > 0) {
        const std::vector<double> x = lu_solve(std::move(a), std::move(rhs));
        for (std::size_t node = 0; node < index.size(); ++node) {
            if (index[node] != kPinned) {
                sol.node_voltages[node] = x[index[node]];
            }
        }
    }
    sol.bit_currents_A.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += g(i, j) *
                   (sol.node_voltages[wnode(i, j)] - sol.node_voltages[bnode(i, j)]);
        }
        sol.bit_currents_A[j] = sum;
    }
    return sol;
}

std::vector<double> differential_layer_currents(std::span<const double> word_voltages_V,
                                                const DifferentialLayer& diff) {
    check_valid(diff);
    const Matrix g_plus = conductance_matrix(diff.plus);
    const Matrix g_minus = conductance_matrix(diff.minus);
    std::vector<double> plus = ideal_layer_currents(word_voltages_V, g_plus);
    const std::vector<double> minus = ideal_layer_currents(word_voltages_V, g_minus);
    for (std::size_t j = 0; j < plus.size(); ++j) {
        plus[j] -= minus[j];
    }
    return plus;
}

void check_valid(const CrossbarLayer& layer) {
    if (layer.rows_n < 1 || layer.cols_m < 1) {
        throw std::invalid_argument("crossbar: requires rows_n >= 1 and cols_m >= 1");
    }
    if (layer.synapses.size() != layer.rows_n * layer.cols_m) {
        throw std::invalid_argument("crossbar: synapse matrix does not match rows_n x cols_m");
    }
    if (layer.wire_resistance_per_segment_ohm < 0.0) {
        throw std::invalid_argument("crossbar: wire_resistance_per_segment_ohm must be >= 0");
    }
    for (const SynapseDevice& s : layer.synapses) {
        check_valid(s);
    }
}

void check_valid(const DifferentialLayer& diff) {
    check_valid(diff.plus);
    check_valid(diff.minus);
    if (diff.plus.rows_n != diff.minus.rows_n || diff.plus.cols_m != diff.minus.cols_m) {
        throw std::invalid_argument("differential layer: halves must have equal dimensions");
    }
}

}  // namespace dwmtj
