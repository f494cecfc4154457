#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dwmtj/crossbar.hpp"

using namespace dwmtj;

namespace {

// Position that realizes conductance fraction f over the default barrier
// window [0, 1 um].
SynapseDevice synapse_at_fraction(double f) {
    SynapseDevice s;
    s.dw_position_m = f * 1e-6;
    return s;
}

CrossbarLayer random_layer(std::size_t n, std::size_t m, double r_seg, std::mt19937& rng) {
    std::uniform_real_distribution<double> pos(0.0, 1e-6);
    CrossbarLayer layer = make_layer(n, m, SynapseDevice{}, r_seg);
    for (SynapseDevice& s : layer.synapses) {
        s.dw_position_m = pos(rng);
    }
    return layer;
}

std::vector<double> random_voltages(std::size_t n, std::mt19937& rng, double lo = 0.0,
                                    double hi = 0.1) {
    std::uniform_real_distribution<double> volt(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = volt(rng);
    return v;
}

}  // namespace

TEST_CASE("conductance matrix applies the synapse law elementwise") {
    CrossbarLayer low = make_layer(3, 4, synapse_at_fraction(0.0));
    Matrix g = conductance_matrix(low);
    for (double v : g.data) CHECK(v == doctest::Approx(1e-5).epsilon(1e-12));

    CrossbarLayer high = make_layer(3, 4, synapse_at_fraction(1.0));
    g = conductance_matrix(high);
    for (double v : g.data) CHECK(v == doctest::Approx(5e-5).epsilon(1e-12));

    CrossbarLayer mixed = make_layer(2, 2, synapse_at_fraction(0.0));
    mixed.at(0, 1) = synapse_at_fraction(0.25);
    mixed.at(1, 0) = synapse_at_fraction(0.5);
    mixed.at(1, 1) = synapse_at_fraction(1.0);
    g = conductance_matrix(mixed);
    CHECK(g(0, 0) == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(g(0, 1) == doctest::Approx(2e-5).epsilon(1e-12));
    CHECK(g(1, 0) == doctest::Approx(3e-5).epsilon(1e-12));
    CHECK(g(1, 1) == doctest::Approx(5e-5).epsilon(1e-12));
}

TEST_CASE("ideal readout is the virtual-ground dot product") {
    Matrix diag(2, 2);
    diag(0, 0) = 3e-5;
    diag(1, 1) = 3e-5;
    const std::vector<double> ones{1.0, 1.0};
    std::vector<double> i = ideal_layer_currents(ones, diag);
    CHECK(i[0] == doctest::Approx(3e-5).epsilon(1e-12));
    CHECK(i[1] == doctest::Approx(3e-5).epsilon(1e-12));

    Matrix g(2, 2);
    g(0, 0) = 1e-4;
    g(0, 1) = 2e-4;
    g(1, 0) = 3e-4;
    g(1, 1) = 4e-4;
    const std::vector<double> v{0.1, 0.2};
    i = ideal_layer_currents(v, g);
    CHECK(i[0] == doctest::Approx(7e-5).epsilon(1e-12));
    CHECK(i[1] == doctest::Approx(1e-4).epsilon(1e-12));

    const std::vector<double> zeros{0.0, 0.0};
    i = ideal_layer_currents(zeros, g);
    CHECK(i[0] == 0.0);
    CHECK(i[1] == 0.0);

    const std::vector<double> wrong{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(ideal_layer_currents(wrong, g), std::invalid_argument);
}

TEST_CASE("ideal readout is linear: superposition and scaling") {
    std::mt19937 rng(11);
    const CrossbarLayer layer = random_layer(8, 8, 0.0, rng);
    const Matrix g = conductance_matrix(layer);
    const std::vector<double> v1 = random_voltages(8, rng);
    const std::vector<double> v2 = random_voltages(8, rng);

    std::vector<double> sum(8);
    for (std::size_t i = 0; i < 8; ++i) sum[i] = v1[i] + v2[i];
    const std::vector<double> i_sum = ideal_layer_currents(sum, g);
    const std::vector<double> i1 = ideal_layer_currents(v1, g);
    const std::vector<double> i2 = ideal_layer_currents(v2, g);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(i_sum[j] == doctest::Approx(i1[j] + i2[j]).epsilon(1e-12));
    }

    std::vector<double> scaled(8);
    for (std::size_t i = 0; i < 8; ++i) scaled[i] = 3.5 * v1[i];
    const std::vector<double> i_scaled = ideal_layer_currents(scaled, g);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(i_scaled[j] == doctest::Approx(3.5 * i1[j]).epsilon(1e-12));
    }
}

TEST_CASE("zero wire resistance delegates the nodal solve to the ideal model") {
    std::mt19937 rng(5);
    const CrossbarLayer layer = random_layer(6, 5, 0.0, rng);
    const std::vector<double> v = random_voltages(6, rng);
    const std::vector<double> ideal = ideal_layer_currents(v, conductance_matrix(layer));
    const NodalSolution sol = nodal_solve(layer, v);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(sol.bit_currents_A[j] == doctest::Approx(ideal[j]).epsilon(1e-12));
    }
}

TEST_CASE("2x2 mesh matches hand-solved Kirchhoff equations") {
    // Mesh under test: w(i,0) pinned at V_i, b(1,j) pinned at 0, one segment
    // resistor between adjacent crossings, synapse G_ij bridging w(i,j) and
    // b(i,j). The four unknown node equations solve in closed form:
    //   w11: gw (V1 - w11) = G11 w11
    //   b00: G00 (V0 - b00) = gw b00
    //   w01: gw (V0 - w01) = G01 (w01 - b01),  b01: G01 (w01 - b01) = gw b01
    const double r = 1.0;
    const double gw = 1.0 / r;
    const double g00 = 1e-5, g01 = 2e-5, g10 = 3.5e-5, g11 = 5e-5;
    const double v0 = 0.1, v1 = 0.2;

    const double w11 = gw * v1 / (gw + g11);
    const double b00 = g00 * v0 / (g00 + gw);
    const double w01 = v0 * (g01 + gw) / (gw + 2.0 * g01);
    const double b01 = g01 * w01 / (g01 + gw);
    const double i0_expected = gw * b00 + g10 * v1;  // into ground at b(1,0)
    const double i1_expected = gw * b01 + g11 * w11;

    CrossbarLayer layer = make_layer(2, 2, SynapseDevice{}, r);
    layer.at(0, 0) = synapse_at_fraction(0.0);
    layer.at(0, 1) = synapse_at_fraction(0.25);
    layer.at(1, 0) = synapse_at_fraction(0.625);
    layer.at(1, 1) = synapse_at_fraction(1.0);
    const std::vector<double> v{v0, v1};
    const NodalSolution sol = nodal_solve(layer, v);

    CHECK(sol.bit_currents_A[0] == doctest::Approx(i0_expected).epsilon(1e-9));
    CHECK(sol.bit_currents_A[1] == doctest::Approx(i1_expected).epsilon(1e-9));

    // Node voltages come back in grid order, pinned nodes included.
    CHECK(sol.node_voltages[0] == v0);        // w(0,0)
    CHECK(sol.node_voltages[2] == v1);        // w(1,0)
    CHECK(sol.node_voltages[4 + 2] == 0.0);   // b(1,0)
    CHECK(sol.node_voltages[1] == doctest::Approx(w01).epsilon(1e-9));
    CHECK(sol.node_voltages[4] == doctest::Approx(b00).epsilon(1e-9));
}

TEST_CASE("deviation from the ideal model grows monotonically with wire resistance") {
    const double g_p = 5e-5;
    std::vector<double> deviations;
    for (double rfrac : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2}) {
        std::mt19937 rng(2024);  // same instances at every resistance
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            CrossbarLayer layer = random_layer(8, 8, rfrac / g_p, rng);
            const std::vector<double> v = random_voltages(8, rng, 0.02, 0.1);
            const std::vector<double> ideal =
                ideal_layer_currents(v, conductance_matrix(layer));
            const std::vector<double> nodal = nodal_solve(layer, v).bit_currents_A;
            for (std::size_t j = 0; j < 8; ++j) {
                worst = std::max(worst, std::abs(nodal[j] - ideal[j]) / std::abs(ideal[j]));
            }
        }
        deviations.push_back(worst);
    }
    for (std::size_t k = 1; k < deviations.size(); ++k) {
        CHECK(deviations[k] > deviations[k - 1]);
    }
}

TEST_CASE("parasitics only lose signal for nonnegative drive") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const CrossbarLayer layer = random_layer(8, 8, 5.0, rng);
        const std::vector<double> v = random_voltages(8, rng);
        const std::vector<double> ideal = ideal_layer_currents(v, conductance_matrix(layer));
        const std::vector<double> nodal = nodal_solve(layer, v).bit_currents_A;
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(nodal[j] <= ideal[j] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("differential readout is the elementwise difference of the halves") {
    std::mt19937 rng(77);
    DifferentialLayer same;
    same.plus = random_layer(3, 3, 0.0, rng);
    same.minus = same.plus;
    const std::vector<double> v = random_voltages(3, rng);
    std::vector<double> net = differential_layer_currents(v, same);
    for (double x : net) CHECK(x == 0.0);

    DifferentialLayer diff;
    diff.plus = random_layer(3, 3, 0.0, rng);
    diff.minus = random_layer(3, 3, 0.0, rng);
    net = differential_layer_currents(v, diff);
    const std::vector<double> plus =
        ideal_layer_currents(v, conductance_matrix(diff.plus));
    const std::vector<double> minus =
        ideal_layer_currents(v, conductance_matrix(diff.minus));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(net[j] == doctest::Approx(plus[j] - minus[j]).epsilon(1e-12));
    }

    // Minus half pinned at g_AP: net = I_plus - V_total * g_AP.
    DifferentialLayer floor_ref;
    floor_ref.plus = random_layer(3, 3, 0.0, rng);
    floor_ref.minus = make_layer(3, 3, synapse_at_fraction(0.0));
    net = differential_layer_currents(v, floor_ref);
    double v_total = 0.0;
    for (double x : v) v_total += x;
    const std::vector<double> plus2 =
        ideal_layer_currents(v, conductance_matrix(floor_ref.plus));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(net[j] == doctest::Approx(plus2[j] - v_total * 1e-5).epsilon(1e-10));
    }
}

TEST_CASE("layer validation rejects inconsistent shapes") {
    CrossbarLayer layer = make_layer(2, 3, SynapseDevice{});
    CHECK_NOTHROW(check_valid(layer));
    layer.synapses.pop_back();
    CHECK_THROWS_AS(check_valid(layer), std::invalid_argument);

    DifferentialLayer diff;
    diff.plus = make_layer(2, 3, SynapseDevice{});
    diff.minus = make_layer(2, 2, SynapseDevice{});
    CHECK_THROWS_AS(check_valid(diff), std::invalid_argument);
}
