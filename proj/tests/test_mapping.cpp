#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "dwmtj/mapping.hpp"

using namespace dwmtj;

namespace {

constexpr double kGap = 1e-5;
constexpr double kGp = 5e-5;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937& rng, double lo = -1.0,
                     double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (double& v : m.data) v = dist(rng);
    return m;
}

double max_abs(const Matrix& m) {
    double v = 0.0;
    for (double x : m.data) v = std::max(v, std::abs(x));
    return v;
}

NeuronDevice dipolar_neuron(double drift_mps) {
    NeuronDevice n;
    n.leak = DipolarField{drift_mps};
    return n;
}

}  // namespace

TEST_CASE("weight mapping endpoints") {
    Matrix zero(2, 3, 0.0);
    MappedWeights m = map_weights(zero, kGap, kGp);
    CHECK(m.mapping.scale_S_per_unit == 1.0);
    for (double g : m.g_plus.data) CHECK(g == kGap);
    for (double g : m.g_minus.data) CHECK(g == kGap);

    Matrix one(1, 1);
    one(0, 0) = 1.0;
    m = map_weights(one, kGap, kGp);
    CHECK(m.g_plus(0, 0) == doctest::Approx(kGp).epsilon(1e-12));
    CHECK(m.g_minus(0, 0) == kGap);

    Matrix bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(map_weights(bad, kGap, kGp), std::domain_error);
}

TEST_CASE("mapped conductances stay inside the device range") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix w = random_matrix(4, 5, rng, -7.0, 7.0);
        MappedWeights m = map_weights(w, kGap, kGp);
        for (double g : m.g_plus.data) {
            CHECK(g >= kGap);
            CHECK(g <= kGp * (1.0 + 1e-12));
        }
        for (double g : m.g_minus.data) {
            CHECK(g >= kGap);
            CHECK(g <= kGp * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("differential readout reproduces the scaled matrix-vector product") {
    std::mt19937 rng(17);
    const Matrix w = random_matrix(6, 4, rng);
    const MappedWeights m = map_weights(w, kGap, kGp);

    std::uniform_real_distribution<double> volt(0.0, 0.1);
    std::vector<double> v(6);
    for (double& x : v) x = volt(rng);

    const std::vector<double> plus = ideal_layer_currents(v, m.g_plus);
    const std::vector<double> minus = ideal_layer_currents(v, m.g_minus);
    for (std::size_t j = 0; j < 4; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 6; ++i) dot += w(i, j) * v[i];
        const double expected = m.mapping.scale_S_per_unit * dot;
        CHECK(plus[j] - minus[j] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("decode inverts map exactly") {
    std::mt19937 rng(29);
    const Matrix w = random_matrix(5, 5, rng);
    const MappedWeights m = map_weights(w, kGap, kGp);
    const Matrix back = decode_weights(m.g_plus, m.g_minus, m.mapping);
    const double scale = max_abs(w);
    for (std::size_t idx = 0; idx < w.data.size(); ++idx) {
        CHECK(std::abs(back.data[idx] - w.data[idx]) <= 1e-12 * scale);
    }

    const Matrix same = decode_weights(m.g_plus, m.g_plus, m.mapping);
    for (double v : same.data) CHECK(v == 0.0);
}

TEST_CASE("16-level quantization keeps elementwise error below max|W|/30") {
    std::mt19937 rng(41);
    const double a = 0.0, b = 1e-6;  // barrier window
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix w = random_matrix(4, 4, rng, -2.0, 2.0);
        MappedWeights m = map_weights(w, kGap, kGp);
        const auto quantize_g = [&](double g) {
            const double x = a + (g - kGap) / (kGp - kGap) * (b - a);
            const double xq = quantize_position(x, 16, a, b);
            return kGap + (xq - a) / (b - a) * (kGp - kGap);
        };
        for (double& g : m.g_plus.data) g = quantize_g(g);
        for (double& g : m.g_minus.data) g = quantize_g(g);
        const Matrix back = decode_weights(m.g_plus, m.g_minus, m.mapping);
        const double bound = max_abs(w) / 30.0;
        for (std::size_t idx = 0; idx < w.data.size(); ++idx) {
            CHECK(std::abs(back.data[idx] - w.data[idx]) <= bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("position quantization grid") {
    const double a = 2e-7, b = 8e-7;
    CHECK(quantize_position(a, 4, a, b) == a);
    CHECK(quantize_position(b, 4, a, b) == b);

    // n=2: grid {a, b}; just below the midpoint snaps down, the exact
    // midpoint rounds toward b.
    CHECK(quantize_position(5e-7 - 1e-9, 2, a, b) == a);
    CHECK(quantize_position(5e-7, 2, a, b) == b);

    std::mt19937 rng(53);
    std::uniform_real_distribution<double> pos(a, b);
    const std::size_t n = 9;
    const double half_step = (b - a) / (2.0 * (n - 1));
    for (int k = 0; k < 500; ++k) {
        const double x = pos(rng);
        const double xq = quantize_position(x, n, a, b);
        CHECK(std::abs(xq - x) <= half_step * (1.0 + 1e-12));
    }
}

TEST_CASE("normalized neuron integrates, leaks and fires like the closed form") {
    AbstractLifNeuron n;
    n.threshold = 0.8;
    n.leak_rate = 5e6;
    n.gain = 2e11;

    LifStepResult r = lif_oracle_step(n, 0.0, 1e-9);
    CHECK(r.neuron.membrane == 0.0);  // quiescent fixed point
    CHECK(!r.fired);

    // Constant drive: ramp rate r = gain*I - leak, fire at threshold / r.
    const double current = 1e-4;
    const double rate = n.gain * current - n.leak_rate;  // 1.5e7 per s
    const double expected = n.threshold / rate;
    AbstractLifNeuron state = n;
    double fire_time = -1.0;
    const double dt = 1e-9;
    for (int k = 0; k < 100000; ++k) {
        LifStepResult step = lif_oracle_step(state, current, dt);
        state = step.neuron;
        if (step.fired) {
            fire_time = (k + 1) * dt;
            break;
        }
    }
    REQUIRE(fire_time > 0.0);
    CHECK(std::abs(fire_time - expected) <= dt);
}

TEST_CASE("device parameters reduce to the normalized model exactly") {
    NeuronDevice device = dipolar_neuron(5.0);
    AbstractLifNeuron n = abstract_from_device(device);
    CHECK(n.threshold == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(n.leak_rate == doctest::Approx(5e6).epsilon(1e-12));
    CHECK(n.gain == doctest::Approx(5e-11 / (1e-7 * 5e-9 * 1e-6)).epsilon(1e-12));

    // Same constant current into both models: spike times agree within a step.
    const double current = 1e-4;
    const double dt = 1e-9;
    NeuronState dev_state;
    AbstractLifNeuron abs_state = n;
    double dev_fire = -1.0, abs_fire = -1.0;
    for (int k = 0; k < 100000 && (dev_fire < 0.0 || abs_fire < 0.0); ++k) {
        const double t = k * dt;
        if (dev_fire < 0.0) {
            NeuronStepResult r = step_neuron(dev_state, device, current, t, dt);
            dev_state = r.state;
            if (r.fired) dev_fire = r.fire_time_s;
        }
        if (abs_fire < 0.0) {
            LifStepResult r = lif_oracle_step(abs_state, current, dt);
            abs_state = r.neuron;
            if (r.fired) abs_fire = (k + 1) * dt;
        }
    }
    REQUIRE(dev_fire > 0.0);
    REQUIRE(abs_fire > 0.0);
    CHECK(std::abs(dev_fire - abs_fire) <= dt);

    // Unsupported reductions are rejected.
    NeuronDevice tapered = device;
    tapered.geometry.width_end_m = 2e-7;
    CHECK_THROWS_AS(abstract_from_device(tapered), std::invalid_argument);
    NeuronDevice graded = device;
    graded.leak = AnisotropyGradient{1e-11, 1e5, 5e11};
    CHECK_THROWS_AS(abstract_from_device(graded), std::invalid_argument);
    NeuronDevice refractory = device;
    refractory.refractory_s = 1e-8;
    CHECK_THROWS_AS(abstract_from_device(refractory), std::invalid_argument);
}

TEST_CASE("oracle verification on a quiet and a driven single-layer network") {
    SynapseDevice synapse;
    synapse.dw_position_m = 1e-6;  // g_P
    Network net;
    net.input_width = 1;
    NetworkLayer layer;
    layer.synapses = make_layer(1, 1, synapse);
    layer.neurons.assign(1, dipolar_neuron(5.0));
    net.layers.push_back(layer);

    RunConfig config;
    config.dt_s = 1e-9;
    config.t_end_s = 1e-6;

    const std::vector<double> off{0.0};
    OracleReport quiet = verify_against_oracle(net, dc_encode(off, 2.0), config);
    CHECK(quiet.spike_count_match);
    CHECK(quiet.device_spikes == 0);
    CHECK(quiet.oracle_spikes == 0);
    CHECK(quiet.max_deviation_s == 0.0);

    // Drive chosen so the threshold crossing lands well inside a step; a
    // crossing at an exact step boundary can round to different steps in the
    // two models.
    const std::vector<double> on{1.0};
    OracleReport driven = verify_against_oracle(net, dc_encode(on, 1.9), config);
    CHECK(driven.spike_count_match);
    CHECK(driven.device_spikes >= 5);
    CHECK(driven.max_deviation_s <= config.dt_s);

    const std::string text = driven.to_string();
    CHECK(text.find("max_deviation_s=") != std::string::npos);
    CHECK(text.find("spike_count_match=true") != std::string::npos);

    // Tapered devices have no exact normalized equivalent.
    Network unsupported = net;
    unsupported.layers[0].neurons[0].geometry.width_end_m = 2e-7;
    unsupported.layers[0].neurons[0].leak = ShapeTaper{1e-6};
    CHECK_THROWS_AS(verify_against_oracle(unsupported, dc_encode(on, 2.0), config),
                    std::invalid_argument);
}

TEST_CASE("differential argmax equals the argmax of the weighted sum") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix w = random_matrix(5, 7, rng, -3.0, 3.0);
        const MappedWeights m = map_weights(w, kGap, kGp);
        std::vector<double> u(5);
        for (double& x : u) x = unit(rng);

        const std::vector<double> plus = ideal_layer_currents(u, m.g_plus);
        const std::vector<double> minus = ideal_layer_currents(u, m.g_minus);
        std::size_t arg_net = 0;
        double best_net = -std::numeric_limits<double>::infinity();
        std::size_t arg_dot = 0;
        double best_dot = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < 7; ++j) {
            const double net = plus[j] - minus[j];
            double dot = 0.0;
            for (std::size_t i = 0; i < 5; ++i) dot += w(i, j) * u[i];
            if (net > best_net) {
                best_net = net;
                arg_net = j;
            }
            if (dot > best_dot) {
                best_dot = dot;
                arg_dot = j;
            }
        }
        CHECK(arg_net == arg_dot);
    }
}
