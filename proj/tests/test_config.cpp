#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dwmtj/config.hpp"
#include "dwmtj/csv.hpp"

using namespace dwmtj;
using nlohmann::json;

namespace {

bool any_error_mentions(const ParseResult& r, const std::string& needle) {
    return std::any_of(r.errors.begin(), r.errors.end(), [&](const std::string& e) {
        return e.find(needle) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("empty config parses with documented defaults") {
    ParseResult r = parse_config_json(json::object());
    REQUIRE(r.ok());
    const ExperimentConfig& c = *r.config;
    CHECK(c.device.geometry.length_m == 1e-6);
    CHECK(c.device.fire_position_m == 0.8e-6);
    CHECK(std::holds_alternative<DipolarField>(c.device.leak));
    CHECK(c.dt_s == 1e-9);
    CHECK(c.t_end_s == 1e-6);
    CHECK(c.drive.kind == DriveKind::DcCurrent);
    CHECK(!c.network.has_value());
}

TEST_CASE("validation names the offending key path") {
    json j = json::parse(R"({"simulation": {"dt_s": 0}})");
    ParseResult r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "simulation.dt_s"));
}

TEST_CASE("unknown keys are rejected by name") {
    json j = json::parse(R"({"foo": 1})");
    ParseResult r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "foo"));

    j = json::parse(R"({"device": {"geometry": {"lenght_m": 1e-6}}})");
    r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "device.geometry.lenght_m"));
}

TEST_CASE("all validation errors are reported, not just the first") {
    json j = json::parse(R"({
        "foo": 1,
        "simulation": {"dt_s": 0, "t_end_s": -1},
        "device": {"geometry": {"length_m": -2e-6}}
    })");
    ParseResult r = parse_config_json(j);
    CHECK(r.errors.size() >= 4);
    CHECK(any_error_mentions(r, "foo"));
    CHECK(any_error_mentions(r, "simulation.dt_s"));
    CHECK(any_error_mentions(r, "simulation.t_end_s"));
    CHECK(any_error_mentions(r, "device.geometry.length_m"));
}

TEST_CASE("drive values outside the unit interval are rejected with indices") {
    json j = json::parse(R"({"drive": {"kind": "dc", "values": [0.2, 1.5], "v_max": 0.1}})");
    ParseResult r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "drive.values[1]"));
}

TEST_CASE("config round-trips through dump and reparse") {
    json j = json::parse(R"({
        "device": {"leak": {"kind": "shape_taper", "mobility_ms": 2e-6},
                    "geometry": {"width_start_m": 5e-8, "width_end_m": 1.5e-7}},
        "network": {
            "input_width": 2,
            "sense_resistance_ohm": 2e4,
            "layers": [
                {"rows": 2, "cols": 3, "weights": [[0.5, -0.25, 1.0], [0.0, 0.75, -1.0]]},
                {"rows": 3, "cols": 1, "position_fraction": 0.5}
            ]
        },
        "drive": {"kind": "rate", "values": [0.3, 0.9], "f_max_hz": 2e7,
                   "pulse_width_s": 5e-9, "v_pulse": 0.2, "seed": 7},
        "inhibition": {"kind": "partial", "displacement_m": 1e-7},
        "simulation": {"dt_s": 5e-10, "t_end_s": 2e-6, "sample_stride": 4},
        "output": {"trace_csv": "t.csv"}
    })");
    ParseResult first = parse_config_json(j);
    REQUIRE(first.ok());
    const json dumped = first.config->to_json();
    ParseResult second = parse_config_json(dumped);
    REQUIRE(second.ok());
    CHECK(second.config->to_json().dump() == dumped.dump());
}

TEST_CASE("network chain mismatches are named") {
    json j = json::parse(R"({
        "network": {
            "input_width": 2,
            "layers": [
                {"rows": 2, "cols": 3, "position_fraction": 1.0},
                {"rows": 4, "cols": 1, "position_fraction": 0.5}
            ]
        },
        "drive": {"kind": "dc", "values": [1.0, 1.0], "v_max": 0.1}
    })");
    ParseResult r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "network.layers[1].rows"));
}

TEST_CASE("layers need exactly one synapse content form") {
    json j = json::parse(R"({
        "network": {"input_width": 1,
                     "layers": [{"rows": 1, "cols": 1}]},
        "drive": {"kind": "dc", "values": [1.0], "v_max": 0.1}
    })");
    ParseResult r = parse_config_json(j);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "network.layers[0]"));

    j["network"]["layers"][0]["position_fraction"] = 0.5;
    j["network"]["layers"][0]["weights"] = json::array({json::array({1.0})});
    r = parse_config_json(j);
    CHECK(!r.ok());
}

TEST_CASE("weight layers materialize as differential pairs with the mapped readout") {
    json j = json::parse(R"({
        "network": {
            "input_width": 2,
            "layers": [{"rows": 2, "cols": 2,
                         "weights": [[1.0, -0.5], [0.25, 0.75]]}]
        },
        "drive": {"kind": "dc", "values": [1.0, 0.5], "v_max": 0.1}
    })");
    ParseResult r = parse_config_json(j);
    REQUIRE(r.ok());
    Network net = build_network(*r.config);
    REQUIRE(net.layers.size() == 1);
    const auto* diff = std::get_if<DifferentialLayer>(&net.layers[0].synapses);
    REQUIRE(diff != nullptr);

    const std::vector<double> v{0.1, 0.05};
    const std::vector<double> currents = differential_layer_currents(v, *diff);
    const double s = (5e-5 - 1e-5) / 1.0;  // scale for max|W| = 1
    const double expected0 = s * (1.0 * 0.1 + 0.25 * 0.05);
    const double expected1 = s * (-0.5 * 0.1 + 0.75 * 0.05);
    CHECK(currents[0] == doctest::Approx(expected0).epsilon(1e-9));
    CHECK(currents[1] == doctest::Approx(expected1).epsilon(1e-9));
}

TEST_CASE("weights load from a CSV next to the config") {
    const std::string dir = "/tmp/dwmtj_cfg_test";
    std::remove((dir + "/w.csv").c_str());
    std::filesystem::create_directories(dir);
    {
        Matrix w(2, 2);
        w(0, 0) = 1.0;
        w(0, 1) = -1.0;
        w(1, 0) = 0.5;
        w(1, 1) = 0.0;
        write_matrix_csv(w, dir + "/w.csv");
    }
    json j = json::parse(R"({
        "network": {"input_width": 2,
                     "layers": [{"rows": 2, "cols": 2, "weights_csv": "w.csv"}]},
        "drive": {"kind": "dc", "values": [1.0, 1.0], "v_max": 0.1}
    })");
    ParseResult r = parse_config_json(j);
    REQUIRE(r.ok());
    Network net = build_network(*r.config, dir);
    const auto* diff = std::get_if<DifferentialLayer>(&net.layers[0].synapses);
    REQUIRE(diff != nullptr);
    CHECK(synapse_conductance(diff->plus.at(0, 0)) == doctest::Approx(5e-5).epsilon(1e-9));
    CHECK(synapse_conductance(diff->minus.at(0, 1)) == doctest::Approx(5e-5).epsilon(1e-9));
    CHECK(synapse_conductance(diff->plus.at(1, 1)) == doctest::Approx(1e-5).epsilon(1e-9));
}

TEST_CASE("trace files carry a header even when empty") {
    SimTrace trace;
    trace.neurons_per_layer = {2};
    const std::string path = "/tmp/dwmtj_trace_empty.csv";
    write_trace_csv(trace, path);
    std::ifstream file(path);
    std::string line;
    int lines = 0;
    while (std::getline(file, line)) ++lines;
    CHECK(lines == 1);

    trace.time_s = {0.0, 1e-9, 2e-9};
    trace.positions_m.assign(6, 1e-7);
    trace.mtj_states.assign(6, 0);
    trace.bit_currents_A.assign(6, 2e-6);
    write_trace_csv(trace, path);
    std::ifstream file2(path);
    lines = 0;
    std::string header;
    while (std::getline(file2, line)) {
        if (lines == 0) header = line;
        ++lines;
    }
    CHECK(lines == 4);
    CHECK(header == "time_s,pos_0_0,pos_0_1,mtj_0_0,mtj_0_1,i_bit_0_0,i_bit_0_1");
}

TEST_CASE("matrices round-trip through CSV") {
    Matrix m(2, 3);
    for (std::size_t idx = 0; idx < m.data.size(); ++idx) {
        m.data[idx] = 0.1 * static_cast<double>(idx + 1) * 1e-5;
    }
    const std::string path = "/tmp/dwmtj_matrix.csv";
    write_matrix_csv(m, path);
    const Matrix back = read_matrix_csv(path);
    REQUIRE(back.rows == 2);
    REQUIRE(back.cols == 3);
    for (std::size_t idx = 0; idx < m.data.size(); ++idx) {
        CHECK(back.data[idx] == m.data[idx]);
    }

    std::ofstream(path) << "1,2\n3\n";
    CHECK_THROWS_AS(read_matrix_csv(path), std::invalid_argument);
    std::ofstream(path) << "1,abc\n";
    CHECK_THROWS_AS(read_matrix_csv(path), std::invalid_argument);
}

TEST_CASE("conductance matrices import as crossbar layers") {
    const std::string dir = "/tmp/dwmtj_cfg_test";
    std::filesystem::create_directories(dir);
    {
        Matrix g(2, 2);
        g(0, 0) = 1e-5;
        g(0, 1) = 2e-5;
        g(1, 0) = 3e-5;
        g(1, 1) = 5e-5;
        write_matrix_csv(g, dir + "/g.csv");
    }
    json j = json::parse(R"({
        "network": {"input_width": 2,
                     "layers": [{"rows": 2, "cols": 2, "conductance_csv": "g.csv"}]},
        "drive": {"kind": "dc", "values": [1.0, 1.0], "v_max": 0.1}
    })");
    ParseResult r = parse_config_json(j);
    REQUIRE(r.ok());
    Network net = build_network(*r.config, dir);
    const auto* layer = std::get_if<CrossbarLayer>(&net.layers[0].synapses);
    REQUIRE(layer != nullptr);
    CHECK(synapse_conductance(layer->at(0, 0)) == doctest::Approx(1e-5).epsilon(1e-9));
    CHECK(synapse_conductance(layer->at(0, 1)) == doctest::Approx(2e-5).epsilon(1e-9));
    CHECK(synapse_conductance(layer->at(1, 0)) == doctest::Approx(3e-5).epsilon(1e-9));
    CHECK(synapse_conductance(layer->at(1, 1)) == doctest::Approx(5e-5).epsilon(1e-9));

    // Out-of-range conductances cannot be realized by any wall position.
    {
        Matrix g(2, 2, 9e-5);
        write_matrix_csv(g, dir + "/g.csv");
    }
    CHECK_THROWS_AS(build_network(*r.config, dir), std::domain_error);
}

TEST_CASE("missing files and malformed JSON are reported") {
    ParseResult r = parse_config_file("/nonexistent/nope.json");
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "cannot open"));

    const std::string path = "/tmp/dwmtj_bad.json";
    std::ofstream(path) << "{ not json";
    r = parse_config_file(path);
    CHECK(!r.ok());
    CHECK(any_error_mentions(r, "parse error"));
}
