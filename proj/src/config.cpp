#include "dwmtj/config.hpp"

#include <algorithm>

#include <cmath>
#include <fstream>
#include <limits>

#include "dwmtj/csv.hpp"
#include "dwmtj/mapping.hpp"

namespace dwmtj {

namespace {

using nlohmann::json;

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

class Parser {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) {
        errors.push_back(path + ": " + msg);
    }

    // Strict-schema rule: every key must be recognized.
    void check_keys(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const char* a : allowed) {
                if (it.key() == a) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                fail(join_path(path, it.key()), "unknown key");
            }
        }
    }

    const json* object(const json& obj, const std::string& path, const char* key) {
        if (!obj.contains(key)) return nullptr;
        if (!obj[key].is_object()) {
            fail(join_path(path, key), "must be an object");
            return nullptr;
        }
        return &obj[key];
    }

    double number(const json& obj, const std::string& path, const char* key, double def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_number()) {
            fail(join_path(path, key), "must be a number");
            return def;
        }
        return obj[key].get<double>();
    }

    std::size_t count(const json& obj, const std::string& path, const char* key,
                      std::size_t def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_number_unsigned()) {
            fail(join_path(path, key), "must be a non-negative integer");
            return def;
        }
        return obj[key].get<std::size_t>();
    }

    std::string text(const json& obj, const std::string& path, const char* key,
                     const std::string& def) {
        if (!obj.contains(key)) return def;
        if (!obj[key].is_string()) {
            fail(join_path(path, key), "must be a string");
            return def;
        }
        return obj[key].get<std::string>();
    }

    std::vector<double> number_list(const json& obj, const std::string& path,
                                    const char* key) {
        std::vector<double> out;
        if (!obj.contains(key)) return out;
        if (!obj[key].is_array()) {
            fail(join_path(path, key), "must be an array of numbers");
            return out;
        }
        for (const json& v : obj[key]) {
            if (!v.is_number()) {
                fail(join_path(path, key), "must be an array of numbers");
                return {};
            }
            out.push_back(v.get<double>());
        }
        return out;
    }

    std::optional<Matrix> matrix(const json& obj, const std::string& path, const char* key) {
        if (!obj.contains(key)) return std::nullopt;
        const json& rows = obj[key];
        if (!rows.is_array() || rows.empty()) {
            fail(join_path(path, key), "must be a non-empty 2D array");
            return std::nullopt;
        }
        std::size_t cols = 0;
        std::vector<double> data;
        for (const json& row : rows) {
            if (!row.is_array() || row.empty()) {
                fail(join_path(path, key), "must be a non-empty 2D array");
                return std::nullopt;
            }
            if (cols == 0) cols = row.size();
            if (row.size() != cols) {
                fail(join_path(path, key), "rows must all have the same length");
                return std::nullopt;
            }
            for (const json& v : row) {
                if (!v.is_number()) {
                    fail(join_path(path, key), "entries must be numbers");
                    return std::nullopt;
                }
                data.push_back(v.get<double>());
            }
        }
        Matrix m(rows.size(), cols);
        m.data = std::move(data);
        return m;
    }

    TrackGeometry geometry(const json& obj, const std::string& path,
                           const TrackGeometry& def) {
        TrackGeometry g = def;
        check_keys(obj, path, {"length_m", "width_start_m", "width_end_m", "thickness_m"});
        g.length_m = number(obj, path, "length_m", def.length_m);
        g.width_start_m = number(obj, path, "width_start_m", def.width_start_m);
        g.width_end_m = number(obj, path, "width_end_m", def.width_end_m);
        g.thickness_m = number(obj, path, "thickness_m", def.thickness_m);
        return g;
    }

    MtjStack mtj(const json& obj, const std::string& path, const MtjStack& def) {
        MtjStack m = def;
        check_keys(obj, path,
                   {"g_parallel_S", "g_antiparallel_S", "window_start_m", "window_end_m"});
        m.g_parallel_S = number(obj, path, "g_parallel_S", def.g_parallel_S);
        m.g_antiparallel_S = number(obj, path, "g_antiparallel_S", def.g_antiparallel_S);
        m.window_start_m = number(obj, path, "window_start_m", def.window_start_m);
        m.window_end_m = number(obj, path, "window_end_m", def.window_end_m);
        return m;
    }

    LeakMechanism leak(const json& obj, const std::string& path, const LeakMechanism& def) {
        const std::string kind = text(obj, path, "kind", "");
        if (kind.empty()) {
            fail(join_path(path, "kind"), "required (none | dipolar_field | anisotropy_gradient | shape_taper)");
            return def;
        }
        if (kind == "none") {
            check_keys(obj, path, {"kind"});
            return NoLeak{};
        }
        if (kind == "dipolar_field") {
            check_keys(obj, path, {"kind", "drift_speed_mps"});
            DipolarField d;
            d.drift_speed_mps = number(obj, path, "drift_speed_mps", 5.0);
            return d;
        }
        if (kind == "anisotropy_gradient") {
            check_keys(obj, path, {"kind", "mobility_mk", "k0_jm3", "k_slope_jm4"});
            AnisotropyGradient a;
            a.mobility_mk = number(obj, path, "mobility_mk", 1e-11);
            a.k0_jm3 = number(obj, path, "k0_jm3", 1e5);
            a.k_slope_jm4 = number(obj, path, "k_slope_jm4", 5e11);
            return a;
        }
        if (kind == "shape_taper") {
            check_keys(obj, path, {"kind", "mobility_ms"});
            ShapeTaper s;
            s.mobility_ms = number(obj, path, "mobility_ms", 1e-6);
            return s;
        }
        fail(join_path(path, "kind"), "unknown leak kind: " + kind);
        return def;
    }

    NeuronDevice device(const json& obj, const std::string& path, const NeuronDevice& def) {
        NeuronDevice n = def;
        check_keys(obj, path,
                   {"geometry", "leak", "material", "output_mtj", "fire_position_m",
                    "reset_position_m", "hysteresis_m", "refractory_s", "supply_voltage_V"});
        if (const json* g = object(obj, path, "geometry")) {
            n.geometry = geometry(*g, join_path(path, "geometry"), def.geometry);
        }
        if (const json* l = object(obj, path, "leak")) {
            n.leak = leak(*l, join_path(path, "leak"), def.leak);
        }
        if (const json* m = object(obj, path, "material")) {
            check_keys(*m, join_path(path, "material"), {"stt_mobility"});
            n.material.stt_mobility = number(*m, join_path(path, "material"), "stt_mobility",
                                             def.material.stt_mobility);
        }
        if (const json* m = object(obj, path, "output_mtj")) {
            n.output_mtj = mtj(*m, join_path(path, "output_mtj"), def.output_mtj);
        }
        n.fire_position_m = number(obj, path, "fire_position_m", def.fire_position_m);
        n.reset_position_m = number(obj, path, "reset_position_m", def.reset_position_m);
        n.hysteresis_m = number(obj, path, "hysteresis_m", def.hysteresis_m);
        n.refractory_s = number(obj, path, "refractory_s", def.refractory_s);
        n.supply_voltage_V = number(obj, path, "supply_voltage_V", def.supply_voltage_V);
        return n;
    }

    SynapseDevice synapse(const json& obj, const std::string& path, const SynapseDevice& def) {
        SynapseDevice s = def;
        check_keys(obj, path, {"geometry", "material", "barrier"});
        if (const json* g = object(obj, path, "geometry")) {
            s.geometry = geometry(*g, join_path(path, "geometry"), def.geometry);
        }
        if (const json* m = object(obj, path, "material")) {
            check_keys(*m, join_path(path, "material"), {"stt_mobility"});
            s.material.stt_mobility = number(*m, join_path(path, "material"), "stt_mobility",
                                             def.material.stt_mobility);
        }
        if (const json* b = object(obj, path, "barrier")) {
            s.barrier = mtj(*b, join_path(path, "barrier"), def.barrier);
        }
        return s;
    }
};

void validate_semantics(ExperimentConfig& c, Parser& p) {
    try {
        check_valid(c.device);
    } catch (const std::invalid_argument& e) {
        p.errors.push_back(std::string("device.") + e.what());
    }
    try {
        check_valid(c.synapse);
    } catch (const std::invalid_argument& e) {
        p.errors.push_back(std::string("synapse.") + e.what());
    }
    if (c.dt_s <= 0.0) p.fail("simulation.dt_s", "must be > 0");
    if (c.t_end_s <= 0.0) p.fail("simulation.t_end_s", "must be > 0");
    if (c.sample_stride < 1) p.fail("simulation.sample_stride", "must be >= 1");

    switch (c.drive.kind) {
        case DriveKind::Dc:
            if (c.drive.v_max_V < 0.0) p.fail("drive.v_max", "must be >= 0");
            break;
        case DriveKind::Rate:
            if (c.drive.f_max_hz <= 0.0) p.fail("drive.f_max_hz", "must be > 0");
            if (c.drive.pulse_width_s <= 0.0) p.fail("drive.pulse_width_s", "must be > 0");
            if (c.drive.f_max_hz > 0.0 && c.drive.pulse_width_s >= 1.0 / c.drive.f_max_hz) {
                p.fail("drive.pulse_width_s", "must be shorter than one period at f_max_hz");
            }
            break;
        case DriveKind::DcCurrent:
            break;
        case DriveKind::PulsedCurrent:
            if (c.drive.on_s <= 0.0) p.fail("drive.on_s", "must be > 0");
            if (c.drive.off_s < 0.0) p.fail("drive.off_s", "must be >= 0");
            break;
    }
    if (c.drive.kind == DriveKind::Dc || c.drive.kind == DriveKind::Rate) {
        for (std::size_t i = 0; i < c.drive.values.size(); ++i) {
            if (!(c.drive.values[i] >= 0.0 && c.drive.values[i] <= 1.0)) {
                p.fail("drive.values[" + std::to_string(i) + "]", "must lie in [0, 1]");
            }
        }
    }

    if (const PartialInhibition* partial = std::get_if<PartialInhibition>(&c.inhibition)) {
        if (partial->inhibit_displacement_m <= 0.0 ||
            partial->inhibit_displacement_m > c.device.geometry.length_m) {
            p.fail("inhibition.displacement_m", "must lie in (0, track length]");
        }
    }

    if (c.network) {
        const std::string net_path = "network";
        if (c.network->input_width < 1) p.fail("network.input_width", "must be >= 1");
        if (c.network->sense_resistance_ohm <= 0.0) {
            p.fail("network.sense_resistance_ohm", "must be > 0");
        }
        if (c.network->layers.empty()) p.fail("network.layers", "must not be empty");
        std::size_t expected = c.network->input_width;
        for (std::size_t l = 0; l < c.network->layers.size(); ++l) {
            const LayerSpec& layer = c.network->layers[l];
            const std::string lp = "network.layers[" + std::to_string(l) + "]";
            if (layer.rows < 1) p.fail(lp + ".rows", "must be >= 1");
            if (layer.cols < 1) p.fail(lp + ".cols", "must be >= 1");
            if (layer.wire_resistance_per_segment_ohm < 0.0) {
                p.fail(lp + ".wire_resistance_per_segment_ohm", "must be >= 0");
            }
            if (layer.rows != expected) {
                p.fail(lp + ".rows", "must equal the previous layer's output count (" +
                                         std::to_string(expected) + ")");
            }
            expected = layer.cols;

            int content = 0;
            content += layer.positions.has_value();
            content += layer.position_fraction.has_value();
            content += layer.conductance_csv.has_value();
            content += layer.weights.has_value();
            content += layer.weights_csv.has_value();
            if (content != 1) {
                p.fail(lp, "exactly one of positions, position_fraction, conductance_csv, "
                           "weights, weights_csv is required");
            }
            if (layer.positions &&
                (layer.positions->rows != layer.rows || layer.positions->cols != layer.cols)) {
                p.fail(lp + ".positions", "shape must be rows x cols");
            }
            if (layer.weights &&
                (layer.weights->rows != layer.rows || layer.weights->cols != layer.cols)) {
                p.fail(lp + ".weights", "shape must be rows x cols");
            }
            if (layer.position_fraction &&
                !(*layer.position_fraction >= 0.0 && *layer.position_fraction <= 1.0)) {
                p.fail(lp + ".position_fraction", "must lie in [0, 1]");
            }
            if (layer.neuron_override) {
                try {
                    check_valid(*layer.neuron_override);
                } catch (const std::invalid_argument& e) {
                    p.errors.push_back(lp + ".neuron." + e.what());
                }
            }
        }
        if (c.drive.kind == DriveKind::Dc || c.drive.kind == DriveKind::Rate) {
            if (c.drive.values.size() != c.network->input_width) {
                p.fail("drive.values", "length must equal network.input_width");
            }
        }
    }

    if (c.mapping && c.mapping->quantize_levels && *c.mapping->quantize_levels < 2) {
        p.fail("mapping.quantize_levels", "must be >= 2");
    }
}

}  // namespace

ParseResult parse_config_json(const json& j) {
    if (!j.is_object()) {
        ParseResult bad;
        bad.errors.push_back("config root must be a JSON object");
        return bad;
    }
    Parser p;
    ExperimentConfig c;

    p.check_keys(j, "", {"device", "synapse", "network", "drive", "simulation", "inhibition",
                         "output", "mapping"});

    if (const json* d = p.object(j, "", "device")) {
        c.device = p.device(*d, "device", NeuronDevice{});
    }
    if (const json* s = p.object(j, "", "synapse")) {
        c.synapse = p.synapse(*s, "synapse", SynapseDevice{});
    }

    if (j.contains("network")) {
        if (const json* n = p.object(j, "", "network")) {
            NetworkSpec net;
            p.check_keys(*n, "network", {"input_width", "sense_resistance_ohm", "layers"});
            net.input_width = p.count(*n, "network", "input_width", 0);
            net.sense_resistance_ohm =
                p.number(*n, "network", "sense_resistance_ohm", 1e4);
            if (n->contains("layers")) {
                if (!(*n)["layers"].is_array()) {
                    p.fail("network.layers", "must be an array");
                } else {
                    std::size_t idx = 0;
                    for (const json& lj : (*n)["layers"]) {
                        const std::string lp = "network.layers[" + std::to_string(idx) + "]";
                        LayerSpec layer;
                        if (!lj.is_object()) {
                            p.fail(lp, "must be an object");
                        } else {
                            p.check_keys(lj, lp,
                                         {"rows", "cols", "wire_resistance_per_segment_ohm",
                                          "positions", "position_fraction", "conductance_csv",
                                          "weights", "weights_csv", "neuron"});
                            layer.rows = p.count(lj, lp, "rows", 0);
                            layer.cols = p.count(lj, lp, "cols", 0);
                            layer.wire_resistance_per_segment_ohm =
                                p.number(lj, lp, "wire_resistance_per_segment_ohm", 0.0);
                            layer.positions = p.matrix(lj, lp, "positions");
                            if (lj.contains("position_fraction")) {
                                layer.position_fraction =
                                    p.number(lj, lp, "position_fraction", 0.0);
                            }
                            if (lj.contains("conductance_csv")) {
                                layer.conductance_csv = p.text(lj, lp, "conductance_csv", "");
                            }
                            layer.weights = p.matrix(lj, lp, "weights");
                            if (lj.contains("weights_csv")) {
                                layer.weights_csv = p.text(lj, lp, "weights_csv", "");
                            }
                            if (const json* nn = p.object(lj, lp, "neuron")) {
                                layer.neuron_override =
                                    p.device(*nn, lp + ".neuron", c.device);
                            }
                        }
                        net.layers.push_back(std::move(layer));
                        ++idx;
                    }
                }
            }
            c.network = std::move(net);
        }
    }

    if (const json* d = p.object(j, "", "drive")) {
        p.check_keys(*d, "drive",
                     {"kind", "values", "v_max", "f_max_hz", "pulse_width_s", "v_pulse",
                      "seed", "amplitude_A", "on_s", "off_s"});
        const std::string kind = p.text(*d, "drive", "kind", "dc_current");
        if (kind == "dc") c.drive.kind = DriveKind::Dc;
        else if (kind == "rate") c.drive.kind = DriveKind::Rate;
        else if (kind == "dc_current") c.drive.kind = DriveKind::DcCurrent;
        else if (kind == "pulsed_current") c.drive.kind = DriveKind::PulsedCurrent;
        else p.fail("drive.kind", "unknown drive kind: " + kind);
        c.drive.values = p.number_list(*d, "drive", "values");
        c.drive.v_max_V = p.number(*d, "drive", "v_max", c.drive.v_max_V);
        c.drive.f_max_hz = p.number(*d, "drive", "f_max_hz", c.drive.f_max_hz);
        c.drive.pulse_width_s = p.number(*d, "drive", "pulse_width_s", c.drive.pulse_width_s);
        c.drive.v_pulse_V = p.number(*d, "drive", "v_pulse", c.drive.v_pulse_V);
        c.drive.seed = static_cast<std::uint64_t>(p.count(*d, "drive", "seed", 0));
        c.drive.amplitude_A = p.number(*d, "drive", "amplitude_A", c.drive.amplitude_A);
        c.drive.on_s = p.number(*d, "drive", "on_s", c.drive.on_s);
        c.drive.off_s = p.number(*d, "drive", "off_s", c.drive.off_s);
    }

    if (const json* s = p.object(j, "", "simulation")) {
        p.check_keys(*s, "simulation", {"dt_s", "t_end_s", "sample_stride"});
        c.dt_s = p.number(*s, "simulation", "dt_s", c.dt_s);
        c.t_end_s = p.number(*s, "simulation", "t_end_s", c.t_end_s);
        c.sample_stride = p.count(*s, "simulation", "sample_stride", c.sample_stride);
    }

    if (const json* i = p.object(j, "", "inhibition")) {
        p.check_keys(*i, "inhibition", {"kind", "displacement_m"});
        const std::string kind = p.text(*i, "inhibition", "kind", "none");
        if (kind == "none") {
            c.inhibition = NoInhibition{};
        } else if (kind == "winner_take_all") {
            c.inhibition = WinnerTakeAll{};
        } else if (kind == "partial") {
            PartialInhibition partial;
            partial.inhibit_displacement_m = p.number(*i, "inhibition", "displacement_m", 2e-7);
            c.inhibition = partial;
        } else {
            p.fail("inhibition.kind", "unknown inhibition kind: " + kind);
        }
    }

    if (const json* o = p.object(j, "", "output")) {
        p.check_keys(*o, "output",
                     {"trace_csv", "events_csv", "report_txt", "summary_csv", "gplus_csv",
                      "gminus_csv"});
        const auto opt_text = [&](const char* key) -> std::optional<std::string> {
            if (!o->contains(key)) return std::nullopt;
            return p.text(*o, "output", key, "");
        };
        c.output.trace_csv = opt_text("trace_csv");
        c.output.events_csv = opt_text("events_csv");
        c.output.report_txt = opt_text("report_txt");
        c.output.summary_csv = opt_text("summary_csv");
        c.output.gplus_csv = opt_text("gplus_csv");
        c.output.gminus_csv = opt_text("gminus_csv");
    }

    if (j.contains("mapping")) {
        if (const json* m = p.object(j, "", "mapping")) {
            p.check_keys(*m, "mapping", {"weights_csv", "quantize_levels"});
            MappingSpec spec;
            spec.weights_csv = p.text(*m, "mapping", "weights_csv", "");
            if (spec.weights_csv.empty()) {
                p.fail("mapping.weights_csv", "required");
            }
            if (m->contains("quantize_levels")) {
                spec.quantize_levels = p.count(*m, "mapping", "quantize_levels", 16);
            }
            c.mapping = std::move(spec);
        }
    }

    validate_semantics(c, p);

    ParseResult result;
    result.errors = std::move(p.errors);
    if (result.errors.empty()) {
        result.config = std::move(c);
    }
    return result;
}

ParseResult parse_config_file(const std::string& path) {
    ParseResult result;
    std::ifstream file(path);
    if (!file) {
        result.errors.push_back("cannot open config file: " + path);
        return result;
    }
    json j;
    try {
        j = json::parse(file);
    } catch (const json::parse_error& e) {
        result.errors.push_back(std::string("JSON parse error: ") + e.what());
        return result;
    }
    return parse_config_json(j);
}

namespace {

json geometry_json(const TrackGeometry& g) {
    return json{{"length_m", g.length_m},
                {"width_start_m", g.width_start_m},
                {"width_end_m", g.width_end_m},
                {"thickness_m", g.thickness_m}};
}

json mtj_json(const MtjStack& m) {
    return json{{"g_parallel_S", m.g_parallel_S},
                {"g_antiparallel_S", m.g_antiparallel_S},
                {"window_start_m", m.window_start_m},
                {"window_end_m", m.window_end_m}};
}

json leak_json(const LeakMechanism& leak) {
    return std::visit(
        [](const auto& mech) -> json {
            using T = std::decay_t<decltype(mech)>;
            if constexpr (std::is_same_v<T, NoLeak>) {
                return json{{"kind", "none"}};
            } else if constexpr (std::is_same_v<T, DipolarField>) {
                return json{{"kind", "dipolar_field"},
                            {"drift_speed_mps", mech.drift_speed_mps}};
            } else if constexpr (std::is_same_v<T, AnisotropyGradient>) {
                return json{{"kind", "anisotropy_gradient"},
                            {"mobility_mk", mech.mobility_mk},
                            {"k0_jm3", mech.k0_jm3},
                            {"k_slope_jm4", mech.k_slope_jm4}};
            } else {
                return json{{"kind", "shape_taper"}, {"mobility_ms", mech.mobility_ms}};
            }
        },
        leak);
}

json device_json(const NeuronDevice& n) {
    return json{{"geometry", geometry_json(n.geometry)},
                {"leak", leak_json(n.leak)},
                {"material", json{{"stt_mobility", n.material.stt_mobility}}},
                {"output_mtj", mtj_json(n.output_mtj)},
                {"fire_position_m", n.fire_position_m},
                {"reset_position_m", n.reset_position_m},
                {"hysteresis_m", n.hysteresis_m},
                {"refractory_s", n.refractory_s},
                {"supply_voltage_V", n.supply_voltage_V}};
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["device"] = device_json(device);
    j["synapse"] = json{{"geometry", geometry_json(synapse.geometry)},
                        {"material", json{{"stt_mobility", synapse.material.stt_mobility}}},
                        {"barrier", mtj_json(synapse.barrier)}};
    if (network) {
        json layers = json::array();
        for (const LayerSpec& layer : network->layers) {
            json lj{{"rows", layer.rows},
                    {"cols", layer.cols},
                    {"wire_resistance_per_segment_ohm",
                     layer.wire_resistance_per_segment_ohm}};
            if (layer.positions) lj["positions"] = matrix_json(*layer.positions);
            if (layer.position_fraction) lj["position_fraction"] = *layer.position_fraction;
            if (layer.conductance_csv) lj["conductance_csv"] = *layer.conductance_csv;
            if (layer.weights) lj["weights"] = matrix_json(*layer.weights);
            if (layer.weights_csv) lj["weights_csv"] = *layer.weights_csv;
            if (layer.neuron_override) lj["neuron"] = device_json(*layer.neuron_override);
            layers.push_back(std::move(lj));
        }
        j["network"] = json{{"input_width", network->input_width},
                            {"sense_resistance_ohm", network->sense_resistance_ohm},
                            {"layers", std::move(layers)}};
    }
    json drive_j;
    switch (drive.kind) {
        case DriveKind::Dc:
            drive_j = json{{"kind", "dc"}, {"values", drive.values}, {"v_max", drive.v_max_V}};
            break;
        case DriveKind::Rate:
            drive_j = json{{"kind", "rate"},
                           {"values", drive.values},
                           {"f_max_hz", drive.f_max_hz},
                           {"pulse_width_s", drive.pulse_width_s},
                           {"v_pulse", drive.v_pulse_V},
                           {"seed", drive.seed}};
            break;
        case DriveKind::DcCurrent:
            drive_j = json{{"kind", "dc_current"}, {"amplitude_A", drive.amplitude_A}};
            break;
        case DriveKind::PulsedCurrent:
            drive_j = json{{"kind", "pulsed_current"},
                           {"amplitude_A", drive.amplitude_A},
                           {"on_s", drive.on_s},
                           {"off_s", drive.off_s}};
            break;
    }
    j["drive"] = std::move(drive_j);
    j["simulation"] =
        json{{"dt_s", dt_s}, {"t_end_s", t_end_s}, {"sample_stride", sample_stride}};
    j["inhibition"] = std::visit(
        [](const auto& pol) -> json {
            using T = std::decay_t<decltype(pol)>;
            if constexpr (std::is_same_v<T, NoInhibition>) {
                return json{{"kind", "none"}};
            } else if constexpr (std::is_same_v<T, WinnerTakeAll>) {
                return json{{"kind", "winner_take_all"}};
            } else {
                return json{{"kind", "partial"},
                            {"displacement_m", pol.inhibit_displacement_m}};
            }
        },
        inhibition);
    json out;
    if (output.trace_csv) out["trace_csv"] = *output.trace_csv;
    if (output.events_csv) out["events_csv"] = *output.events_csv;
    if (output.report_txt) out["report_txt"] = *output.report_txt;
    if (output.summary_csv) out["summary_csv"] = *output.summary_csv;
    if (output.gplus_csv) out["gplus_csv"] = *output.gplus_csv;
    if (output.gminus_csv) out["gminus_csv"] = *output.gminus_csv;
    if (!out.empty()) j["output"] = std::move(out);
    if (mapping) {
        json m{{"weights_csv", mapping->weights_csv}};
        if (mapping->quantize_levels) m["quantize_levels"] = *mapping->quantize_levels;
        j["mapping"] = std::move(m);
    }
    return j;
}

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (base_dir.empty() || path.empty() || path.front() == '/') return path;
    return base_dir + "/" + path;
}

CrossbarLayer layer_from_positions(const LayerSpec& spec, const SynapseDevice& prototype,
                                   const Matrix& positions) {
    CrossbarLayer layer = make_layer(spec.rows, spec.cols, prototype,
                                     spec.wire_resistance_per_segment_ohm);
    for (std::size_t idx = 0; idx < positions.data.size(); ++idx) {
        layer.synapses[idx].dw_position_m = positions.data[idx];
    }
    return layer;
}

// Invert the conductance law: the wall position that realizes a target
// conductance within the barrier window.
double position_for_conductance(const SynapseDevice& prototype, double conductance_S) {
    const MtjStack& b = prototype.barrier;
    const double f =
        (conductance_S - b.g_antiparallel_S) / (b.g_parallel_S - b.g_antiparallel_S);
    return b.window_start_m + f * (b.window_end_m - b.window_start_m);
}

}  // namespace

Network build_network(const ExperimentConfig& config, const std::string& base_dir) {
    if (!config.network) {
        throw std::invalid_argument("config has no network section");
    }
    Network net;
    net.input_width = config.network->input_width;
    net.sense_resistance_ohm = config.network->sense_resistance_ohm;

    for (const LayerSpec& spec : config.network->layers) {
        NetworkLayer layer;
        const NeuronDevice& neuron =
            spec.neuron_override ? *spec.neuron_override : config.device;
        layer.neurons.assign(spec.cols, neuron);

        if (spec.positions) {
            layer.synapses = layer_from_positions(spec, config.synapse, *spec.positions);
        } else if (spec.position_fraction) {
            Matrix positions(spec.rows, spec.cols);
            const MtjStack& b = config.synapse.barrier;
            const double x = b.window_start_m +
                             *spec.position_fraction * (b.window_end_m - b.window_start_m);
            for (double& v : positions.data) v = x;
            layer.synapses = layer_from_positions(spec, config.synapse, positions);
        } else if (spec.conductance_csv) {
            const Matrix g = read_matrix_csv(resolve_path(base_dir, *spec.conductance_csv));
            if (g.rows != spec.rows || g.cols != spec.cols) {
                throw std::invalid_argument("layer conductance matrix shape must be rows x cols");
            }
            const MtjStack& b = config.synapse.barrier;
            Matrix positions(spec.rows, spec.cols);
            for (std::size_t idx = 0; idx < g.data.size(); ++idx) {
                const double value = g.data[idx];
                if (value < b.g_antiparallel_S * (1.0 - 1e-12) ||
                    value > b.g_parallel_S * (1.0 + 1e-12)) {
                    throw std::domain_error(
                        "layer conductance outside the device range [g_AP, g_P]");
                }
                positions.data[idx] =
                    std::clamp(position_for_conductance(config.synapse, value),
                               b.window_start_m, b.window_end_m);
            }
            layer.synapses = layer_from_positions(spec, config.synapse, positions);
        } else {
            Matrix weights;
            if (spec.weights) {
                weights = *spec.weights;
            } else if (spec.weights_csv) {
                weights = read_matrix_csv(resolve_path(base_dir, *spec.weights_csv));
            } else {
                throw std::invalid_argument("layer has no synapse content");
            }
            if (weights.rows != spec.rows || weights.cols != spec.cols) {
                throw std::invalid_argument("layer weight matrix shape must be rows x cols");
            }
            const MappedWeights mapped =
                map_weights(weights, config.synapse.barrier.g_antiparallel_S,
                            config.synapse.barrier.g_parallel_S);
            DifferentialLayer diff;
            Matrix plus_pos(spec.rows, spec.cols);
            Matrix minus_pos(spec.rows, spec.cols);
            for (std::size_t idx = 0; idx < weights.data.size(); ++idx) {
                plus_pos.data[idx] =
                    position_for_conductance(config.synapse, mapped.g_plus.data[idx]);
                minus_pos.data[idx] =
                    position_for_conductance(config.synapse, mapped.g_minus.data[idx]);
            }
            diff.plus = layer_from_positions(spec, config.synapse, plus_pos);
            diff.minus = layer_from_positions(spec, config.synapse, minus_pos);
            layer.synapses = std::move(diff);
        }
        net.layers.push_back(std::move(layer));
    }
    check_valid(net);
    return net;
}

DriveWaveform build_network_drive(const ExperimentConfig& config, std::size_t input_width) {
    if (config.drive.kind == DriveKind::Dc) {
        if (config.drive.values.size() != input_width) {
            throw std::invalid_argument("drive.values length must equal network input width");
        }
        return dc_encode(config.drive.values, config.drive.v_max_V);
    }
    if (config.drive.kind == DriveKind::Rate) {
        if (config.drive.values.size() != input_width) {
            throw std::invalid_argument("drive.values length must equal network input width");
        }
        return rate_encode(config.drive.values, config.drive.f_max_hz,
                           config.drive.pulse_width_s, config.drive.v_pulse_V,
                           config.drive.seed, config.t_end_s);
    }
    throw std::invalid_argument("network simulation requires a dc or rate drive");
}

DriveWaveform build_neuron_drive(const ExperimentConfig& config) {
    DriveWaveform w;
    w.inputs.resize(1);
    if (config.drive.kind == DriveKind::DcCurrent) {
        w.inputs[0].push_back(
            {0.0, std::numeric_limits<double>::infinity(), config.drive.amplitude_A});
        return w;
    }
    if (config.drive.kind == DriveKind::PulsedCurrent) {
        const double period = config.drive.on_s + config.drive.off_s;
        for (std::size_t k = 0;; ++k) {
            const double start = static_cast<double>(k) * period;
            if (start >= config.t_end_s) break;
            w.inputs[0].push_back({start, start + config.drive.on_s, config.drive.amplitude_A});
        }
        return w;
    }
    throw std::invalid_argument(
        "single-neuron simulation requires a dc_current or pulsed_current drive");
}

RunConfig build_run_config(const ExperimentConfig& config) {
    RunConfig rc;
    rc.dt_s = config.dt_s;
    rc.t_end_s = config.t_end_s;
    rc.sample_stride = config.sample_stride;
    rc.inhibition = config.inhibition;
    return rc;
}

}  // namespace dwmtj
