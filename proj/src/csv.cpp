#include "dwmtj/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dwmtj {

namespace {

void append_sci(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    out += buf;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    return file;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open for reading: " + path);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                throw std::invalid_argument("non-numeric CSV cell in " + path + ": " + cell);
            }
            while (consumed < cell.size() &&
                   (cell[consumed] == ' ' || cell[consumed] == '\r')) {
                ++consumed;
            }
            if (consumed != cell.size()) {
                throw std::invalid_argument("non-numeric CSV cell in " + path + ": " + cell);
            }
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::invalid_argument("ragged CSV rows in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::invalid_argument("empty CSV matrix in " + path);
    }
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream file = open_for_write(path);
    std::string line;
    for (std::size_t i = 0; i < m.rows; ++i) {
        line.clear();
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j > 0) line += ',';
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            line += buf;
        }
        line += '\n';
        file << line;
    }
    if (!file) {
        throw std::runtime_error("write failed: " + path);
    }
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream file = open_for_write(path);
    const std::size_t total = trace.total_neurons();
    const bool has_currents = !trace.bit_currents_A.empty();

    std::string line = "time_s";
    for (std::size_t l = 0; l < trace.neurons_per_layer.size(); ++l) {
        for (std::size_t n = 0; n < trace.neurons_per_layer[l]; ++n) {
            line += ",pos_" + std::to_string(l) + "_" + std::to_string(n);
        }
    }
    for (std::size_t l = 0; l < trace.neurons_per_layer.size(); ++l) {
        for (std::size_t n = 0; n < trace.neurons_per_layer[l]; ++n) {
            line += ",mtj_" + std::to_string(l) + "_" + std::to_string(n);
        }
    }
    if (has_currents) {
        for (std::size_t l = 0; l < trace.neurons_per_layer.size(); ++l) {
            for (std::size_t j = 0; j < trace.neurons_per_layer[l]; ++j) {
                line += ",i_bit_" + std::to_string(l) + "_" + std::to_string(j);
            }
        }
    }
    line += '\n';
    file << line;

    for (std::size_t k = 0; k < trace.sample_count(); ++k) {
        line.clear();
        append_sci(line, trace.time_s[k]);
        for (std::size_t c = 0; c < total; ++c) {
            line += ',';
            append_sci(line, trace.positions_m[k * total + c]);
        }
        for (std::size_t c = 0; c < total; ++c) {
            line += ',';
            line += trace.mtj_states[k * total + c] ? '1' : '0';
        }
        if (has_currents) {
            for (std::size_t c = 0; c < total; ++c) {
                line += ',';
                append_sci(line, trace.bit_currents_A[k * total + c]);
            }
        }
        line += '\n';
        file << line;
    }
    if (!file) {
        throw std::runtime_error("write failed: " + path);
    }
}

void write_events_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream file = open_for_write(path);
    file << "time_s,layer,neuron\n";
    std::string line;
    for (const FireEvent& e : trace.events) {
        line.clear();
        append_sci(line, e.time_s);
        line += ',' + std::to_string(e.layer) + ',' + std::to_string(e.neuron) + '\n';
        file << line;
    }
    if (!file) {
        throw std::runtime_error("write failed: " + path);
    }
}

}  // namespace dwmtj
