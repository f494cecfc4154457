// csv.hpp
// CSV import/export: conductance and weight matrices (row-major), simulation
// traces and fire-event logs. Numeric output uses fixed formats so identical
// runs produce byte-identical files.
#pragma once

#include <string>

#include "dwmtj/linalg.hpp"
#include "dwmtj/netsim.hpp"

namespace dwmtj {

// Row-major real matrix, one CSV row per matrix row. Throws
// std::runtime_error on I/O failure, std::invalid_argument on ragged or
// non-numeric content.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const Matrix& m, const std::string& path);

// Header: time_s,pos_<l>_<n>...,mtj_<l>_<n>...,i_bit_<l>_<j>...
// Values in scientific notation with 9 significant digits; MTJ states as 0/1.
void write_trace_csv(const SimTrace& trace, const std::string& path);

// Header: time_s,layer,neuron — one row per fire event in time order.
void write_events_csv(const SimTrace& trace, const std::string& path);

}  // namespace dwmtj
