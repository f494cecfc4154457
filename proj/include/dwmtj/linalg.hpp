// linalg.hpp
// Minimal dense row-major matrix and a direct linear solver, sized for the
// nodal meshes this simulator assembles (a few thousand unknowns at most).
#pragma once

#include <cstddef>
#include <vector>

namespace dwmtj {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

// Solve A x = b in place by Gaussian elimination with partial pivoting.
// Throws std::runtime_error on a (numerically) singular system. The parallel
// variant distributes row updates across threads; every element sees the same
// arithmetic sequence in either variant, so results are bit-identical.
std::vector<double> lu_solve(Matrix a, std::vector<double> b);
std::vector<double> lu_solve_serial(Matrix a, std::vector<double> b);

}  // namespace dwmtj
