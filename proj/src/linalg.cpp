#include "dwmtj/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace dwmtj {

namespace {

template <bool Parallel>
std::vector<double> solve_impl(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) {
        throw std::invalid_argument("lu_solve: dimension mismatch");
    }
    double* ad = a.data.data();

    for (std::size_t k = 0; k < n; ++k) {
        // Partial pivot.
        std::size_t pivot = k;
        double best = std::abs(ad[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(ad[i * n + k]);
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (best == 0.0 || !std::isfinite(best)) {
            throw std::runtime_error("lu_solve: singular system");
        }
        if (pivot != k) {
            for (std::size_t j = k; j < n; ++j) {
                std::swap(ad[k * n + j], ad[pivot * n + j]);
            }
            std::swap(b[k], b[pivot]);
        }

        const double inv_piv = 1.0 / ad[k * n + k];
        // Row updates below the pivot are independent of each other.
        const auto eliminate_row = [&](std::size_t i) {
            const double factor = ad[i * n + k] * inv_piv;
            if (factor == 0.0) return;
            ad[i * n + k] = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) {
                ad[i * n + j] -= factor * ad[k * n + j];
            }
            b[i] -= factor * b[k];
        };
        if (Parallel && n - k > 128) {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = static_cast<std::int64_t>(k) + 1;
                 i < static_cast<std::int64_t>(n); ++i) {
                eliminate_row(static_cast<std::size_t>(i));
            }
        } else {
            for (std::size_t i = k + 1; i < n; ++i) {
                eliminate_row(i);
            }
        }
    }

    // Back substitution.
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double sum = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) {
            sum -= ad[ii * n + j] * x[j];
        }
        x[ii] = sum / ad[ii * n + ii];
    }
    return x;
}

}  // namespace

std::vector<double> lu_solve(Matrix a, std::vector<double> b) {
    return solve_impl<true>(std::move(a), std::move(b));
}

std::vector<double> lu_solve_serial(Matrix a, std::vector<double> b) {
    return solve_impl<false>(std::move(a), std::move(b));
}

}  // namespace dwmtj
