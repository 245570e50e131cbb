#pragma once

#include <cstddef>

#include "spotvol/types.hpp"

namespace spotvol::est {

// Realized spot volatility matrix
//   (n/k_n) sum_{i=floor(tn)+1}^{floor(tn)+k_n} (Delta_i X)(Delta_i X)^T
struct SpotEstimate {
    Matrix matrix;
    double t = 0.0;
    std::size_t k_n = 0;
    double z_n = 0.0;  // p / k_n
    // 1-based increment indices covered by the window, inclusive.
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

// sum_i (Delta_i X)(Delta_i X)^T over all columns of `incr` (p x n).
Matrix realized_integrated_vol(const Matrix& incr);

// floor(t n), with t n values within a few ulps of an integer snapped to it
// so that t = j k_n / n addresses window j exactly.
std::size_t window_start(double t, std::size_t n);

// Throws ConfigError when t < 0, k_n == 0 or the window overruns the sample.
SpotEstimate spot_vol(const Matrix& incr, double t, std::size_t k_n);

// Spot estimate from the window's increments alone (p x k_n), for callers
// that simulated only the window. `n` is the full sample size.
SpotEstimate spot_vol_from_window(const Matrix& window_incr, std::size_t n, double t);

}  // namespace spotvol::est
