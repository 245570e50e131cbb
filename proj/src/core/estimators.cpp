#include "spotvol/estimators.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>
#include <vector>

#include "spotvol/errors.hpp"

namespace spotvol::est {

namespace {

// Symmetric sum of outer products of columns [begin, end), accumulated in
// long double and scaled once at the end.
Matrix outer_sum(const Matrix& incr, Eigen::Index begin, Eigen::Index end, double scale) {
    const Eigen::Index p = incr.rows();
    std::vector<long double> acc(static_cast<std::size_t>(p * (p + 1) / 2), 0.0L);
    for (Eigen::Index c = begin; c < end; ++c) {
        const double* x = incr.col(c).data();
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < p; ++i) {
            const long double xi = x[i];
            for (Eigen::Index j = i; j < p; ++j) acc[k++] += xi * x[j];
        }
    }
    Matrix out(p, p);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            const double v = static_cast<double>(acc[k++] * scale);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

}  // namespace

Matrix realized_integrated_vol(const Matrix& incr) {
    if (incr.cols() < 1) throw ConfigError("realized_integrated_vol: need at least one increment");
    return outer_sum(incr, 0, incr.cols(), 1.0);
}

std::size_t window_start(double t, std::size_t n) {
    const double tn = t * static_cast<double>(n);
    const double r = std::round(tn);
    if (std::abs(tn - r) <= 8.0 * DBL_EPSILON * std::max(1.0, std::abs(tn))) {
        return static_cast<std::size_t>(r);
    }
    return static_cast<std::size_t>(std::floor(tn));
}

namespace {

std::size_t checked_start(double t, std::size_t n, std::size_t k_n) {
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("spot_vol: t must be >= 0");
    if (k_n == 0) throw ConfigError("spot_vol: k_n must be >= 1");
    const std::size_t start = window_start(t, n);
    if (start + k_n > n) {
        throw ConfigError("spot_vol: window overruns the sample, floor(t n) + k_n = " +
                          std::to_string(start + k_n) + " > n = " + std::to_string(n));
    }
    return start;
}

}  // namespace

SpotEstimate spot_vol(const Matrix& incr, double t, std::size_t k_n) {
    const auto n = static_cast<std::size_t>(incr.cols());
    const std::size_t start = checked_start(t, n, k_n);
    SpotEstimate est;
    est.matrix = outer_sum(incr, static_cast<Eigen::Index>(start),
                           static_cast<Eigen::Index>(start + k_n),
                           static_cast<double>(n) / static_cast<double>(k_n));
    est.t = t;
    est.k_n = k_n;
    est.z_n = static_cast<double>(incr.rows()) / static_cast<double>(k_n);
    est.first = start + 1;
    est.last = start + k_n;
    return est;
}

SpotEstimate spot_vol_from_window(const Matrix& window_incr, std::size_t n, double t) {
    const auto k_n = static_cast<std::size_t>(window_incr.cols());
    const std::size_t start = checked_start(t, n, k_n);
    SpotEstimate est;
    est.matrix = outer_sum(window_incr, 0, window_incr.cols(),
                           static_cast<double>(n) / static_cast<double>(k_n));
    est.t = t;
    est.k_n = k_n;
    est.z_n = static_cast<double>(window_incr.rows()) / static_cast<double>(k_n);
    est.first = start + 1;
    est.last = start + k_n;
    return est;
}

}  // namespace spotvol::est
