#include "spotvol/hdtests.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/rmt.hpp"

namespace spotvol::hdtest {

namespace {

constexpr double kSingularFloor = 1e-12;

TestReport make_report(TestKind kind, double raw, double zscore, std::size_t p, std::size_t k_n) {
    if (!std::isfinite(zscore)) throw NumericalError(std::string(to_string(kind)) + ": non-finite z-score");
    TestReport r;
    r.kind = kind;
    r.raw = raw;
    r.zscore = zscore;
    r.pvalue = two_sided_pvalue(zscore);
    r.p = p;
    r.k_n = k_n;
    r.z_n = static_cast<double>(p) / static_cast<double>(k_n);
    return r;
}

void check_window(std::size_t k_n) {
    if (k_n == 0) throw ConfigError("test: k_n must be >= 1");
}

double checked_bjyz_ratio(std::size_t p, std::size_t k_n) {
    check_window(k_n);
    const double z_n = static_cast<double>(p) / static_cast<double>(k_n);
    if (z_n >= 1.0) {
        throw ConfigError("BJYZ: degenerate, estimator singular with probability one (z_n = " +
                          csv::format_double(z_n) + " >= 1)");
    }
    return z_n;
}

}  // namespace

const char* to_string(TestKind kind) {
    switch (kind) {
        case TestKind::BJYZ: return "BJYZ";
        case TestKind::LW: return "LW";
        case TestKind::J: return "J";
    }
    return "?";
}

TestKind test_kind_from_string(const std::string& name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "BJYZ") return TestKind::BJYZ;
    if (up == "LW") return TestKind::LW;
    if (up == "J") return TestKind::J;
    throw ConfigError("unknown test '" + name + "'");
}

double two_sided_pvalue(double zscore) {
    return std::erfc(std::abs(zscore) / std::numbers::sqrt2);
}

TestReport bjyz_test(const spectra::SpectralSample& spectrum, std::size_t k_n) {
    const std::size_t p = spectrum.eigenvalues.size();
    const double z_n = checked_bjyz_ratio(p, k_n);
    if (spectrum.min() <= kSingularFloor) {
        throw NumericalError("BJYZ: estimator is singular (smallest eigenvalue " +
                             csv::format_double(spectrum.min()) + ")");
    }
    double raw = 0.0;
    for (double lambda : spectrum.eigenvalues) raw += lambda - std::log(lambda) - 1.0;
    const auto c = rmt::mp_lss_constants(z_n);
    const double z = (raw - static_cast<double>(p) * c.center - c.mean_shift) / std::sqrt(c.variance);
    return make_report(TestKind::BJYZ, raw, z, p, k_n);
}

TestReport lw_test(const spectra::SpectralSample& spectrum, std::size_t k_n) {
    check_window(k_n);
    const std::size_t p = spectrum.eigenvalues.size();
    const double pd = static_cast<double>(p);
    const double ratio = pd / static_cast<double>(k_n);
    double sq = 0.0;
    double sum = 0.0;
    for (double lambda : spectrum.eigenvalues) {
        sq += (lambda - 1.0) * (lambda - 1.0);
        sum += lambda;
    }
    const double mean = sum / pd;
    const double raw = sq / pd - ratio * mean * mean + ratio;
    const double z = (static_cast<double>(k_n) * raw - pd - 1.0) / 2.0;
    return make_report(TestKind::LW, raw, z, p, k_n);
}

TestReport j_test(const spectra::SpectralSample& spectrum, std::size_t k_n) {
    check_window(k_n);
    const std::size_t p = spectrum.eigenvalues.size();
    const double pd = static_cast<double>(p);
    double sum = 0.0;
    for (double lambda : spectrum.eigenvalues) sum += lambda;
    if (!(sum > 0.0)) throw ConfigError("J: zero trace, normalization undefined");
    const double mean = sum / pd;
    double sq = 0.0;
    for (double lambda : spectrum.eigenvalues) {
        const double d = lambda / mean - 1.0;
        sq += d * d;
    }
    const double raw = sq / pd;
    const double z = (static_cast<double>(k_n) * raw - pd - 1.0) / 2.0;
    return make_report(TestKind::J, raw, z, p, k_n);
}

TestReport bjyz_test(const est::SpotEstimate& est) {
    checked_bjyz_ratio(est.dim(), est.k_n);
    return bjyz_test(spectra::eigenvalues_sym(est.matrix), est.k_n);
}

TestReport lw_test(const est::SpotEstimate& est) {
    return lw_test(spectra::eigenvalues_sym(est.matrix), est.k_n);
}

TestReport j_test(const est::SpotEstimate& est) {
    const double trace = est.matrix.trace();
    if (!(trace > 0.0)) throw ConfigError("J: zero trace, normalization undefined");
    // Normalize first so the decomposition sees the same matrix for every rescaling.
    const Matrix normalized = est.matrix / (trace / static_cast<double>(est.dim()));
    return j_test(spectra::eigenvalues_sym(normalized), est.k_n);
}

double lw_statistic_trace(const Matrix& c, std::size_t k_n) {
    const double p = static_cast<double>(c.rows());
    const double ratio = p / static_cast<double>(k_n);
    const Matrix centered = c - Matrix::Identity(c.rows(), c.cols());
    const double mean = c.trace() / p;
    return (centered * centered).trace() / p - ratio * mean * mean + ratio;
}

double j_statistic_trace(const Matrix& c) {
    const double p = static_cast<double>(c.rows());
    const Matrix centered = c / (c.trace() / p) - Matrix::Identity(c.rows(), c.cols());
    return (centered * centered).trace() / p;
}

Matrix inverse_sqrt_sym(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols()) throw ConfigError("inverse_sqrt_sym: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sigma + sigma.transpose()));
    if (solver.info() != Eigen::Success) throw NumericalError("inverse_sqrt_sym: eigensolver failed");
    const Vector inv_root = solver.eigenvalues().unaryExpr(
        [](double v) { return 1.0 / std::sqrt(std::max(v, kSingularFloor)); });
    return solver.eigenvectors() * inv_root.asDiagonal() * solver.eigenvectors().transpose();
}

std::string csv_header() {
    return "kind,p,k_n,z_n,raw,zscore,pvalue";
}

std::string to_csv_row(const TestReport& r) {
    return std::string(to_string(r.kind)) + ',' + std::to_string(r.p) + ',' + std::to_string(r.k_n) + ',' +
           csv::format_double(r.z_n) + ',' + csv::format_double(r.raw) + ',' +
           csv::format_double(r.zscore) + ',' + csv::format_double(r.pvalue);
}

}  // namespace spotvol::hdtest
