#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spotvol/errors.hpp"
#include "spotvol/simkit.hpp"

namespace spotvol::sim {
namespace {

VolModel sin_model(double base, double r1) {
    VolModel m;
    m.kind = VolKind::DeterministicSin;
    m.base = base;
    m.r1 = r1;
    return m;
}

TEST(SimkitTest, RejectsInvalidConfig) {
    EXPECT_THROW(simulate_path({1, 3, 0}, sin_model(1.0, 0.0)), ConfigError);
    EXPECT_THROW(simulate_path({10, 0, 0}, sin_model(1.0, 0.0)), ConfigError);
    EXPECT_THROW(simulate_path({10, 2, 0}, sin_model(0.0004, 0.0008)), ConfigError);
    VolModel diag;
    diag.kind = VolKind::ConstantDiag;
    diag.diag = {1.0, 2.0};
    EXPECT_THROW(simulate_path({10, 3, 0}, diag), ConfigError);
    diag.diag = {1.0, -2.0};
    EXPECT_THROW(simulate_path({10, 2, 0}, diag), ConfigError);
}

TEST(SimkitTest, DeterministicForFixedSeed) {
    const GridConfig grid{4, 1, 12345};
    const auto a = simulate_path(grid, sin_model(1.0, 0.0));
    const auto b = simulate_path(grid, sin_model(1.0, 0.0));
    ASSERT_EQ(a.values.cols(), 5);
    for (Eigen::Index i = 0; i < a.values.cols(); ++i) {
        EXPECT_EQ(a.values(0, i), b.values(0, i));
    }
    const auto c = simulate_path({4, 1, 12346}, sin_model(1.0, 0.0));
    EXPECT_NE(a.values(0, 4), c.values(0, 4));
}

TEST(SimkitTest, GridAndInitialValue) {
    const auto path = simulate_path({8, 3, 1}, sin_model(1.0, 0.0));
    ASSERT_EQ(path.grid.size(), 9u);
    EXPECT_EQ(path.grid.front(), 0.0);
    EXPECT_EQ(path.grid.back(), 1.0);
    for (std::size_t i = 1; i < path.grid.size(); ++i) {
        EXPECT_NEAR(path.grid[i] - path.grid[i - 1], 0.125, 1e-15);
    }
    EXPECT_TRUE(path.values.col(0).isZero(0.0));
}

TEST(SimkitTest, IncrementsBySubtraction) {
    PricePath path;
    path.values = Matrix(1, 3);
    path.values << 0.0, 0.1, -0.1;
    const Matrix incr = increments(path);
    ASSERT_EQ(incr.cols(), 2);
    EXPECT_DOUBLE_EQ(incr(0, 0), 0.1);
    EXPECT_DOUBLE_EQ(incr(0, 1), -0.2);

    path.values = Matrix::Constant(2, 5, 3.5);
    EXPECT_TRUE(increments(path).isZero(0.0));
}

TEST(SimkitTest, IncrementsTelescope) {
    const auto path = simulate_path({500, 4, 9}, sin_model(0.0009, 0.0008));
    const Matrix incr = increments(path);
    for (Eigen::Index j = 0; j < incr.rows(); ++j) {
        const double total = incr.row(j).sum();
        const double expected = path.values(j, 500) - path.values(j, 0);
        EXPECT_NEAR(total, expected, 1e-15 * 500 * path.values.row(j).cwiseAbs().maxCoeff());
    }
}

TEST(SimkitTest, SineVarianceMatchesClosedForm) {
    const std::size_t n = 4680;
    const double base = 0.0009;
    const double r1 = 0.0008;
    for (std::size_t i : {1u, 7u, 1170u, 2340u, 4680u}) {
        const double lo = 2.0 * std::numbers::pi * static_cast<double>(i - 1) / n;
        const double hi = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        const double integral = base / n + (r1 / (2.0 * std::numbers::pi)) * (std::cos(lo) - std::cos(hi));
        const double mean = mean_sin_variance(base, r1, i, n);
        EXPECT_NEAR(mean / n, integral, 1e-12 * integral) << "i=" << i;
    }
}

TEST(SimkitTest, ConstantVolatilitySampleVariance) {
    // sqrt(n) Delta X ~ N(0, base) i.i.d.; 5 standard errors of the sample variance.
    const std::size_t n = 4680, p = 34;
    const double base = 0.0009;
    const auto path = simulate_path({n, p, 2024}, sin_model(base, 0.0));
    const Matrix scaled = increments(path) * std::sqrt(static_cast<double>(n));
    const double count = static_cast<double>(scaled.size());
    const double var = scaled.squaredNorm() / count;
    const double se = base * std::sqrt(2.0 / count);
    EXPECT_NEAR(var, base, 5.0 * se);
}

TEST(SimkitTest, StochasticWithoutVolOfVolReproducesConstant) {
    VolModel sto;
    sto.kind = VolKind::StochasticBM;
    sto.base = 0.0009;
    sto.r2 = 0.0;
    const GridConfig grid{300, 5, 77};
    const auto a = simulate_path(grid, sto);
    const auto b = simulate_path(grid, sin_model(0.0009, 0.0));
    EXPECT_TRUE((a.values.array() == b.values.array()).all());
}

TEST(SimkitTest, WindowMatchesFullPath) {
    VolModel sto;
    sto.kind = VolKind::StochasticBM;
    sto.r2 = 0.02;
    const GridConfig grid{400, 3, 5};
    for (const VolModel& model : {sto, sin_model(0.0009, 0.0008)}) {
        const Matrix full = simulate_increments(grid, model, 0, 400, 3);
        const Matrix window = simulate_increments(grid, model, 123, 40, 3);
        EXPECT_TRUE((window.array() == full.middleCols(123, 40).array()).all());
    }
    EXPECT_THROW(simulate_increments(grid, sto, 390, 20, 0), ConfigError);
}

TEST(SimkitTest, ReplicationsAreIndependentStreams) {
    const GridConfig grid{100, 2, 1};
    const Matrix a = simulate_increments(grid, sin_model(1.0, 0.0), 0, 100, 0);
    const Matrix b = simulate_increments(grid, sin_model(1.0, 0.0), 0, 100, 1);
    EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 0.0);
    // Coordinates draw from different substreams too.
    EXPECT_GT((a.row(0) - a.row(1)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimkitTest, PiecewiseAlternativeLayout) {
    const VolModel m = make_piecewise_alternative(34, 0.75, 0.0009, 0.0004, 0.0002);
    ASSERT_EQ(m.diag.size(), 34u);
    // floor(0.75 * 34) = 25
    EXPECT_EQ(m.diag[24], 0.0009);
    EXPECT_EQ(m.diag[25], 0.0004);
    EXPECT_EQ(m.r1, 0.0002);
    EXPECT_THROW(make_piecewise_alternative(34, 1.0, 0.0009, 0.0004, 0.0), ConfigError);
}

TEST(SimkitTest, DiagonalModelPerCoordinateVariance) {
    VolModel m;
    m.kind = VolKind::ConstantDiag;
    m.diag = {1.0, 4.0};
    const std::size_t n = 20000;
    const Matrix incr = simulate_increments({n, 2, 8}, m, 0, n);
    const double v0 = incr.row(0).squaredNorm();
    const double v1 = incr.row(1).squaredNorm();
    // Realized variance over [0,1]; standard error sqrt(2/n) relative.
    EXPECT_NEAR(v0, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(v1, 4.0, 4.0 * 5.0 * std::sqrt(2.0 / n));
}

TEST(SimkitTest, CsvRoundTrip) {
    const auto path = simulate_path({10, 2, 3}, sin_model(0.0009, 0.0));
    std::stringstream ss;
    write_path_csv(ss, path);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,x1,x2");
    const auto back = read_path_csv(ss);
    EXPECT_EQ(back.steps(), 10u);
    EXPECT_EQ(back.dim(), 2u);
    EXPECT_TRUE((back.values.array() == path.values.array()).all());
}

}  // namespace
}  // namespace spotvol::sim
