#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "spotvol/errors.hpp"
#include "spotvol/rmt.hpp"

namespace spotvol::rmt {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Root of y z m^2 + (z + y - 1) m + 1 = 0 in the upper half-plane:
// the MP Stieltjes transform with H = delta_1.
Complex mp_stieltjes_closed_form(Complex z, double y) {
    const Complex a = y * z;
    const Complex b = z + y - 1.0;
    const Complex disc = std::sqrt(b * b - 4.0 * a);
    const Complex r1 = (-b + disc) / (2.0 * a);
    const Complex r2 = (-b - disc) / (2.0 * a);
    return r1.imag() > 0.0 ? r1 : r2;
}

TEST(RmtTest, FrozenEdges) {
    const MPLaw law(0.5, 1.0);
    EXPECT_NEAR(law.a(), 0.085786437626904951, 1e-15);
    EXPECT_NEAR(law.b(), 2.9142135623730950, 1e-15);
    EXPECT_EQ(law.atom(), 0.0);
    EXPECT_DOUBLE_EQ(MPLaw(2.0, 1.0).atom(), 0.5);
    EXPECT_THROW(MPLaw(0.0, 1.0), ConfigError);
    EXPECT_THROW(MPLaw(0.5, -1.0), ConfigError);
}

TEST(RmtTest, FrozenCdfAtOne) {
    EXPECT_NEAR(mp_cdf(1.0, MPLaw(0.5, 1.0)), 0.57600421510386856, 1e-10);
}

TEST(RmtTest, CdfAgreesWithTanhSinh) {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double y : {0.1, 0.5, 0.9, 1.5}) {
        const MPLaw law(y, 1.0);
        for (double frac : {0.1, 0.37, 0.5, 0.82}) {
            const double x = law.a() + frac * (law.b() - law.a());
            const double integral = ts.integrate([&](double u) { return mp_pdf(u, law); }, law.a(), x);
            EXPECT_NEAR(mp_cdf(x, law), law.atom() + integral, 1e-9) << "y=" << y << " x=" << x;
        }
    }
}

TEST(RmtTest, CdfShape) {
    const MPLaw law(0.3, 2.0);
    EXPECT_EQ(mp_cdf(law.a() - 1e-9, law), 0.0);
    EXPECT_NEAR(mp_cdf(law.b(), law), 1.0, 1e-10);
    EXPECT_EQ(mp_cdf(law.b() + 1.0, law), 1.0);
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = law.a() + (law.b() - law.a()) * i / 200.0;
        const double f = mp_cdf(x, law);
        EXPECT_GE(f, prev - 1e-12);
        prev = f;
    }
    const MPLaw wide(2.0, 1.0);
    EXPECT_NEAR(mp_cdf(0.0, wide), 0.5, 1e-15);
    EXPECT_EQ(mp_cdf(-1e-12, wide), 0.0);
}

TEST(RmtTest, ScaleEquivariance) {
    const MPLaw unit(0.4, 1.0);
    const MPLaw scaled(0.4, 3.7);
    for (double x : {0.2, 0.7, 1.1, 1.9, 2.4}) {
        EXPECT_NEAR(mp_cdf(3.7 * x, scaled), mp_cdf(x, unit), 1e-14);
    }
}

TEST(RmtTest, QuantileInvertsCdf) {
    const MPLaw law(0.5, 1.0);
    for (double u : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        EXPECT_NEAR(mp_cdf(mp_quantile(u, law), law), u, 1e-9);
    }
}

TEST(RmtTest, FrozenLssConstants) {
    const auto c = mp_lss_constants(0.5);
    EXPECT_NEAR(c.center, 0.30685281944005469, 1e-15);
    EXPECT_NEAR(c.mean_shift, 0.34657359027997265, 1e-15);
    EXPECT_NEAR(c.variance, 0.38629436111989062, 1e-15);
    EXPECT_THROW(mp_lss_constants(1.0), ConfigError);
    EXPECT_THROW(mp_lss_constants(0.0), ConfigError);
}

TEST(RmtTest, CenterMatchesQuadrature) {
    const std::pair<double, double> frozen[] = {
        {0.1, 0.051755359079563289}, {0.3, 0.16775846414295778}, {0.9, 0.74415721188955048}};
    boost::math::quadrature::tanh_sinh<double> ts;
    for (const auto& [y, value] : frozen) {
        const MPLaw law(y, 1.0);
        const double integral = ts.integrate(
            [&](double x) { return (x - std::log(x) - 1.0) * mp_pdf(x, law); }, law.a(), law.b());
        EXPECT_NEAR(mp_lss_constants(y).center, value, 1e-14);
        EXPECT_NEAR(integral, value, 1e-9);
    }
}

TEST(RmtTest, SilversteinFrozenPoint) {
    const auto pt = solve_silverstein({1.0, 1.0}, 0.5, DiscreteH::point_mass(1.0));
    EXPECT_NEAR(pt.m.real(), -0.056066469739372970, 1e-10);
    EXPECT_NEAR(pt.m.imag(), 0.74072889552085669, 1e-10);
    EXPECT_LT(pt.residual, 1e-10);
}

TEST(RmtTest, SilversteinMatchesClosedForm) {
    int checked = 0;
    for (double y : {0.2, 0.5, 0.8, 1.5, 3.0}) {
        for (double re : {-0.5, 0.3, 1.0, 2.5, 5.0}) {
            for (double im : {0.05, 1.0}) {
                const Complex z(re, im);
                const auto pt = solve_silverstein(z, y, DiscreteH::point_mass(1.0));
                const Complex expected = mp_stieltjes_closed_form(z, y);
                EXPECT_LT(std::abs(pt.m - expected), 1e-8 * std::max(1.0, std::abs(expected)))
                    << "y=" << y << " z=" << re << "+" << im << "i";
                ++checked;
            }
        }
    }
    EXPECT_EQ(checked, 50);
}

TEST(RmtTest, SilversteinHerglotz) {
    DiscreteH h{{0.5, 1.0, 3.0}, {0.2, 0.5, 0.3}};
    for (double re : {-1.0, 0.0, 0.7, 1.5, 4.0}) {
        for (double im : {0.01, 0.3, 2.0}) {
            const auto pt = solve_silverstein({re, im}, 0.4, h);
            EXPECT_GT(pt.m.imag(), 0.0);
            EXPECT_GT((Complex(re, im) * pt.m).imag(), 0.0);
            EXPECT_LT(pt.residual, 1e-10);
        }
    }
}

TEST(RmtTest, InversionRecoversDensity) {
    const MPLaw law(0.5, 1.0);
    for (double frac : {0.2, 0.5, 0.8}) {
        const double x = law.a() + frac * (law.b() - law.a());
        const auto pt = solve_silverstein({x, 1e-5}, 0.5, DiscreteH::point_mass(1.0));
        EXPECT_NEAR(pt.m.imag() / kPi, mp_pdf(x, law), 1e-3);
    }
}

TEST(RmtTest, SilversteinRejectsBadInput) {
    EXPECT_THROW(solve_silverstein({1.0, 0.0}, 0.5, DiscreteH::point_mass(1.0)), ConfigError);
    EXPECT_THROW(solve_silverstein({1.0, 1.0}, 0.0, DiscreteH::point_mass(1.0)), ConfigError);
    EXPECT_THROW(solve_silverstein({1.0, 1.0}, 0.5, DiscreteH::point_mass(0.0)), ConfigError);
    EXPECT_THROW(solve_silverstein({1.0, 1.0}, 0.5, DiscreteH{{1.0}, {0.5}}), ConfigError);
}

}  // namespace
}  // namespace spotvol::rmt
