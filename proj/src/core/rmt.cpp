#include "spotvol/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::rmt {

namespace {

constexpr double kQuadratureTolerance = 1e-10;

struct UnitEdges {
    double a;
    double b;
};

UnitEdges unit_edges(double y) {
    const double r = std::sqrt(y);
    return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

// Density of the unit-scale law.
double unit_pdf(double u, double y) {
    const auto [a, b] = unit_edges(y);
    if (!(u > a && u < b)) return 0.0;
    return std::sqrt((b - u) * (u - a)) / (2.0 * std::numbers::pi * u * y);
}

// Mass of the continuous part on [a, u] for the unit-scale law, a < u < b.
double unit_continuous_mass(double u, double y) {
    const auto [a, b] = unit_edges(y);
    const double w = b - a;
    const double theta_max = std::asin(std::sqrt(std::clamp((u - a) / w, 0.0, 1.0)));
    auto integrand = [&](double theta) {
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        const double x = a + w * s * s;
        if (x <= 0.0) return w * c * c / (std::numbers::pi * y);  // a == 0 limit
        return w * w * s * s * c * c / (std::numbers::pi * y * x);
    };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, 0.0, theta_max, 12, 1e-13, &error);
    if (!(error <= kQuadratureTolerance)) {
        throw NumericalError("mp_cdf: quadrature error estimate " + csv::format_double(error) +
                             " above tolerance");
    }
    return value;
}

double unit_cdf(double u, double y) {
    if (u < 0.0) return 0.0;
    const auto [a, b] = unit_edges(y);
    if (u >= b) return 1.0;
    const double atom = y > 1.0 ? 1.0 - 1.0 / y : 0.0;
    if (u <= a) return atom;
    return std::min(1.0, atom + unit_continuous_mass(u, y));
}

}  // namespace

MPLaw::MPLaw(double y, double sigma2) : y_(y), sigma2_(sigma2) {
    if (!(std::isfinite(y) && y > 0.0)) throw ConfigError("MP law: ratio index y must be > 0");
    if (!(std::isfinite(sigma2) && sigma2 > 0.0)) throw ConfigError("MP law: scale index must be > 0");
    const auto [a, b] = unit_edges(y);
    a_ = sigma2 * a;
    b_ = sigma2 * b;
}

double mp_pdf(double x, const MPLaw& law) {
    return unit_pdf(x / law.sigma2(), law.y()) / law.sigma2();
}

double mp_cdf(double x, const MPLaw& law) {
    return unit_cdf(x / law.sigma2(), law.y());
}

double mp_quantile(double u, const MPLaw& law) {
    if (!(u > 0.0 && u < 1.0)) throw ConfigError("mp_quantile: level must lie in (0,1)");
    if (u <= law.atom()) return 0.0;
    double lo = law.a();
    double hi = law.b();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mp_cdf(mid, law) >= u) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

void write_mp_cdf_csv(std::ostream& out, const MPLaw& law, double lo, double hi, std::size_t points) {
    if (points < 2 || !(hi > lo)) throw ConfigError("mp cdf table: need points >= 2 and hi > lo");
    out << "x,mp_cdf\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        out << csv::format_double(x) << ',' << csv::format_double(mp_cdf(x, law)) << '\n';
    }
}

DiscreteH DiscreteH::point_mass(double at) {
    return DiscreteH{{at}, {1.0}};
}

void DiscreteH::validate() const {
    if (support.empty() || support.size() != weights.size()) {
        throw ConfigError("H: support and weights must be nonempty and of equal length");
    }
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (!(std::isfinite(support[j]) && support[j] >= 0.0)) throw ConfigError("H: support must be >= 0");
        if (!(std::isfinite(weights[j]) && weights[j] >= 0.0)) throw ConfigError("H: weights must be >= 0");
        total += weights[j];
        mean += weights[j] * support[j];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("H: weights must sum to 1");
    if (!(mean > 0.0)) throw ConfigError("H: degenerate point mass at zero");
}

namespace {

struct Silverstein {
    Complex z;
    double y;
    const DiscreteH& h;

    // y sum w t / (1 + t m_)
    Complex population_term(Complex mu) const {
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < h.support.size(); ++j) {
            acc += h.weights[j] * h.support[j] / (1.0 + h.support[j] * mu);
        }
        return y * acc;
    }

    Complex map(Complex mu) const { return -1.0 / (z - population_term(mu)); }

    Complex companion_to_m(Complex mu) const { return (mu + (1.0 - y) / z) / y; }

    double residual(Complex m) const {
        Complex rhs{0.0, 0.0};
        for (std::size_t j = 0; j < h.support.size(); ++j) {
            rhs += h.weights[j] / (h.support[j] * (1.0 - y - y * z * m) - z);
        }
        return std::abs(m - rhs);
    }

    // Newton step on f(m_) = -1/m_ + y sum w t/(1 + t m_) - z.
    Complex newton(Complex mu) const {
        Complex deriv = 1.0 / (mu * mu);
        for (std::size_t j = 0; j < h.support.size(); ++j) {
            const Complex d = 1.0 + h.support[j] * mu;
            deriv -= y * h.weights[j] * h.support[j] * h.support[j] / (d * d);
        }
        const Complex f = -1.0 / mu + population_term(mu) - z;
        return mu - f / deriv;
    }
};

bool usable(Complex mu) {
    return std::isfinite(mu.real()) && std::isfinite(mu.imag()) && mu.imag() > 0.0;
}

}  // namespace

StieltjesPoint solve_silverstein(Complex z, double y, const DiscreteH& h, const SilversteinOptions& options) {
    if (!(std::isfinite(z.real()) && std::isfinite(z.imag()) && z.imag() > 0.0)) {
        throw ConfigError("solve_silverstein: z must lie in the upper half-plane");
    }
    if (!(std::isfinite(y) && y > 0.0)) throw ConfigError("solve_silverstein: y must be > 0");
    h.validate();

    const Silverstein eq{z, y, h};
    std::size_t total_iterations = 0;

    for (const double damping : {options.damping, options.fallback_damping}) {
        Complex mu = -1.0 / z;
        bool converged = false;
        bool escaped = false;
        for (std::size_t it = 0; it < options.max_iterations; ++it) {
            const Complex next = (1.0 - damping) * mu + damping * eq.map(mu);
            ++total_iterations;
            if (!usable(next)) {
                escaped = true;
                break;
            }
            const double step = std::abs(next - mu);
            mu = next;
            if (step < options.step_tolerance) {
                converged = true;
                break;
            }
        }
        if (escaped) continue;
        if (!converged) {
            throw NumericalError("solve_silverstein: no convergence within " +
                                 std::to_string(options.max_iterations) + " iterations");
        }

        Complex m = eq.companion_to_m(mu);
        double res = eq.residual(m);
        // Slow contraction near the support leaves the stopped iterate short
        // of the residual target; a few Newton steps finish it.
        for (int polish = 0; polish < 20 && res >= options.residual_tolerance; ++polish) {
            const Complex next = eq.newton(mu);
            if (!usable(next)) break;
            mu = next;
            m = eq.companion_to_m(mu);
            res = eq.residual(m);
        }
        if (!(res < options.residual_tolerance)) {
            throw NumericalError("solve_silverstein: residual " + csv::format_double(res) +
                                 " above tolerance");
        }
        if (!(m.imag() > 0.0)) throw NumericalError("solve_silverstein: m(z) left the upper half-plane");
        return StieltjesPoint{z, m, mu, total_iterations, res};
    }
    throw NumericalError("solve_silverstein: iterate left the upper half-plane under both damping factors");
}

LssConstants mp_lss_constants(double z_n) {
    if (!(std::isfinite(z_n) && z_n > 0.0 && z_n < 1.0)) {
        throw ConfigError("mp_lss_constants: z_n must lie in (0,1), got " + csv::format_double(z_n));
    }
    const double log1mz = std::log1p(-z_n);
    return LssConstants{
        1.0 + (1.0 / z_n - 1.0) * log1mz,
        -0.5 * log1mz,
        -2.0 * log1mz - 2.0 * z_n,
    };
}

}  // namespace spotvol::rmt
