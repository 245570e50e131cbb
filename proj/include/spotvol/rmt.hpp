#pragma once

// Marcenko-Pastur law and the Silverstein fixed-point equation.
//
// MP law with ratio index y and scale index sigma2 has support [a, b],
//   a = sigma2 (1 - sqrt y)^2,  b = sigma2 (1 + sqrt y)^2,
// density (2 pi sigma2 x y)^-1 sqrt((b - x)(x - a)) on [a, b] and, for y > 1,
// an atom of mass 1 - 1/y at the origin.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace spotvol::rmt {

using Complex = std::complex<double>;

class MPLaw {
public:
    // Throws ConfigError unless y > 0 and sigma2 > 0 (both finite).
    MPLaw(double y, double sigma2);

    double y() const { return y_; }
    double sigma2() const { return sigma2_; }
    double a() const { return a_; }
    double b() const { return b_; }
    // Mass of the atom at 0, max(1 - 1/y, 0).
    double atom() const { return y_ > 1.0 ? 1.0 - 1.0 / y_ : 0.0; }

private:
    double y_;
    double sigma2_;
    double a_;
    double b_;
};

// Absolutely continuous part only; the atom is reported by MPLaw::atom().
double mp_pdf(double x, const MPLaw& law);

// atom 1{x >= 0} + int_a^min(x,b) pdf, by adaptive Gauss-Kronrod quadrature
// after the substitution x = a + (b - a) sin^2(theta), which removes the
// square-root endpoint behaviour. Absolute tolerance 1e-10.
double mp_cdf(double x, const MPLaw& law);

// Smallest x with mp_cdf(x) >= u, by bisection. u in (0, 1).
double mp_quantile(double u, const MPLaw& law);

// Rows `x,mp_cdf` on `points` equally spaced abscissae over [lo, hi].
void write_mp_cdf_csv(std::ostream& out, const MPLaw& law, double lo, double hi, std::size_t points);

// Discrete population spectral distribution H = sum_j w_j delta_{t_j}.
struct DiscreteH {
    std::vector<double> support;
    std::vector<double> weights;

    static DiscreteH point_mass(double at);
    void validate() const;
};

struct StieltjesPoint {
    Complex z;
    Complex m;        // Stieltjes transform of F^{y,H}
    Complex m_under;  // companion transform of y F^{y,H} + (1 - y) delta_0
    std::size_t iterations = 0;
    double residual = 0.0;
};

struct SilversteinOptions {
    double damping = 0.5;
    double fallback_damping = 0.25;
    double step_tolerance = 1e-12;
    double residual_tolerance = 1e-10;
    std::size_t max_iterations = 10000;
};

// Solves z = -1/m_ + y sum_j w_j t_j / (1 + t_j m_) for the companion
// transform m_ by damped fixed-point iteration started at -1/z, then
// recovers m from m_ = -(1 - y)/z + y m. The returned point satisfies
//   m = sum_j w_j / (t_j (1 - y - y z m) - z)
// to within residual_tolerance.
//
// Throws ConfigError for Im z <= 0, y <= 0 or an H concentrated at zero;
// NumericalError when the iteration stalls or leaves the upper half-plane
// under both damping factors.
StieltjesPoint solve_silverstein(Complex z, double y, const DiscreteH& h,
                                 const SilversteinOptions& options = {});

// Centering and scaling of the identity-test statistic under the MP law
// with ratio index z_n and scale 1, for g(x) = x - log x - 1.
struct LssConstants {
    double center;      // F^{z_n}(g) = 1 + (1/z_n - 1) log(1 - z_n)
    double mean_shift;  // m(g) = -log(1 - z_n) / 2
    double variance;    // v(g) = -2 log(1 - z_n) - 2 z_n
};

// Throws ConfigError unless 0 < z_n < 1.
LssConstants mp_lss_constants(double z_n);

}  // namespace spotvol::rmt
