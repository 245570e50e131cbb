#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "spotvol/types.hpp"

namespace spotvol::spectra {

// Eigenvalues sorted nonincreasing.
struct SpectralSample {
    std::vector<double> eigenvalues;
    std::size_t source_dim = 0;

    double min() const { return eigenvalues.back(); }
    double max() const { return eigenvalues.front(); }
};

// Relative asymmetry accepted before rejecting the input.
inline constexpr double kSymmetryTolerance = 1e-8;
// Eigenvalues with |lambda| <= kPsdTolerance * ||A||_2 are reported as exact
// zeros; anything below -kPsdTolerance * ||A||_2 is a PSD violation.
inline constexpr double kPsdTolerance = 1e-10;

// Spectrum of (A + A^T)/2 for a symmetric positive semidefinite A.
SpectralSample eigenvalues_sym(const Matrix& a);

SpectralSample from_values(std::vector<double> values);

// F(x) = #{lambda_i <= x} / p.
double esd_eval(const SpectralSample& s, double x);

// sup_x |F^s(x) - cdf(x)|, exact for monotone cdf: both one-sided limits
// are compared at every jump of the ESD.
double kolmogorov_distance(const SpectralSample& s, const std::function<double(double)>& cdf);

// Rows `x,esd` at every jump point (ascending, distinct).
void write_esd_csv(std::ostream& out, const SpectralSample& s);

}  // namespace spotvol::spectra
