#include "spotvol/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::spectra {

SpectralSample eigenvalues_sym(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw ConfigError("eigenvalues_sym: need a nonempty square matrix");
    if (!a.allFinite()) throw NumericalError("eigenvalues_sym: matrix has non-finite entries");
    const double amax = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * amax) {
        throw ConfigError("eigenvalues_sym: matrix is not symmetric (max |A - A^T| = " +
                          csv::format_double(asym) + ")");
    }
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues_sym: eigensolver did not converge");

    const auto& ev = solver.eigenvalues();  // ascending
    const double norm2 = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    const double band = kPsdTolerance * norm2;
    SpectralSample s;
    s.source_dim = static_cast<std::size_t>(a.rows());
    s.eigenvalues.resize(s.source_dim);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double v = ev(i);
        if (v < -band) {
            throw NumericalError("eigenvalues_sym: eigenvalue " + csv::format_double(v) +
                                 " violates positive semidefiniteness");
        }
        // Round-off on either side of a null direction.
        if (v <= band) v = 0.0;
        s.eigenvalues[s.source_dim - 1 - static_cast<std::size_t>(i)] = v;
    }
    return s;
}

SpectralSample from_values(std::vector<double> values) {
    if (values.empty()) throw ConfigError("spectral sample: no eigenvalues");
    std::sort(values.begin(), values.end(), std::greater<>());
    SpectralSample s;
    s.source_dim = values.size();
    s.eigenvalues = std::move(values);
    return s;
}

double esd_eval(const SpectralSample& s, double x) {
    // Nonincreasing order: [it, end) holds exactly the eigenvalues <= x.
    const auto& ev = s.eigenvalues;
    auto it = std::lower_bound(ev.begin(), ev.end(), x, std::greater<>());
    const auto count = static_cast<double>(ev.end() - it);
    return count / static_cast<double>(ev.size());
}

double kolmogorov_distance(const SpectralSample& s, const std::function<double(double)>& cdf) {
    const auto& ev = s.eigenvalues;
    const double p = static_cast<double>(ev.size());
    double sup = 0.0;
    // Walk jump points in ascending order.
    std::size_t below = 0;  // eigenvalues strictly less than the current point
    std::size_t i = ev.size();
    while (i > 0) {
        const double x = ev[i - 1];
        std::size_t mult = 0;
        while (i > 0 && ev[i - 1] == x) {
            ++mult;
            --i;
        }
        const double left = cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
        const double right = cdf(x);
        sup = std::max(sup, std::abs(static_cast<double>(below) / p - left));
        below += mult;
        sup = std::max(sup, std::abs(static_cast<double>(below) / p - right));
    }
    return sup;
}

void write_esd_csv(std::ostream& out, const SpectralSample& s) {
    out << "x,esd\n";
    const auto& ev = s.eigenvalues;
    for (std::size_t i = ev.size(); i > 0; --i) {
        if (i > 1 && ev[i - 2] == ev[i - 1]) continue;
        out << csv::format_double(ev[i - 1]) << ',' << csv::format_double(esd_eval(s, ev[i - 1])) << '\n';
    }
}

}  // namespace spotvol::spectra
