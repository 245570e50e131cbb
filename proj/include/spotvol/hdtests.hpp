#pragma once

#include <cstddef>
#include <string>

#include "spotvol/estimators.hpp"
#include "spotvol/spectra.hpp"
#include "spotvol/types.hpp"

namespace spotvol::hdtest {

enum class TestKind { BJYZ, LW, J };

const char* to_string(TestKind kind);
TestKind test_kind_from_string(const std::string& name);

struct TestReport {
    TestKind kind = TestKind::LW;
    double raw = 0.0;     // L_n, W_n or M_n
    double zscore = 0.0;  // asymptotically N(0,1) under the null
    double pvalue = 1.0;  // two-sided
    double z_n = 0.0;
    std::size_t p = 0;
    std::size_t k_n = 0;
};

// 2 (1 - Phi(|z|)).
double two_sided_pvalue(double zscore);

// Identity test from tr - log det - p with Marcenko-Pastur centering.
// ConfigError when z_n >= 1 (the estimator is singular with probability one);
// NumericalError when an eigenvalue is <= 1e-12.
TestReport bjyz_test(const est::SpotEstimate& est);
TestReport bjyz_test(const spectra::SpectralSample& spectrum, std::size_t k_n);

// Ledoit-Wolf identity test; any z_n > 0.
TestReport lw_test(const est::SpotEstimate& est);
TestReport lw_test(const spectra::SpectralSample& spectrum, std::size_t k_n);

// John sphericity test on the trace-normalized matrix; ConfigError on zero trace.
TestReport j_test(const est::SpotEstimate& est);
TestReport j_test(const spectra::SpectralSample& spectrum, std::size_t k_n);

// Trace-form statistics, computed without an eigendecomposition. Used to
// cross-check the spectral route.
double lw_statistic_trace(const Matrix& c, std::size_t k_n);
double j_statistic_trace(const Matrix& c);

// Sigma^{-1/2} through the eigendecomposition, eigenvalues floored at 1e-12.
// Pre-multiplying increments by it turns a test of c_t = Sigma into an
// identity test.
Matrix inverse_sqrt_sym(const Matrix& sigma);

// kind,p,k_n,z_n,raw,zscore,pvalue
std::string csv_header();
std::string to_csv_row(const TestReport& report);

}  // namespace spotvol::hdtest
