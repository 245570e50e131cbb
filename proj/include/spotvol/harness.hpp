#pragma once

// Monte Carlo driver for the spot-volatility spectral tests.
//
// Each replication simulates only the k_n increments of the estimation
// window (the drift-free models make the window's law independent of the
// rest of the path), forms the spot estimate at t, divides it by the null
// scale so that H0 reads c_t / null_scale = I_p, and evaluates all three
// tests on one eigendecomposition. Replications run on `workers` threads;
// every z-score lands in a slot indexed by replication id, so output does
// not depend on scheduling.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spotvol/hdtests.hpp"
#include "spotvol/simkit.hpp"

namespace spotvol::harness {

// diag(null_scale I_floor(s p), low I_(p - floor(s p))) under H1.
struct Alternative {
    double s = 0.75;
    double low = 0.0004;
};

struct MCConfig {
    std::size_t reps = 1000;
    std::size_t n = 4680;
    std::size_t k_n = 68;
    std::vector<std::size_t> p_list{34, 68, 102};
    sim::VolModel model;
    double t = 0.0;
    std::vector<double> levels{0.10, 0.05, 0.01};
    std::optional<Alternative> alternative;
    std::uint64_t seed = 0;
    double null_scale = 0.0009;
    std::size_t workers = 1;
    // Points of the MP cdf grid written next to each ESD.
    std::size_t grid_points = 400;

    void validate() const;
};

// floor(sqrt(n)).
std::size_t default_window(std::size_t n);

// z-scores of one test at one dimension.
struct TestSeries {
    hdtest::TestKind kind;
    std::size_t p = 0;
    double pbar = 0.0;
    // False when the test is undefined at this ratio (BJYZ with z_n >= 1).
    bool available = true;
    std::vector<double> zscores;
    // Aligned with MCConfig::levels.
    std::vector<double> rejection_rates;
};

struct MCSummary {
    MCConfig config;
    std::vector<TestSeries> series;

    const TestSeries* find(hdtest::TestKind kind, std::size_t p) const;
    // Fraction in [0,1]; throws ConfigError for unknown (kind, p, level).
    double rejection_rate(hdtest::TestKind kind, std::size_t p, double level) const;
};

// #{|z| > Phi^{-1}(1 - level/2)} / size.
double rejection_rate(const std::vector<double>& zscores, double level);

double normal_quantile(double u);

// Spot estimate of replication `rep` for dimension p, scaled by 1/null_scale.
est::SpotEstimate simulate_normalized_estimate(const MCConfig& cfg, const sim::VolModel& model,
                                               std::size_t p, std::uint64_t rep);

// Volatility model used for dimension p: cfg.model under H0, the piecewise
// diagonal alternative (with cfg.model.r1) when cfg.alternative is set.
sim::VolModel model_for(const MCConfig& cfg, std::size_t p);

MCSummary run_size_experiment(const MCConfig& cfg);
MCSummary run_power_experiment(const MCConfig& cfg);

// test,level,r1,pbar,rejection_pct   (power adds s after r1)
void write_size_table(std::ostream& out, const std::vector<MCSummary>& runs);
void write_power_table(std::ostream& out, const std::vector<MCSummary>& runs);

struct EsdFigure {
    std::size_t p = 0;
    spectra::SpectralSample spectrum;
    double ks_distance = 0.0;
    std::filesystem::path file;
};

// One replication per p; writes esd_p<p>.csv (x,esd,mp_cdf) into out_dir
// when out_dir is non-empty.
std::vector<EsdFigure> run_esd_figure(const MCConfig& cfg, const std::filesystem::path& out_dir);

struct QQSeries {
    hdtest::TestKind kind;
    std::size_t p = 0;
    double pbar = 0.0;
    std::vector<double> theoretical;
    std::vector<double> empirical;
    double correlation = 0.0;
    std::filesystem::path file;
};

// Plotting positions (i - 0.5)/reps against the sorted z-scores.
QQSeries make_qq(const TestSeries& series);
double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

// Runs the size experiment and writes qq_<test>_<pbar>.csv per available
// series into out_dir when out_dir is non-empty.
std::vector<QQSeries> run_qq_figure(const MCConfig& cfg, const std::filesystem::path& out_dir);

// Flat `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in);

// Applies recognised keys to cfg. Unknown keys raise ConfigError. Keys:
// reps n k_n p_list model base r1 r2 t levels s low seed null_scale workers
// grid_points
void apply_key_values(MCConfig& cfg, const std::map<std::string, std::string>& kv);

std::string format_pbar(double pbar);

}  // namespace spotvol::harness
