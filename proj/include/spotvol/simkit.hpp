#pragma once

// Simulation of discretely observed multivariate log-price paths
//
//   X_t = X_0 + int_0^t b ds + int_0^t sigma_{s-} dB_s
//
// on the equidistant grid {i/n : i = 0..n}. All shipped volatility models
// are diagonal (sigma_t is a diagonal p x p matrix, B is p-dimensional).
//
// Randomness comes from one substream per (replication, coordinate), each
// keyed off the master seed, so a replication's draws never depend on which
// thread produced them.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "spotvol/types.hpp"

namespace spotvol::sim {

struct GridConfig {
    std::size_t n = 4680;
    std::size_t p = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class VolKind {
    DeterministicSin,  // c_t = (base + r1 sin 2 pi t) I_p
    StochasticBM,      // sigma_t = (sqrt(base) + r2 W_t) I_p, W independent of B
    ConstantDiag,      // c_t = diag(d)
    PiecewiseDiag,     // c_t = diag(d) + r1 sin(2 pi t) I_p
};

struct VolModel {
    VolKind kind = VolKind::DeterministicSin;
    double base = 0.0009;
    double r1 = 0.0;
    double r2 = 0.0;
    std::vector<double> diag;
    // Constant drift per unit time, applied to every coordinate. Off by default.
    double drift = 0.0;

    void validate(std::size_t p) const;

    // Per-coordinate level of the diagonal models, or `base` otherwise.
    double level(std::size_t coord) const;
};

// diag(base I_floor(s p), low I_(p - floor(s p))) with the sine modulation r1.
VolModel make_piecewise_alternative(std::size_t p, double s, double base, double low, double r1);

const char* to_string(VolKind kind);
VolKind vol_kind_from_string(const std::string& name);

struct PricePath {
    std::vector<double> grid;  // i/n, i = 0..n
    Matrix values;             // p x (n+1)
    VolModel model;
    GridConfig config;

    std::size_t dim() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t steps() const { return static_cast<std::size_t>(values.cols()) - 1; }
};

// Engine for substream `stream` of replication `replication`.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream);

// Mean of base + r1 sin(2 pi s) over [(i-1)/n, i/n], in closed form.
double mean_sin_variance(double base, double r1, std::size_t i, std::size_t n);

// Increments Delta_i X for i = first+1 .. first+count (columns, p rows).
// Column j of the result is bit-identical to column first+j of the
// increments a full path of the same replication would produce.
Matrix simulate_increments(const GridConfig& config, const VolModel& model, std::size_t first,
                           std::size_t count, std::uint64_t replication = 0);

PricePath simulate_path(const GridConfig& config, const VolModel& model,
                        std::uint64_t replication = 0);

// p x n matrix with column i-1 equal to X_{i/n} - X_{(i-1)/n}.
Matrix increments(const PricePath& path);

// Header `t,x1,...,xp`, one row per grid point.
void write_path_csv(std::ostream& out, const PricePath& path);

// Reads a path written by write_path_csv. Model metadata is not stored in
// the file; the returned path carries n and p only.
PricePath read_path_csv(std::istream& in);

}  // namespace spotvol::sim
