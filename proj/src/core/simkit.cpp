#include "spotvol/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"

namespace spotvol::sim {

namespace {

constexpr std::uint64_t kVolDriverStream = ~std::uint64_t{0};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

void GridConfig::validate() const {
    if (n < 2) throw ConfigError("grid: n must be >= 2 (got " + std::to_string(n) + ")");
    if (p < 1) throw ConfigError("grid: p must be >= 1");
}

void VolModel::validate(std::size_t p) const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(base)) throw ConfigError("model: base must be finite and >= 0");
    if (!finite_nonneg(r1)) throw ConfigError("model: r1 must be finite and >= 0");
    if (!finite_nonneg(r2)) throw ConfigError("model: r2 must be finite and >= 0");
    if (!std::isfinite(drift)) throw ConfigError("model: drift must be finite");
    switch (kind) {
        case VolKind::DeterministicSin:
            if (base < r1) throw ConfigError("model: base + r1 sin(2 pi t) goes negative (r1 > base)");
            break;
        case VolKind::StochasticBM:
            break;
        case VolKind::ConstantDiag:
        case VolKind::PiecewiseDiag:
            if (diag.size() != p) {
                throw ConfigError("model: diag has " + std::to_string(diag.size()) +
                                  " entries, expected p = " + std::to_string(p));
            }
            for (double d : diag) {
                if (!finite_nonneg(d)) throw ConfigError("model: diag entries must be finite and >= 0");
                if (kind == VolKind::PiecewiseDiag && d < r1) {
                    throw ConfigError("model: diag entry below r1 makes the variance negative");
                }
            }
            break;
    }
}

double VolModel::level(std::size_t coord) const {
    if (kind == VolKind::ConstantDiag || kind == VolKind::PiecewiseDiag) return diag.at(coord);
    return base;
}

VolModel make_piecewise_alternative(std::size_t p, double s, double base, double low, double r1) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("alternative: s must lie in (0,1)");
    VolModel m;
    m.kind = VolKind::PiecewiseDiag;
    m.base = base;
    m.r1 = r1;
    const auto head = static_cast<std::size_t>(std::floor(s * static_cast<double>(p)));
    m.diag.assign(p, low);
    std::fill(m.diag.begin(), m.diag.begin() + static_cast<std::ptrdiff_t>(head), base);
    return m;
}

const char* to_string(VolKind kind) {
    switch (kind) {
        case VolKind::DeterministicSin: return "deterministic";
        case VolKind::StochasticBM: return "stochastic";
        case VolKind::ConstantDiag: return "constant_diag";
        case VolKind::PiecewiseDiag: return "piecewise_diag";
    }
    return "?";
}

VolKind vol_kind_from_string(const std::string& name) {
    if (name == "deterministic" || name == "det") return VolKind::DeterministicSin;
    if (name == "stochastic" || name == "sto") return VolKind::StochasticBM;
    if (name == "constant_diag") return VolKind::ConstantDiag;
    if (name == "piecewise_diag") return VolKind::PiecewiseDiag;
    throw ConfigError("unknown volatility model '" + name + "'");
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream) {
    std::uint64_t key = splitmix64(seed);
    key = splitmix64(key ^ replication);
    key = splitmix64(key ^ stream);
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

double mean_sin_variance(double base, double r1, std::size_t i, std::size_t n) {
    const double nd = static_cast<double>(n);
    const double two_pi = 2.0 * std::numbers::pi;
    const double lo = two_pi * static_cast<double>(i - 1) / nd;
    const double hi = two_pi * static_cast<double>(i) / nd;
    // (1/dt) int sin(2 pi s) ds = n (cos lo - cos hi) / (2 pi); written via the
    // product form to avoid cancellation for small steps.
    const double avg_sin = nd * 2.0 * std::sin(0.5 * (lo + hi)) * std::sin(0.5 * (hi - lo)) / two_pi;
    return std::max(0.0, base + r1 * avg_sin);
}

Matrix simulate_increments(const GridConfig& config, const VolModel& model, std::size_t first,
                           std::size_t count, std::uint64_t replication) {
    config.validate();
    model.validate(config.p);
    if (first + count > config.n) {
        throw ConfigError("simulate: window end " + std::to_string(first + count) + " exceeds n = " +
                          std::to_string(config.n));
    }
    const std::size_t p = config.p;
    const double dt = 1.0 / static_cast<double>(config.n);
    const double sqrt_dt = std::sqrt(dt);
    const double drift_step = model.drift * dt;

    // Per-step scale common to all coordinates of the scalar models.
    std::vector<double> step_sigma;
    if (model.kind == VolKind::StochasticBM) {
        std::mt19937_64 eng = substream(config.seed, replication, kVolDriverStream);
        std::normal_distribution<double> gauss;
        step_sigma.resize(count);
        const double sigma0 = std::sqrt(model.base);
        double w = 0.0;  // W at the left endpoint of the current step
        for (std::size_t i = 1; i <= first + count; ++i) {
            if (i > first) step_sigma[i - first - 1] = sigma0 + model.r2 * w;
            w += sqrt_dt * gauss(eng);
        }
    }

    Matrix out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(count));
    std::vector<double> scale(count);
    for (std::size_t j = 0; j < p; ++j) {
        if (model.kind == VolKind::StochasticBM) {
            for (std::size_t c = 0; c < count; ++c) scale[c] = step_sigma[c] * sqrt_dt;
        } else {
            const double level = model.level(j);
            const double r1 = model.kind == VolKind::ConstantDiag ? 0.0 : model.r1;
            for (std::size_t c = 0; c < count; ++c) {
                scale[c] = std::sqrt(mean_sin_variance(level, r1, first + c + 1, config.n)) * sqrt_dt;
            }
        }
        std::mt19937_64 eng = substream(config.seed, replication, j);
        std::normal_distribution<double> gauss;
        for (std::size_t i = 0; i < first; ++i) (void)gauss(eng);
        for (std::size_t c = 0; c < count; ++c) {
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
                drift_step + scale[c] * gauss(eng);
        }
    }
    return out;
}

PricePath simulate_path(const GridConfig& config, const VolModel& model, std::uint64_t replication) {
    const Matrix incr = simulate_increments(config, model, 0, config.n, replication);
    PricePath path;
    path.config = config;
    path.model = model;
    path.grid.resize(config.n + 1);
    for (std::size_t i = 0; i <= config.n; ++i) {
        path.grid[i] = static_cast<double>(i) / static_cast<double>(config.n);
    }
    path.values = Matrix::Zero(incr.rows(), incr.cols() + 1);
    for (Eigen::Index i = 0; i < incr.cols(); ++i) {
        path.values.col(i + 1) = path.values.col(i) + incr.col(i);
    }
    return path;
}

Matrix increments(const PricePath& path) {
    const Eigen::Index n = path.values.cols() - 1;
    return path.values.rightCols(n) - path.values.leftCols(n);
}

void write_path_csv(std::ostream& out, const PricePath& path) {
    out << 't';
    for (std::size_t j = 0; j < path.dim(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < path.grid.size(); ++i) {
        out << csv::format_double(path.grid[i]);
        for (Eigen::Index j = 0; j < path.values.rows(); ++j) {
            out << ',' << csv::format_double(path.values(j, static_cast<Eigen::Index>(i)));
        }
        out << '\n';
    }
}

PricePath read_path_csv(std::istream& in) {
    std::vector<std::string> header;
    const Matrix table = csv::read_matrix(in, &header);
    if (table.cols() < 2) throw ConfigError("path csv: need a t column and at least one x column");
    if (table.rows() < 3) throw ConfigError("path csv: need at least 3 grid points");
    PricePath path;
    path.config.n = static_cast<std::size_t>(table.rows() - 1);
    path.config.p = static_cast<std::size_t>(table.cols() - 1);
    path.grid.assign(table.col(0).data(), table.col(0).data() + table.rows());
    for (std::size_t i = 1; i < path.grid.size(); ++i) {
        if (!(path.grid[i] > path.grid[i - 1])) throw ConfigError("path csv: t must be strictly increasing");
    }
    path.values = table.rightCols(table.cols() - 1).transpose();
    return path;
}

}  // namespace spotvol::sim
