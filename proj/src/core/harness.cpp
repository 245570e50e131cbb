#include "spotvol/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/rmt.hpp"
#include "spotvol/spectra.hpp"

namespace spotvol::harness {

using hdtest::TestKind;

void MCConfig::validate() const {
    if (reps == 0) throw ConfigError("mc: reps must be >= 1");
    if (n < 2) throw ConfigError("mc: n must be >= 2");
    if (k_n == 0) throw ConfigError("mc: k_n must be >= 1");
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("mc: t must be >= 0");
    if (est::window_start(t, n) + k_n > n) {
        throw ConfigError("mc: window overruns the sample, floor(t n) + k_n > n");
    }
    for (double level : levels) {
        if (!(level > 0.0 && level < 1.0)) throw ConfigError("mc: levels must lie in (0,1)");
    }
    for (std::size_t p : p_list) {
        if (p == 0) throw ConfigError("mc: p must be >= 1");
    }
    if (!(std::isfinite(null_scale) && null_scale > 0.0)) throw ConfigError("mc: null_scale must be > 0");
    if (workers == 0) throw ConfigError("mc: workers must be >= 1");
    if (alternative) {
        if (!(alternative->s > 0.0 && alternative->s < 1.0)) throw ConfigError("mc: s must lie in (0,1)");
        if (!(alternative->low >= 0.0)) throw ConfigError("mc: low must be >= 0");
    }
    for (std::size_t p : p_list) model_for(*this, p).validate(p);
}

std::size_t default_window(std::size_t n) {
    auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    while ((k + 1) * (k + 1) <= n) ++k;
    while (k * k > n) --k;
    return k;
}

const TestSeries* MCSummary::find(TestKind kind, std::size_t p) const {
    for (const auto& s : series) {
        if (s.kind == kind && s.p == p) return &s;
    }
    return nullptr;
}

double MCSummary::rejection_rate(TestKind kind, std::size_t p, double level) const {
    const TestSeries* s = find(kind, p);
    if (!s || !s->available) {
        throw ConfigError(std::string("mc: no ") + hdtest::to_string(kind) + " series for p = " + std::to_string(p));
    }
    for (std::size_t i = 0; i < config.levels.size(); ++i) {
        if (config.levels[i] == level) return s->rejection_rates[i];
    }
    throw ConfigError("mc: level " + csv::format_double(level) + " was not run");
}

double normal_quantile(double u) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

double rejection_rate(const std::vector<double>& zscores, double level) {
    if (zscores.empty()) return 0.0;
    const double critical = normal_quantile(1.0 - level / 2.0);
    const auto rejected = std::count_if(zscores.begin(), zscores.end(),
                                        [&](double z) { return std::abs(z) > critical; });
    return static_cast<double>(rejected) / static_cast<double>(zscores.size());
}

sim::VolModel model_for(const MCConfig& cfg, std::size_t p) {
    if (!cfg.alternative) return cfg.model;
    return sim::make_piecewise_alternative(p, cfg.alternative->s, cfg.null_scale, cfg.alternative->low,
                                           cfg.model.r1);
}

est::SpotEstimate simulate_normalized_estimate(const MCConfig& cfg, const sim::VolModel& model,
                                               std::size_t p, std::uint64_t rep) {
    const sim::GridConfig grid{cfg.n, p, cfg.seed};
    const std::size_t start = est::window_start(cfg.t, cfg.n);
    const Matrix window = sim::simulate_increments(grid, model, start, cfg.k_n, rep);
    est::SpotEstimate estimate = est::spot_vol_from_window(window, cfg.n, cfg.t);
    estimate.matrix /= cfg.null_scale;
    return estimate;
}

namespace {

// Runs body(rep) for every replication on cfg.workers threads.
template <typename Body>
void for_each_replication(std::size_t reps, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, reps));
    if (workers == 1) {
        for (std::size_t r = 0; r < reps; ++r) body(r);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t r = w; r < reps; r += workers) body(r);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

MCSummary run_experiment(const MCConfig& cfg) {
    cfg.validate();
    MCSummary summary;
    summary.config = cfg;
    for (std::size_t p : cfg.p_list) {
        const sim::VolModel model = model_for(cfg, p);
        const double pbar = static_cast<double>(p) / static_cast<double>(cfg.k_n);
        const bool bjyz_ok = pbar < 1.0;

        std::vector<double> bjyz(bjyz_ok ? cfg.reps : 0);
        std::vector<double> lw(cfg.reps);
        std::vector<double> john(cfg.reps);
        for_each_replication(cfg.reps, cfg.workers, [&](std::size_t r) {
            const auto estimate = simulate_normalized_estimate(cfg, model, p, r);
            const auto spectrum = spectra::eigenvalues_sym(estimate.matrix);
            if (bjyz_ok) bjyz[r] = hdtest::bjyz_test(spectrum, cfg.k_n).zscore;
            lw[r] = hdtest::lw_test(spectrum, cfg.k_n).zscore;
            john[r] = hdtest::j_test(spectrum, cfg.k_n).zscore;
        });

        auto add = [&](TestKind kind, std::vector<double> z, bool available) {
            TestSeries s;
            s.kind = kind;
            s.p = p;
            s.pbar = pbar;
            s.available = available;
            s.zscores = std::move(z);
            if (available) {
                for (double level : cfg.levels) s.rejection_rates.push_back(rejection_rate(s.zscores, level));
            }
            summary.series.push_back(std::move(s));
        };
        add(TestKind::BJYZ, std::move(bjyz), bjyz_ok);
        add(TestKind::LW, std::move(lw), true);
        add(TestKind::J, std::move(john), true);
    }
    return summary;
}

std::string format_general(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string format_pct(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * rate);
    return buf;
}

void write_table(std::ostream& out, const std::vector<MCSummary>& runs, bool with_s) {
    out << "test,level,r1," << (with_s ? "s," : "") << "pbar,rejection_pct\n";
    for (const auto& run : runs) {
        for (std::size_t li = 0; li < run.config.levels.size(); ++li) {
            for (const auto& s : run.series) {
                out << hdtest::to_string(s.kind) << ',' << format_general(run.config.levels[li]) << ','
                    << format_general(run.config.model.r1) << ',';
                if (with_s) out << format_general(run.config.alternative ? run.config.alternative->s : 0.0) << ',';
                out << format_pbar(s.pbar) << ',' << (s.available ? format_pct(s.rejection_rates[li]) : "NA")
                    << '\n';
            }
        }
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw IoError("write to " + path.string() + " failed");
}

}  // namespace

MCSummary run_size_experiment(const MCConfig& cfg) {
    if (cfg.alternative) throw ConfigError("mc-size: alternative must be absent");
    return run_experiment(cfg);
}

MCSummary run_power_experiment(const MCConfig& cfg) {
    if (!cfg.alternative) throw ConfigError("mc-power: alternative (s, low) is required");
    return run_experiment(cfg);
}

std::string format_pbar(double pbar) {
    return format_general(pbar);
}

void write_size_table(std::ostream& out, const std::vector<MCSummary>& runs) {
    write_table(out, runs, false);
}

void write_power_table(std::ostream& out, const std::vector<MCSummary>& runs) {
    write_table(out, runs, true);
}

std::vector<EsdFigure> run_esd_figure(const MCConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::vector<EsdFigure> figures;
    for (std::size_t p : cfg.p_list) {
        const auto estimate = simulate_normalized_estimate(cfg, model_for(cfg, p), p, 0);
        EsdFigure fig;
        fig.p = p;
        fig.spectrum = spectra::eigenvalues_sym(estimate.matrix);
        const rmt::MPLaw law(estimate.z_n, 1.0);
        auto cdf = [&](double x) { return rmt::mp_cdf(x, law); };
        fig.ks_distance = spectra::kolmogorov_distance(fig.spectrum, cdf);

        if (!out_dir.empty()) {
            std::vector<double> xs(fig.spectrum.eigenvalues.begin(), fig.spectrum.eigenvalues.end());
            const double hi = 1.05 * std::max(law.b(), fig.spectrum.max());
            const std::size_t g = std::max<std::size_t>(cfg.grid_points, 2);
            for (std::size_t i = 0; i < g; ++i) {
                xs.push_back(hi * static_cast<double>(i) / static_cast<double>(g - 1));
            }
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            std::ostringstream os;
            os << "x,esd,mp_cdf\n";
            for (double x : xs) {
                os << csv::format_double(x) << ',' << csv::format_double(spectra::esd_eval(fig.spectrum, x)) << ','
                   << csv::format_double(cdf(x)) << '\n';
            }
            fig.file = out_dir / ("esd_p" + std::to_string(p) + ".csv");
            write_file(fig.file, os.str());
        }
        figures.push_back(std::move(fig));
    }
    return figures;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("correlation: need two equal-length samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

QQSeries make_qq(const TestSeries& series) {
    QQSeries qq;
    qq.kind = series.kind;
    qq.p = series.p;
    qq.pbar = series.pbar;
    qq.empirical = series.zscores;
    std::sort(qq.empirical.begin(), qq.empirical.end());
    const double reps = static_cast<double>(qq.empirical.size());
    qq.theoretical.resize(qq.empirical.size());
    for (std::size_t i = 0; i < qq.empirical.size(); ++i) {
        qq.theoretical[i] = normal_quantile((static_cast<double>(i) + 0.5) / reps);
    }
    qq.correlation = qq.empirical.size() >= 2 ? pearson_correlation(qq.theoretical, qq.empirical) : 0.0;
    return qq;
}

std::vector<QQSeries> run_qq_figure(const MCConfig& cfg, const std::filesystem::path& out_dir) {
    const MCSummary summary = run_experiment(cfg);
    std::vector<QQSeries> out;
    for (const auto& s : summary.series) {
        if (!s.available) continue;
        QQSeries qq = make_qq(s);
        if (!out_dir.empty()) {
            std::string name = hdtest::to_string(s.kind);
            std::ostringstream os;
            os << "theoretical,empirical\n";
            for (std::size_t i = 0; i < qq.empirical.size(); ++i) {
                os << csv::format_double(qq.theoretical[i]) << ',' << csv::format_double(qq.empirical[i]) << '\n';
            }
            qq.file = out_dir / ("qq_" + name + "_" + format_pbar(s.pbar) + ".csv");
            write_file(qq.file, os.str());
        }
        out.push_back(std::move(qq));
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
    }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& v, Parse parse) {
    std::vector<T> out;
    for (const auto& cell : csv::split(v)) {
        if (cell.empty()) continue;
        out.push_back(static_cast<T>(parse(key, cell)));
    }
    return out;
}

}  // namespace

void apply_key_values(MCConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, v] : kv) {
        if (key == "reps") cfg.reps = parse_unsigned(key, v);
        else if (key == "n") cfg.n = parse_unsigned(key, v);
        else if (key == "k_n") cfg.k_n = parse_unsigned(key, v);
        else if (key == "p_list" || key == "p") cfg.p_list = parse_list<std::size_t>(key, v, parse_unsigned);
        else if (key == "model") cfg.model.kind = sim::vol_kind_from_string(v);
        else if (key == "base") cfg.model.base = parse_real(key, v);
        else if (key == "r1") cfg.model.r1 = parse_real(key, v);
        else if (key == "r2") cfg.model.r2 = parse_real(key, v);
        else if (key == "t") cfg.t = parse_real(key, v);
        else if (key == "levels") cfg.levels = parse_list<double>(key, v, parse_real);
        else if (key == "seed") cfg.seed = parse_unsigned(key, v);
        else if (key == "null_scale") cfg.null_scale = parse_real(key, v);
        else if (key == "workers") cfg.workers = parse_unsigned(key, v);
        else if (key == "grid_points") cfg.grid_points = parse_unsigned(key, v);
        else if (key == "s") {
            if (!cfg.alternative) cfg.alternative = Alternative{};
            cfg.alternative->s = parse_real(key, v);
        } else if (key == "low") {
            if (!cfg.alternative) cfg.alternative = Alternative{};
            cfg.alternative->low = parse_real(key, v);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
}

}  // namespace spotvol::harness
