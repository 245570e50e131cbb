#include "spotvol/spotvol.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "spotvol/csv.hpp"
#include "spotvol/errors.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/harness.hpp"
#include "spotvol/hdtests.hpp"
#include "spotvol/rmt.hpp"
#include "spotvol/simkit.hpp"
#include "spotvol/spectra.hpp"

struct sv_matrix {
    spotvol::Matrix value;
};

struct sv_path {
    spotvol::sim::PricePath value;
};

struct sv_spot_estimate {
    spotvol::est::SpotEstimate value;
};

struct sv_spectrum {
    spotvol::spectra::SpectralSample value;
};

struct sv_mc_config {
    spotvol::harness::MCConfig value;
};

struct sv_mc_summary {
    spotvol::harness::MCSummary value;
};

namespace {

thread_local std::string g_last_error;

// Caller-side misuse detected inside a guarded body.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

sv_status fail(sv_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Runs body and maps exceptions onto status codes.
template <typename Body>
sv_status guarded(Body&& body) {
    try {
        body();
        g_last_error.clear();
        return SV_OK;
    } catch (const ArgumentError& e) {
        return fail(SV_ERR_ARGUMENT, e.what());
    } catch (const spotvol::ConfigError& e) {
        return fail(SV_ERR_CONFIG, e.what());
    } catch (const spotvol::NumericalError& e) {
        return fail(SV_ERR_NUMERIC, e.what());
    } catch (const spotvol::IoError& e) {
        return fail(SV_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SV_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SV_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SV_ERR_INTERNAL, "unknown error");
    }
}

#define SV_REQUIRE(cond, what)                              \
    do {                                                    \
        if (!(cond)) return fail(SV_ERR_ARGUMENT, (what));  \
    } while (0)

std::ofstream open_out(const char* file) {
    std::ofstream f(file);
    if (!f) throw spotvol::IoError(std::string("cannot open ") + file + " for writing");
    return f;
}

std::ifstream open_in(const char* file) {
    std::ifstream f(file);
    if (!f) throw spotvol::IoError(std::string("cannot open ") + file);
    return f;
}

spotvol::sim::VolModel to_model(const sv_vol_model& m) {
    spotvol::sim::VolModel out;
    switch (m.kind) {
        case SV_VOL_DETERMINISTIC_SIN: out.kind = spotvol::sim::VolKind::DeterministicSin; break;
        case SV_VOL_STOCHASTIC_BM: out.kind = spotvol::sim::VolKind::StochasticBM; break;
        case SV_VOL_CONSTANT_DIAG: out.kind = spotvol::sim::VolKind::ConstantDiag; break;
        case SV_VOL_PIECEWISE_DIAG: out.kind = spotvol::sim::VolKind::PiecewiseDiag; break;
        default: throw spotvol::ConfigError("unknown volatility model kind");
    }
    out.base = m.base;
    out.r1 = m.r1;
    out.r2 = m.r2;
    out.drift = m.drift;
    if (m.diag && m.diag_len) out.diag.assign(m.diag, m.diag + m.diag_len);
    return out;
}

spotvol::hdtest::TestKind to_kind(sv_test_kind k) {
    switch (k) {
        case SV_TEST_BJYZ: return spotvol::hdtest::TestKind::BJYZ;
        case SV_TEST_LW: return spotvol::hdtest::TestKind::LW;
        case SV_TEST_J: return spotvol::hdtest::TestKind::J;
    }
    throw spotvol::ConfigError("unknown test kind");
}

sv_test_kind from_kind(spotvol::hdtest::TestKind k) {
    switch (k) {
        case spotvol::hdtest::TestKind::BJYZ: return SV_TEST_BJYZ;
        case spotvol::hdtest::TestKind::LW: return SV_TEST_LW;
        case spotvol::hdtest::TestKind::J: return SV_TEST_J;
    }
    return SV_TEST_LW;
}

}  // namespace

namespace {

template <typename Writer>
sv_status write_tables(const sv_mc_summary* const* runs, size_t count, const char* file, Writer writer) {
    SV_REQUIRE(file && (runs || count == 0), "NULL argument");
    return guarded([&] {
        std::vector<spotvol::harness::MCSummary> all;
        for (size_t i = 0; i < count; ++i) {
            if (!runs[i]) throw spotvol::ConfigError("NULL summary in table");
            all.push_back(runs[i]->value);
        }
        auto f = open_out(file);
        writer(f, all);
        if (!f) throw spotvol::IoError(std::string("write to ") + file + " failed");
    });
}

}  // namespace

extern "C" {

const char* sv_last_error(void) {
    return g_last_error.c_str();
}

const char* sv_version(void) {
    return "1.0.0";
}

// ---- matrices

sv_status sv_matrix_create(size_t rows, size_t cols, const double* data, sv_matrix** out) {
    SV_REQUIRE(out, "out is NULL");
    return guarded([&] {
        auto m = std::make_unique<sv_matrix>();
        m->value = spotvol::Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        if (data) {
            for (size_t i = 0; i < rows; ++i) {
                for (size_t j = 0; j < cols; ++j) {
                    m->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
                }
            }
        }
        *out = m.release();
    });
}

void sv_matrix_free(sv_matrix* m) {
    delete m;
}

size_t sv_matrix_rows(const sv_matrix* m) {
    return m ? static_cast<size_t>(m->value.rows()) : 0;
}

size_t sv_matrix_cols(const sv_matrix* m) {
    return m ? static_cast<size_t>(m->value.cols()) : 0;
}

sv_status sv_matrix_get(const sv_matrix* m, size_t row, size_t col, double* out) {
    SV_REQUIRE(m && out, "NULL argument");
    SV_REQUIRE(row < sv_matrix_rows(m) && col < sv_matrix_cols(m), "index out of range");
    *out = m->value(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    return SV_OK;
}

sv_status sv_matrix_copy(const sv_matrix* m, double* buffer, size_t len) {
    SV_REQUIRE(m && buffer, "NULL argument");
    const size_t rows = sv_matrix_rows(m);
    const size_t cols = sv_matrix_cols(m);
    SV_REQUIRE(len >= rows * cols, "buffer too small");
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) {
            buffer[i * cols + j] = m->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return SV_OK;
}

sv_status sv_matrix_scale(sv_matrix* m, double factor) {
    SV_REQUIRE(m, "NULL matrix");
    m->value *= factor;
    return SV_OK;
}

sv_status sv_matrix_read_csv(const char* path, sv_matrix** out) {
    SV_REQUIRE(path && out, "NULL argument");
    return guarded([&] {
        auto in = open_in(path);
        auto m = std::make_unique<sv_matrix>();
        m->value = spotvol::csv::read_matrix(in);
        *out = m.release();
    });
}

sv_status sv_matrix_write_csv(const sv_matrix* m, const char* path) {
    SV_REQUIRE(m && path, "NULL argument");
    return guarded([&] {
        auto f = open_out(path);
        spotvol::csv::write_matrix(f, m->value);
        if (!f) throw spotvol::IoError(std::string("write to ") + path + " failed");
    });
}

// ---- simulation

sv_vol_model sv_vol_model_default(void) {
    sv_vol_model m{};
    m.kind = SV_VOL_DETERMINISTIC_SIN;
    m.base = 0.0009;
    return m;
}

sv_status sv_simulate_path(const sv_grid_config* config, const sv_vol_model* model, sv_path** out) {
    SV_REQUIRE(config && model && out, "NULL argument");
    return guarded([&] {
        const spotvol::sim::GridConfig grid{config->n, config->p, config->seed};
        auto path = std::make_unique<sv_path>();
        path->value = spotvol::sim::simulate_path(grid, to_model(*model));
        *out = path.release();
    });
}

void sv_path_free(sv_path* path) {
    delete path;
}

size_t sv_path_dim(const sv_path* path) {
    return path ? path->value.dim() : 0;
}

size_t sv_path_steps(const sv_path* path) {
    return path ? path->value.steps() : 0;
}

sv_status sv_path_value(const sv_path* path, size_t coord, size_t step, double* out) {
    SV_REQUIRE(path && out, "NULL argument");
    SV_REQUIRE(coord < sv_path_dim(path) && step <= sv_path_steps(path), "index out of range");
    *out = path->value.values(static_cast<Eigen::Index>(coord), static_cast<Eigen::Index>(step));
    return SV_OK;
}

sv_status sv_path_increments(const sv_path* path, sv_matrix** out) {
    SV_REQUIRE(path && out, "NULL argument");
    return guarded([&] {
        auto m = std::make_unique<sv_matrix>();
        m->value = spotvol::sim::increments(path->value);
        *out = m.release();
    });
}

sv_status sv_path_write_csv(const sv_path* path, const char* file) {
    SV_REQUIRE(path && file, "NULL argument");
    return guarded([&] {
        auto f = open_out(file);
        spotvol::sim::write_path_csv(f, path->value);
        if (!f) throw spotvol::IoError(std::string("write to ") + file + " failed");
    });
}

sv_status sv_path_read_csv(const char* file, sv_path** out) {
    SV_REQUIRE(file && out, "NULL argument");
    return guarded([&] {
        auto in = open_in(file);
        auto path = std::make_unique<sv_path>();
        path->value = spotvol::sim::read_path_csv(in);
        *out = path.release();
    });
}

// ---- estimators

sv_status sv_realized_integrated_vol(const sv_matrix* increments, sv_matrix** out) {
    SV_REQUIRE(increments && out, "NULL argument");
    return guarded([&] {
        auto m = std::make_unique<sv_matrix>();
        m->value = spotvol::est::realized_integrated_vol(increments->value);
        *out = m.release();
    });
}

sv_status sv_spot_vol(const sv_matrix* increments, double t, size_t k_n, sv_spot_estimate** out) {
    SV_REQUIRE(increments && out, "NULL argument");
    return guarded([&] {
        auto e = std::make_unique<sv_spot_estimate>();
        e->value = spotvol::est::spot_vol(increments->value, t, k_n);
        *out = e.release();
    });
}

sv_status sv_spot_from_matrix(const sv_matrix* matrix, size_t k_n, double t, sv_spot_estimate** out) {
    SV_REQUIRE(matrix && out, "NULL argument");
    return guarded([&] {
        if (matrix->value.rows() != matrix->value.cols() || matrix->value.rows() == 0) {
            throw spotvol::ConfigError("spot estimate: matrix must be square and nonempty");
        }
        if (k_n == 0) throw spotvol::ConfigError("spot estimate: k_n must be >= 1");
        auto e = std::make_unique<sv_spot_estimate>();
        e->value.matrix = matrix->value;
        e->value.k_n = k_n;
        e->value.t = t;
        e->value.z_n = static_cast<double>(matrix->value.rows()) / static_cast<double>(k_n);
        *out = e.release();
    });
}

void sv_spot_free(sv_spot_estimate* est) {
    delete est;
}

double sv_spot_z(const sv_spot_estimate* est) {
    return est ? est->value.z_n : 0.0;
}

size_t sv_spot_k(const sv_spot_estimate* est) {
    return est ? est->value.k_n : 0;
}

sv_status sv_spot_window(const sv_spot_estimate* est, size_t* first, size_t* last) {
    SV_REQUIRE(est && first && last, "NULL argument");
    *first = est->value.first;
    *last = est->value.last;
    return SV_OK;
}

sv_status sv_spot_matrix(const sv_spot_estimate* est, sv_matrix** out) {
    SV_REQUIRE(est && out, "NULL argument");
    return guarded([&] {
        auto m = std::make_unique<sv_matrix>();
        m->value = est->value.matrix;
        *out = m.release();
    });
}

sv_status sv_spot_scale(sv_spot_estimate* est, double factor) {
    SV_REQUIRE(est, "NULL estimate");
    est->value.matrix *= factor;
    return SV_OK;
}

// ---- spectra

sv_status sv_eigenvalues_sym(const sv_matrix* m, sv_spectrum** out) {
    SV_REQUIRE(m && out, "NULL argument");
    return guarded([&] {
        auto s = std::make_unique<sv_spectrum>();
        s->value = spotvol::spectra::eigenvalues_sym(m->value);
        *out = s.release();
    });
}

void sv_spectrum_free(sv_spectrum* s) {
    delete s;
}

size_t sv_spectrum_size(const sv_spectrum* s) {
    return s ? s->value.eigenvalues.size() : 0;
}

sv_status sv_spectrum_values(const sv_spectrum* s, double* buffer, size_t len) {
    SV_REQUIRE(s && buffer, "NULL argument");
    SV_REQUIRE(len >= s->value.eigenvalues.size(), "buffer too small");
    std::memcpy(buffer, s->value.eigenvalues.data(), s->value.eigenvalues.size() * sizeof(double));
    return SV_OK;
}

double sv_esd_eval(const sv_spectrum* s, double x) {
    return s ? spotvol::spectra::esd_eval(s->value, x) : 0.0;
}

sv_status sv_ks_distance_mp(const sv_spectrum* s, double y, double sigma2, double* out) {
    SV_REQUIRE(s && out, "NULL argument");
    return guarded([&] {
        const spotvol::rmt::MPLaw law(y, sigma2);
        *out = spotvol::spectra::kolmogorov_distance(s->value,
                                                     [&](double x) { return spotvol::rmt::mp_cdf(x, law); });
    });
}

sv_status sv_spectrum_write_esd_csv(const sv_spectrum* s, double y, double sigma2, const char* file) {
    SV_REQUIRE(s && file, "NULL argument");
    return guarded([&] {
        const spotvol::rmt::MPLaw law(y, sigma2);
        auto f = open_out(file);
        f << "x,esd,mp_cdf\n";
        const auto& ev = s->value.eigenvalues;
        for (size_t i = ev.size(); i > 0; --i) {
            if (i > 1 && ev[i - 2] == ev[i - 1]) continue;
            const double x = ev[i - 1];
            f << spotvol::csv::format_double(x) << ','
              << spotvol::csv::format_double(spotvol::spectra::esd_eval(s->value, x)) << ','
              << spotvol::csv::format_double(spotvol::rmt::mp_cdf(x, law)) << '\n';
        }
        if (!f) throw spotvol::IoError(std::string("write to ") + file + " failed");
    });
}

// ---- MP law

sv_status sv_mp_edges(double y, double sigma2, double* a, double* b) {
    SV_REQUIRE(a && b, "NULL argument");
    return guarded([&] {
        const spotvol::rmt::MPLaw law(y, sigma2);
        *a = law.a();
        *b = law.b();
    });
}

sv_status sv_mp_pdf(double x, double y, double sigma2, double* out) {
    SV_REQUIRE(out, "NULL argument");
    return guarded([&] { *out = spotvol::rmt::mp_pdf(x, spotvol::rmt::MPLaw(y, sigma2)); });
}

sv_status sv_mp_cdf(double x, double y, double sigma2, double* out) {
    SV_REQUIRE(out, "NULL argument");
    return guarded([&] { *out = spotvol::rmt::mp_cdf(x, spotvol::rmt::MPLaw(y, sigma2)); });
}

sv_status sv_mp_quantile(double u, double y, double sigma2, double* out) {
    SV_REQUIRE(out, "NULL argument");
    return guarded([&] { *out = spotvol::rmt::mp_quantile(u, spotvol::rmt::MPLaw(y, sigma2)); });
}

sv_status sv_mp_write_cdf_csv(double y, double sigma2, double lo, double hi, size_t points, const char* file) {
    SV_REQUIRE(file, "NULL argument");
    return guarded([&] {
        const spotvol::rmt::MPLaw law(y, sigma2);
        auto f = open_out(file);
        spotvol::rmt::write_mp_cdf_csv(f, law, lo, hi, points);
        if (!f) throw spotvol::IoError(std::string("write to ") + file + " failed");
    });
}

sv_status sv_solve_silverstein(double z_re, double z_im, double y, const double* support, const double* weights,
                               size_t m, sv_stieltjes_point* out) {
    SV_REQUIRE(support && weights && out, "NULL argument");
    return guarded([&] {
        spotvol::rmt::DiscreteH h{{support, support + m}, {weights, weights + m}};
        const auto pt = spotvol::rmt::solve_silverstein({z_re, z_im}, y, h);
        *out = sv_stieltjes_point{pt.z.real(),       pt.z.imag(),       pt.m.real(), pt.m.imag(),
                                  pt.m_under.real(), pt.m_under.imag(), pt.iterations, pt.residual};
    });
}

sv_status sv_mp_lss_constants(double z_n, sv_lss_constants* out) {
    SV_REQUIRE(out, "NULL argument");
    return guarded([&] {
        const auto c = spotvol::rmt::mp_lss_constants(z_n);
        *out = sv_lss_constants{c.center, c.mean_shift, c.variance};
    });
}

// ---- tests

sv_status sv_run_test(sv_test_kind kind, const sv_spot_estimate* est, sv_test_report* out) {
    SV_REQUIRE(est && out, "NULL argument");
    return guarded([&] {
        spotvol::hdtest::TestReport r;
        switch (to_kind(kind)) {
            case spotvol::hdtest::TestKind::BJYZ: r = spotvol::hdtest::bjyz_test(est->value); break;
            case spotvol::hdtest::TestKind::LW: r = spotvol::hdtest::lw_test(est->value); break;
            case spotvol::hdtest::TestKind::J: r = spotvol::hdtest::j_test(est->value); break;
        }
        *out = sv_test_report{from_kind(r.kind), r.raw, r.zscore, r.pvalue, r.z_n, r.p, r.k_n};
    });
}

sv_status sv_test_report_csv(const sv_test_report* report, char* buffer, size_t len) {
    SV_REQUIRE(report && buffer, "NULL argument");
    return guarded([&] {
        spotvol::hdtest::TestReport r;
        r.kind = to_kind(report->kind);
        r.raw = report->raw;
        r.zscore = report->zscore;
        r.pvalue = report->pvalue;
        r.z_n = report->z_n;
        r.p = report->p;
        r.k_n = report->k_n;
        const std::string row = spotvol::hdtest::to_csv_row(r);
        if (row.size() + 1 > len) throw ArgumentError("report csv: buffer too small");
        std::memcpy(buffer, row.c_str(), row.size() + 1);
    });
}

const char* sv_test_report_csv_header(void) {
    static const std::string header = spotvol::hdtest::csv_header();
    return header.c_str();
}

// ---- harness

sv_status sv_mc_config_create(sv_mc_config** out) {
    SV_REQUIRE(out, "out is NULL");
    return guarded([&] { *out = new sv_mc_config{}; });
}

void sv_mc_config_free(sv_mc_config* cfg) {
    delete cfg;
}

sv_status sv_mc_config_set(sv_mc_config* cfg, const char* key, const char* value) {
    SV_REQUIRE(cfg && key && value, "NULL argument");
    return guarded([&] { spotvol::harness::apply_key_values(cfg->value, {{key, value}}); });
}

sv_status sv_mc_config_load(sv_mc_config* cfg, const char* file) {
    SV_REQUIRE(cfg && file, "NULL argument");
    return guarded([&] {
        auto in = open_in(file);
        spotvol::harness::apply_key_values(cfg->value, spotvol::harness::parse_key_values(in));
    });
}

sv_status sv_mc_config_clear_alternative(sv_mc_config* cfg) {
    SV_REQUIRE(cfg, "NULL config");
    cfg->value.alternative.reset();
    return SV_OK;
}

sv_status sv_run_size_experiment(const sv_mc_config* cfg, sv_mc_summary** out) {
    SV_REQUIRE(cfg && out, "NULL argument");
    return guarded([&] { *out = new sv_mc_summary{spotvol::harness::run_size_experiment(cfg->value)}; });
}

sv_status sv_run_power_experiment(const sv_mc_config* cfg, sv_mc_summary** out) {
    SV_REQUIRE(cfg && out, "NULL argument");
    return guarded([&] { *out = new sv_mc_summary{spotvol::harness::run_power_experiment(cfg->value)}; });
}

void sv_mc_summary_free(sv_mc_summary* s) {
    delete s;
}

sv_status sv_mc_rejection_rate(const sv_mc_summary* s, sv_test_kind kind, size_t p, double level, double* out) {
    SV_REQUIRE(s && out, "NULL argument");
    return guarded([&] { *out = s->value.rejection_rate(to_kind(kind), p, level); });
}

sv_status sv_mc_zscores(const sv_mc_summary* s, sv_test_kind kind, size_t p, double* buffer, size_t len,
                        size_t* count) {
    SV_REQUIRE(s && count, "NULL argument");
    return guarded([&] {
        const auto* series = s->value.find(to_kind(kind), p);
        if (!series || !series->available) throw spotvol::ConfigError("no such series");
        *count = series->zscores.size();
        if (buffer) {
            if (len < series->zscores.size()) throw ArgumentError("zscores: buffer too small");
            std::memcpy(buffer, series->zscores.data(), series->zscores.size() * sizeof(double));
        }
    });
}


sv_status sv_write_size_table(const sv_mc_summary* const* runs, size_t count, const char* file) {
    return write_tables(runs, count, file, spotvol::harness::write_size_table);
}

sv_status sv_write_power_table(const sv_mc_summary* const* runs, size_t count, const char* file) {
    return write_tables(runs, count, file, spotvol::harness::write_power_table);
}

sv_status sv_run_esd_figure(const sv_mc_config* cfg, const char* out_dir, double* ks, size_t ks_len) {
    SV_REQUIRE(cfg, "NULL config");
    return guarded([&] {
        if (ks && ks_len < cfg->value.p_list.size()) throw ArgumentError("ks buffer too small");
        const auto figs = spotvol::harness::run_esd_figure(cfg->value, out_dir ? out_dir : "");
        if (ks) {
            for (size_t i = 0; i < figs.size(); ++i) ks[i] = figs[i].ks_distance;
        }
    });
}

sv_status sv_run_qq_figure(const sv_mc_config* cfg, const char* out_dir, double* correlations, size_t len,
                           size_t* count) {
    SV_REQUIRE(cfg, "NULL config");
    return guarded([&] {
        const auto series = spotvol::harness::run_qq_figure(cfg->value, out_dir ? out_dir : "");
        if (count) *count = series.size();
        if (correlations) {
            if (len < series.size()) throw ArgumentError("correlation buffer too small");
            for (size_t i = 0; i < series.size(); ++i) correlations[i] = series[i].correlation;
        }
    });
}

}  // extern "C"
