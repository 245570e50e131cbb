/*
 * spotvol C API.
 *
 * Every function returns an sv_status. On failure, sv_last_error() returns a
 * message describing the most recent failure on the calling thread. Objects
 * are opaque handles released with the matching *_free function; passing
 * NULL to a *_free function is a no-op.
 */
#ifndef SPOTVOL_H
#define SPOTVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPOTVOL_BUILDING)
#    define SV_API __declspec(dllexport)
#  else
#    define SV_API __declspec(dllimport)
#  endif
#else
#  define SV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sv_status {
    SV_OK = 0,
    SV_ERR_ARGUMENT = 1, /* NULL handle, bad index, buffer too small */
    SV_ERR_CONFIG = 2,   /* invalid configuration or input contract violation */
    SV_ERR_NUMERIC = 3,  /* numerical routine failed */
    SV_ERR_IO = 4,
    SV_ERR_INTERNAL = 5
} sv_status;

SV_API const char* sv_last_error(void);
SV_API const char* sv_version(void);

/* ---- matrices ---------------------------------------------------------- */

typedef struct sv_matrix sv_matrix;

/* `data` is row-major rows x cols; NULL gives a zero matrix. */
SV_API sv_status sv_matrix_create(size_t rows, size_t cols, const double* data, sv_matrix** out);
SV_API void sv_matrix_free(sv_matrix* m);
SV_API size_t sv_matrix_rows(const sv_matrix* m);
SV_API size_t sv_matrix_cols(const sv_matrix* m);
SV_API sv_status sv_matrix_get(const sv_matrix* m, size_t row, size_t col, double* out);
/* Copies rows*cols values, row-major, into `buffer` of length `len`. */
SV_API sv_status sv_matrix_copy(const sv_matrix* m, double* buffer, size_t len);
SV_API sv_status sv_matrix_scale(sv_matrix* m, double factor);
SV_API sv_status sv_matrix_read_csv(const char* path, sv_matrix** out);
/* Header row x1..xc, then rows. */
SV_API sv_status sv_matrix_write_csv(const sv_matrix* m, const char* path);

/* ---- simulation -------------------------------------------------------- */

typedef enum sv_vol_kind {
    SV_VOL_DETERMINISTIC_SIN = 0,
    SV_VOL_STOCHASTIC_BM = 1,
    SV_VOL_CONSTANT_DIAG = 2,
    SV_VOL_PIECEWISE_DIAG = 3
} sv_vol_kind;

typedef struct sv_grid_config {
    uint64_t n;
    uint64_t p;
    uint64_t seed;
} sv_grid_config;

typedef struct sv_vol_model {
    sv_vol_kind kind;
    double base;
    double r1;
    double r2;
    const double* diag; /* length diag_len, used by the diagonal models */
    size_t diag_len;
    double drift;
} sv_vol_model;

/* Defaults: deterministic, base 0.0009, r1 = r2 = drift = 0. */
SV_API sv_vol_model sv_vol_model_default(void);

typedef struct sv_path sv_path;

SV_API sv_status sv_simulate_path(const sv_grid_config* config, const sv_vol_model* model, sv_path** out);
SV_API void sv_path_free(sv_path* path);
SV_API size_t sv_path_dim(const sv_path* path);
SV_API size_t sv_path_steps(const sv_path* path);
SV_API sv_status sv_path_value(const sv_path* path, size_t coord, size_t step, double* out);
/* p x n matrix of increments. */
SV_API sv_status sv_path_increments(const sv_path* path, sv_matrix** out);
/* Header t,x1,...,xp. */
SV_API sv_status sv_path_write_csv(const sv_path* path, const char* file);
SV_API sv_status sv_path_read_csv(const char* file, sv_path** out);

/* ---- estimators -------------------------------------------------------- */

typedef struct sv_spot_estimate sv_spot_estimate;

SV_API sv_status sv_realized_integrated_vol(const sv_matrix* increments, sv_matrix** out);
SV_API sv_status sv_spot_vol(const sv_matrix* increments, double t, size_t k_n, sv_spot_estimate** out);
/* Wraps an existing p x p matrix (e.g. read from CSV) as a spot estimate. */
SV_API sv_status sv_spot_from_matrix(const sv_matrix* matrix, size_t k_n, double t, sv_spot_estimate** out);
SV_API void sv_spot_free(sv_spot_estimate* est);
SV_API double sv_spot_z(const sv_spot_estimate* est);
SV_API size_t sv_spot_k(const sv_spot_estimate* est);
/* 1-based inclusive window indices. */
SV_API sv_status sv_spot_window(const sv_spot_estimate* est, size_t* first, size_t* last);
/* Copy of the estimate's matrix. */
SV_API sv_status sv_spot_matrix(const sv_spot_estimate* est, sv_matrix** out);
SV_API sv_status sv_spot_scale(sv_spot_estimate* est, double factor);

/* ---- spectra ----------------------------------------------------------- */

typedef struct sv_spectrum sv_spectrum;

SV_API sv_status sv_eigenvalues_sym(const sv_matrix* m, sv_spectrum** out);
SV_API void sv_spectrum_free(sv_spectrum* s);
SV_API size_t sv_spectrum_size(const sv_spectrum* s);
/* Nonincreasing eigenvalues into `buffer` of length `len` >= size. */
SV_API sv_status sv_spectrum_values(const sv_spectrum* s, double* buffer, size_t len);
SV_API double sv_esd_eval(const sv_spectrum* s, double x);
/* Kolmogorov distance to the MP law (y, sigma2). */
SV_API sv_status sv_ks_distance_mp(const sv_spectrum* s, double y, double sigma2, double* out);
/* Columns x,esd,mp_cdf at the ESD jump points. */
SV_API sv_status sv_spectrum_write_esd_csv(const sv_spectrum* s, double y, double sigma2, const char* file);

/* ---- Marcenko-Pastur law and Silverstein's equation --------------------- */

SV_API sv_status sv_mp_edges(double y, double sigma2, double* a, double* b);
SV_API sv_status sv_mp_pdf(double x, double y, double sigma2, double* out);
SV_API sv_status sv_mp_cdf(double x, double y, double sigma2, double* out);
SV_API sv_status sv_mp_quantile(double u, double y, double sigma2, double* out);
/* Columns x,mp_cdf on `points` abscissae over [lo, hi]. */
SV_API sv_status sv_mp_write_cdf_csv(double y, double sigma2, double lo, double hi, size_t points,
                                     const char* file);

typedef struct sv_stieltjes_point {
    double z_re, z_im;
    double m_re, m_im;
    double m_under_re, m_under_im;
    size_t iterations;
    double residual;
} sv_stieltjes_point;

SV_API sv_status sv_solve_silverstein(double z_re, double z_im, double y, const double* support,
                                      const double* weights, size_t m, sv_stieltjes_point* out);

typedef struct sv_lss_constants {
    double center;
    double mean_shift;
    double variance;
} sv_lss_constants;

SV_API sv_status sv_mp_lss_constants(double z_n, sv_lss_constants* out);

/* ---- hypothesis tests -------------------------------------------------- */

typedef enum sv_test_kind { SV_TEST_BJYZ = 0, SV_TEST_LW = 1, SV_TEST_J = 2 } sv_test_kind;

typedef struct sv_test_report {
    sv_test_kind kind;
    double raw;
    double zscore;
    double pvalue;
    double z_n;
    size_t p;
    size_t k_n;
} sv_test_report;

SV_API sv_status sv_run_test(sv_test_kind kind, const sv_spot_estimate* est, sv_test_report* out);
/* One CSV row kind,p,k_n,z_n,raw,zscore,pvalue (no newline) into `buffer`. */
SV_API sv_status sv_test_report_csv(const sv_test_report* report, char* buffer, size_t len);
SV_API const char* sv_test_report_csv_header(void);

/* ---- Monte Carlo harness ----------------------------------------------- */

typedef struct sv_mc_config sv_mc_config;
typedef struct sv_mc_summary sv_mc_summary;

/* Defaults: reps 1000, n 4680, k_n 68, p_list {34,68,102}, deterministic
 * model with base 0.0009, t 0, levels {0.10,0.05,0.01}, null_scale 0.0009,
 * seed 0, one worker, no alternative. */
SV_API sv_status sv_mc_config_create(sv_mc_config** out);
SV_API void sv_mc_config_free(sv_mc_config* cfg);
/* Same keys as the `key = value` config file. */
SV_API sv_status sv_mc_config_set(sv_mc_config* cfg, const char* key, const char* value);
SV_API sv_status sv_mc_config_load(sv_mc_config* cfg, const char* file);
SV_API sv_status sv_mc_config_clear_alternative(sv_mc_config* cfg);

SV_API sv_status sv_run_size_experiment(const sv_mc_config* cfg, sv_mc_summary** out);
SV_API sv_status sv_run_power_experiment(const sv_mc_config* cfg, sv_mc_summary** out);
SV_API void sv_mc_summary_free(sv_mc_summary* s);
/* Rejection fraction in [0,1]. SV_ERR_CONFIG when the series is absent
 * (BJYZ with p >= k_n) or the level was not run. */
SV_API sv_status sv_mc_rejection_rate(const sv_mc_summary* s, sv_test_kind kind, size_t p, double level,
                                      double* out);
SV_API sv_status sv_mc_zscores(const sv_mc_summary* s, sv_test_kind kind, size_t p, double* buffer,
                               size_t len, size_t* count);

/* Writes one table covering all summaries in `runs`, replacing `file`. */
SV_API sv_status sv_write_size_table(const sv_mc_summary* const* runs, size_t count, const char* file);
SV_API sv_status sv_write_power_table(const sv_mc_summary* const* runs, size_t count, const char* file);

/* esd_p<p>.csv per p into out_dir; ks[i] receives the KS distance for
 * p_list[i] when ks is non-NULL (ks_len >= number of p values). */
SV_API sv_status sv_run_esd_figure(const sv_mc_config* cfg, const char* out_dir, double* ks, size_t ks_len);
/* qq_<test>_<pbar>.csv per available series into out_dir; correlations
 * are written in (p, BJYZ/LW/J) order, skipping unavailable series. */
SV_API sv_status sv_run_qq_figure(const sv_mc_config* cfg, const char* out_dir, double* correlations,
                                  size_t len, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* SPOTVOL_H */
