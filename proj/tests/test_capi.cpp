#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "spotvol/spotvol.h"

namespace {

TEST(CApiTest, VersionAndNullHandles) {
    EXPECT_STREQ(sv_version(), "1.0.0");
    sv_matrix* m = nullptr;
    EXPECT_EQ(sv_matrix_create(2, 2, nullptr, nullptr), SV_ERR_ARGUMENT);
    EXPECT_EQ(sv_matrix_get(nullptr, 0, 0, nullptr), SV_ERR_ARGUMENT);
    EXPECT_GT(std::strlen(sv_last_error()), 0u);
    sv_matrix_free(nullptr);
    sv_path_free(nullptr);
    ASSERT_EQ(sv_matrix_create(2, 3, nullptr, &m), SV_OK);
    double v = -1.0;
    EXPECT_EQ(sv_matrix_get(m, 1, 2, &v), SV_OK);
    EXPECT_EQ(v, 0.0);
    EXPECT_EQ(sv_matrix_get(m, 2, 0, &v), SV_ERR_ARGUMENT);
    sv_matrix_free(m);
}

TEST(CApiTest, SimulateSpotAndTest) {
    sv_grid_config grid{400, 5, 3};
    sv_vol_model model = sv_vol_model_default();
    model.r1 = 0.0004;
    sv_path* path = nullptr;
    ASSERT_EQ(sv_simulate_path(&grid, &model, &path), SV_OK);
    EXPECT_EQ(sv_path_dim(path), 5u);
    EXPECT_EQ(sv_path_steps(path), 400u);
    double x0 = 1.0;
    ASSERT_EQ(sv_path_value(path, 0, 0, &x0), SV_OK);
    EXPECT_EQ(x0, 0.0);

    sv_matrix* incr = nullptr;
    ASSERT_EQ(sv_path_increments(path, &incr), SV_OK);
    EXPECT_EQ(sv_matrix_cols(incr), 400u);

    sv_spot_estimate* est = nullptr;
    ASSERT_EQ(sv_spot_vol(incr, 0.0, 20, &est), SV_OK);
    EXPECT_DOUBLE_EQ(sv_spot_z(est), 0.25);
    size_t first = 0, last = 0;
    ASSERT_EQ(sv_spot_window(est, &first, &last), SV_OK);
    EXPECT_EQ(first, 1u);
    EXPECT_EQ(last, 20u);
    ASSERT_EQ(sv_spot_scale(est, 1.0 / 0.0009), SV_OK);

    sv_test_report rep{};
    for (sv_test_kind kind : {SV_TEST_BJYZ, SV_TEST_LW, SV_TEST_J}) {
        ASSERT_EQ(sv_run_test(kind, est, &rep), SV_OK) << sv_last_error();
        EXPECT_EQ(rep.kind, kind);
        EXPECT_TRUE(std::isfinite(rep.zscore));
        EXPECT_GE(rep.pvalue, 0.0);
        EXPECT_LE(rep.pvalue, 1.0);
    }
    char buf[256];
    ASSERT_EQ(sv_test_report_csv(&rep, buf, sizeof buf), SV_OK);
    EXPECT_EQ(std::string(buf).rfind("J,5,20,", 0), 0u);
    EXPECT_EQ(sv_test_report_csv(&rep, buf, 4), SV_ERR_ARGUMENT);

    sv_spot_estimate* bad = nullptr;
    EXPECT_EQ(sv_spot_vol(incr, 0.99, 20, &bad), SV_ERR_CONFIG);
    EXPECT_EQ(bad, nullptr);

    sv_spot_free(est);
    sv_matrix_free(incr);
    sv_path_free(path);
}

TEST(CApiTest, ErrorCodesByKind) {
    const double id[4] = {1, 0, 0, 1};
    sv_matrix* m = nullptr;
    ASSERT_EQ(sv_matrix_create(2, 2, id, &m), SV_OK);
    sv_spot_estimate* est = nullptr;
    ASSERT_EQ(sv_spot_from_matrix(m, 2, 0.0, &est), SV_OK);
    sv_test_report rep{};
    EXPECT_EQ(sv_run_test(SV_TEST_BJYZ, est, &rep), SV_ERR_CONFIG);  // z_n = 1
    sv_spot_free(est);

    const double sing[4] = {1, 0, 0, 0};
    sv_matrix* s = nullptr;
    ASSERT_EQ(sv_matrix_create(2, 2, sing, &s), SV_OK);
    ASSERT_EQ(sv_spot_from_matrix(s, 10, 0.0, &est), SV_OK);
    EXPECT_EQ(sv_run_test(SV_TEST_BJYZ, est, &rep), SV_ERR_NUMERIC);
    sv_spot_free(est);

    const double neg[4] = {1, 0, 0, -1};
    sv_matrix* n = nullptr;
    ASSERT_EQ(sv_matrix_create(2, 2, neg, &n), SV_OK);
    sv_spectrum* spec = nullptr;
    EXPECT_EQ(sv_eigenvalues_sym(n, &spec), SV_ERR_NUMERIC);

    sv_matrix* missing = nullptr;
    EXPECT_EQ(sv_matrix_read_csv("/nonexistent/spotvol.csv", &missing), SV_ERR_IO);

    sv_matrix_free(m);
    sv_matrix_free(s);
    sv_matrix_free(n);
}

TEST(CApiTest, SpectrumAndMp) {
    const double d[9] = {3, 0, 0, 0, 1, 0, 0, 0, 2};
    sv_matrix* m = nullptr;
    ASSERT_EQ(sv_matrix_create(3, 3, d, &m), SV_OK);
    sv_spectrum* s = nullptr;
    ASSERT_EQ(sv_eigenvalues_sym(m, &s), SV_OK);
    std::vector<double> vals(3);
    ASSERT_EQ(sv_spectrum_values(s, vals.data(), vals.size()), SV_OK);
    EXPECT_EQ(vals, (std::vector<double>{3, 2, 1}));
    EXPECT_DOUBLE_EQ(sv_esd_eval(s, 2.0), 2.0 / 3.0);
    double ks = 0.0;
    ASSERT_EQ(sv_ks_distance_mp(s, 0.5, 1.0, &ks), SV_OK);
    EXPECT_GT(ks, 0.0);

    double a = 0, b = 0, cdf = 0;
    ASSERT_EQ(sv_mp_edges(0.5, 1.0, &a, &b), SV_OK);
    EXPECT_NEAR(a, 0.085786437626904951, 1e-15);
    ASSERT_EQ(sv_mp_cdf(1.0, 0.5, 1.0, &cdf), SV_OK);
    EXPECT_NEAR(cdf, 0.57600421510386856, 1e-10);
    EXPECT_EQ(sv_mp_cdf(1.0, -0.5, 1.0, &cdf), SV_ERR_CONFIG);

    const double support[1] = {1.0}, weights[1] = {1.0};
    sv_stieltjes_point pt{};
    ASSERT_EQ(sv_solve_silverstein(1.0, 1.0, 0.5, support, weights, 1, &pt), SV_OK);
    EXPECT_NEAR(pt.m_re, -0.056066469739372970, 1e-10);
    EXPECT_NEAR(pt.m_im, 0.74072889552085669, 1e-10);

    sv_lss_constants c{};
    ASSERT_EQ(sv_mp_lss_constants(0.5, &c), SV_OK);
    EXPECT_NEAR(c.variance, 0.38629436111989062, 1e-15);

    sv_spectrum_free(s);
    sv_matrix_free(m);
}

TEST(CApiTest, MonteCarloRoundTrip) {
    sv_mc_config* cfg = nullptr;
    ASSERT_EQ(sv_mc_config_create(&cfg), SV_OK);
    EXPECT_EQ(sv_mc_config_set(cfg, "bogus", "1"), SV_ERR_CONFIG);
    EXPECT_EQ(sv_mc_config_set(cfg, "reps", "abc"), SV_ERR_CONFIG);
    ASSERT_EQ(sv_mc_config_set(cfg, "reps", "10"), SV_OK);
    ASSERT_EQ(sv_mc_config_set(cfg, "n", "256"), SV_OK);
    ASSERT_EQ(sv_mc_config_set(cfg, "k_n", "16"), SV_OK);
    ASSERT_EQ(sv_mc_config_set(cfg, "p_list", "4,8"), SV_OK);
    ASSERT_EQ(sv_mc_config_set(cfg, "seed", "5"), SV_OK);

    sv_mc_summary* run = nullptr;
    ASSERT_EQ(sv_run_size_experiment(cfg, &run), SV_OK) << sv_last_error();
    double rate = -1.0;
    ASSERT_EQ(sv_mc_rejection_rate(run, SV_TEST_LW, 4, 0.05, &rate), SV_OK);
    EXPECT_GE(rate, 0.0);
    EXPECT_LE(rate, 1.0);
    std::vector<double> z(10);
    size_t count = 0;
    ASSERT_EQ(sv_mc_zscores(run, SV_TEST_J, 8, z.data(), z.size(), &count), SV_OK);
    EXPECT_EQ(count, 10u);

    const auto dir = std::filesystem::temp_directory_path() / "spotvol_capi_test";
    std::filesystem::create_directories(dir);
    const std::string table = (dir / "size_table.csv").string();
    const sv_mc_summary* runs[] = {run};
    ASSERT_EQ(sv_write_size_table(runs, 1, table.c_str()), SV_OK);
    EXPECT_TRUE(std::filesystem::exists(table));

    sv_mc_summary* power = nullptr;
    EXPECT_EQ(sv_run_power_experiment(cfg, &power), SV_ERR_CONFIG);
    ASSERT_EQ(sv_mc_config_set(cfg, "s", "0.75"), SV_OK);
    ASSERT_EQ(sv_run_power_experiment(cfg, &power), SV_OK);
    ASSERT_EQ(sv_mc_config_clear_alternative(cfg), SV_OK);

    double ks[2] = {0, 0};
    ASSERT_EQ(sv_run_esd_figure(cfg, dir.string().c_str(), ks, 2), SV_OK);
    EXPECT_TRUE(std::filesystem::exists(dir / "esd_p8.csv"));
    double corr[6];
    ASSERT_EQ(sv_run_qq_figure(cfg, dir.string().c_str(), corr, 6, &count), SV_OK);
    EXPECT_EQ(count, 6u);

    sv_mc_summary_free(power);
    sv_mc_summary_free(run);
    sv_mc_config_free(cfg);
    std::filesystem::remove_all(dir);
}

}  // namespace
