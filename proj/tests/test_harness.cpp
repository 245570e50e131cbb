#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spotvol/errors.hpp"
#include "spotvol/harness.hpp"

namespace spotvol::harness {
namespace {

using hdtest::TestKind;

MCConfig small_config() {
    MCConfig cfg;
    cfg.reps = 20;
    cfg.p_list = {4, 8};
    cfg.k_n = 16;
    cfg.n = 256;
    cfg.seed = 7;
    return cfg;
}

TEST(HarnessTest, ValidateRejectsBadConfigs) {
    auto cfg = small_config();
    cfg.reps = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.levels = {1.5};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.t = 0.99;  // window overruns
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(HarnessTest, EmptyDimensionListIsANoOp) {
    auto cfg = small_config();
    cfg.p_list.clear();
    EXPECT_TRUE(run_size_experiment(cfg).series.empty());
    const auto dir = std::filesystem::temp_directory_path() / "spotvol_empty_test";
    std::filesystem::remove_all(dir);
    EXPECT_TRUE(run_esd_figure(cfg, dir).empty());
    EXPECT_FALSE(std::filesystem::exists(dir));
}

TEST(HarnessTest, DefaultWindow) {
    EXPECT_EQ(default_window(4680), 68u);
    EXPECT_EQ(default_window(100), 10u);
}

TEST(HarnessTest, SingleReplicationRates) {
    auto cfg = small_config();
    cfg.reps = 1;
    const auto summary = run_size_experiment(cfg);
    for (const auto& s : summary.series) {
        if (!s.available) continue;
        for (double r : s.rejection_rates) EXPECT_TRUE(r == 0.0 || r == 1.0);
    }
}

TEST(HarnessTest, RatesMonotoneInLevel) {
    auto cfg = small_config();
    cfg.reps = 50;
    cfg.levels = {0.01, 0.05, 0.10, 0.5};
    const auto summary = run_size_experiment(cfg);
    for (const auto& s : summary.series) {
        if (!s.available) continue;
        for (std::size_t i = 1; i < s.rejection_rates.size(); ++i) {
            EXPECT_LE(s.rejection_rates[i - 1], s.rejection_rates[i]);
        }
    }
}

TEST(HarnessTest, WorkerCountDoesNotChangeResults) {
    auto cfg = small_config();
    cfg.workers = 1;
    const auto a = run_size_experiment(cfg);
    cfg.workers = 4;
    const auto b = run_size_experiment(cfg);
    ASSERT_EQ(a.series.size(), b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        EXPECT_EQ(a.series[i].zscores, b.series[i].zscores);
    }
}

TEST(HarnessTest, RejectionRateThresholds) {
    // Phi^{-1}(0.75) = 0.6745: level 0.5 rejects |z| > 0.6745.
    EXPECT_NEAR(normal_quantile(0.75), 0.67448975019608171, 1e-14);
    EXPECT_EQ(rejection_rate({0.6, -0.6}, 0.5), 0.0);
    EXPECT_EQ(rejection_rate({0.7, -0.6}, 0.5), 0.5);
    EXPECT_EQ(rejection_rate({0.7, -0.7}, 0.5), 1.0);
}

TEST(HarnessTest, BjyzUnavailableAboveOne) {
    auto cfg = small_config();
    cfg.p_list = {8, 24};
    const auto summary = run_size_experiment(cfg);
    EXPECT_TRUE(summary.find(TestKind::BJYZ, 8)->available);
    EXPECT_FALSE(summary.find(TestKind::BJYZ, 24)->available);
    EXPECT_TRUE(summary.find(TestKind::LW, 24)->available);
    EXPECT_THROW(summary.rejection_rate(TestKind::BJYZ, 24, 0.05), ConfigError);
    EXPECT_THROW(summary.rejection_rate(TestKind::LW, 24, 0.2), ConfigError);
}

TEST(HarnessTest, SizeAndPowerModesAreExclusive) {
    auto cfg = small_config();
    EXPECT_THROW(run_power_experiment(cfg), ConfigError);
    cfg.alternative = Alternative{};
    EXPECT_THROW(run_size_experiment(cfg), ConfigError);
    const auto power = run_power_experiment(cfg);
    EXPECT_EQ(power.series.size(), 6u);
}

TEST(HarnessTest, AlternativeModelLayout) {
    auto cfg = small_config();
    cfg.alternative = Alternative{0.5, 0.0004};
    cfg.model.r1 = 0.0002;
    const auto m = model_for(cfg, 8);
    EXPECT_EQ(m.kind, sim::VolKind::PiecewiseDiag);
    ASSERT_EQ(m.diag.size(), 8u);
    EXPECT_EQ(std::count(m.diag.begin(), m.diag.end(), 0.0009), 4);
    EXPECT_EQ(m.r1, 0.0002);
}

TEST(HarnessTest, TablesLayout) {
    auto cfg = small_config();
    cfg.p_list = {8, 24};
    cfg.levels = {0.05};
    const auto run = run_size_experiment(cfg);
    std::ostringstream out;
    write_size_table(out, {run});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "test,level,r1,pbar,rejection_pct");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_NE(std::find(rows.begin(), rows.end(), "BJYZ,0.05,0,1.5,NA"), rows.end());

    cfg.alternative = Alternative{0.75, 0.0004};
    std::ostringstream pout;
    write_power_table(pout, {run_power_experiment(cfg)});
    EXPECT_EQ(pout.str().substr(0, pout.str().find('\n')), "test,level,r1,s,pbar,rejection_pct");
}

TEST(HarnessTest, QQForTwoReplications) {
    TestSeries s{TestKind::LW, 4, 0.25, true, {1.0, -2.0}, {}};
    const auto qq = make_qq(s);
    ASSERT_EQ(qq.theoretical.size(), 2u);
    EXPECT_NEAR(qq.theoretical[0], -0.67448975019608171, 1e-14);
    EXPECT_NEAR(qq.theoretical[1], 0.67448975019608171, 1e-14);
    EXPECT_EQ(qq.empirical, (std::vector<double>{-2.0, 1.0}));
    EXPECT_NEAR(qq.correlation, 1.0, 1e-15);
}

TEST(HarnessTest, PearsonCorrelation) {
    EXPECT_NEAR(pearson_correlation({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
    EXPECT_NEAR(pearson_correlation({1, 2, 3}, {3, 2, 1}), -1.0, 1e-15);
}

TEST(HarnessTest, EsdFigureWritesFiles) {
    auto cfg = small_config();
    cfg.grid_points = 20;
    const auto dir = std::filesystem::temp_directory_path() / "spotvol_esd_test";
    std::filesystem::remove_all(dir);
    const auto figs = run_esd_figure(cfg, dir);
    ASSERT_EQ(figs.size(), 2u);
    for (const auto& f : figs) {
        EXPECT_TRUE(std::filesystem::exists(f.file));
        EXPECT_GE(f.ks_distance, 0.0);
        EXPECT_LE(f.ks_distance, 1.0);
        std::ifstream in(f.file);
        std::string header;
        std::getline(in, header);
        EXPECT_EQ(header, "x,esd,mp_cdf");
    }
    EXPECT_TRUE(std::filesystem::exists(dir / "esd_p4.csv"));
    std::filesystem::remove_all(dir);
}

TEST(HarnessTest, KeyValueConfig) {
    std::istringstream in("# comment\nreps = 12\np_list = 3, 5\nlevels=0.1,0.01\nmodel = stochastic\nr2 = 0.02\n\nseed=9\n");
    MCConfig cfg;
    apply_key_values(cfg, parse_key_values(in));
    EXPECT_EQ(cfg.reps, 12u);
    EXPECT_EQ(cfg.p_list, (std::vector<std::size_t>{3, 5}));
    EXPECT_EQ(cfg.levels, (std::vector<double>{0.1, 0.01}));
    EXPECT_EQ(cfg.model.kind, sim::VolKind::StochasticBM);
    EXPECT_EQ(cfg.model.r2, 0.02);
    EXPECT_EQ(cfg.seed, 9u);
    std::istringstream bad("unknown_key = 1\n");
    EXPECT_THROW(apply_key_values(cfg, parse_key_values(bad)), ConfigError);
}

TEST(HarnessTest, FormatPbar) {
    EXPECT_EQ(format_pbar(0.5), "0.5");
    EXPECT_EQ(format_pbar(1.0), "1");
    EXPECT_EQ(format_pbar(1.5), "1.5");
}

}  // namespace
}  // namespace spotvol::harness
