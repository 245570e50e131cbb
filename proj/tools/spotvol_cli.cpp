// spotvol command-line driver. Talks to the library only through spotvol.h.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spotvol/spotvol.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

// Thrown with the status of a failed library call.
struct ApiFailure {
    sv_status status;
    std::string message;
};

void check(sv_status st) {
    if (st != SV_OK) throw ApiFailure{st, sv_last_error()};
}

[[noreturn]] void config_error(const std::string& message) {
    throw ApiFailure{SV_ERR_CONFIG, message};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using MatrixPtr = std::unique_ptr<sv_matrix, Deleter<sv_matrix, sv_matrix_free>>;
using PathPtr = std::unique_ptr<sv_path, Deleter<sv_path, sv_path_free>>;
using SpotPtr = std::unique_ptr<sv_spot_estimate, Deleter<sv_spot_estimate, sv_spot_free>>;
using SpectrumPtr = std::unique_ptr<sv_spectrum, Deleter<sv_spectrum, sv_spectrum_free>>;
using ConfigPtr = std::unique_ptr<sv_mc_config, Deleter<sv_mc_config, sv_mc_config_free>>;
using SummaryPtr = std::unique_ptr<sv_mc_summary, Deleter<sv_mc_summary, sv_mc_summary_free>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    config_error("--" + key + " expects a number, got '" + v + "'");
}

// key = value lines, '#' comments.
std::map<std::string, std::string> read_config_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) config_error("cannot open config file " + file);
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_error(file + ":" + std::to_string(line_no) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// Collects key/value settings from --config and explicit flags; flags win.
struct Settings {
    std::string config_file;
    std::map<std::string, std::string> flags;

    std::map<std::string, std::string> merged() const {
        std::map<std::string, std::string> kv;
        if (!config_file.empty()) kv = read_config_file(config_file);
        for (const auto& [k, v] : flags) kv[k] = v;
        return kv;
    }
};

void add_setting(CLI::App* app, Settings& s, const std::string& flag, const std::string& key,
                 const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&s, key](const std::string& v) { s.flags[key] = v; }, help);
}

void add_model_flags(CLI::App* app, Settings& s) {
    add_setting(app, s, "--model", "model", "deterministic | stochastic");
    add_setting(app, s, "--base", "base", "baseline variance (default 0.0009)");
    add_setting(app, s, "--r2", "r2", "vol-of-vol of the stochastic model");
}

void add_mc_flags(CLI::App* app, Settings& s) {
    app->add_option("--config", s.config_file, "flat key = value configuration file");
    add_setting(app, s, "--reps", "reps", "Monte Carlo replications (default 1000)");
    add_setting(app, s, "--n", "n", "observations over [0,1] (default 4680)");
    add_setting(app, s, "--k-n", "k_n", "window length (default floor(sqrt(n)))");
    add_setting(app, s, "--p-list", "p_list", "comma-separated dimensions (default 34,68,102)");
    add_setting(app, s, "--t", "t", "estimation time (default 0)");
    add_setting(app, s, "--levels", "levels", "comma-separated nominal levels (default 0.10,0.05,0.01)");
    add_setting(app, s, "--null-scale", "null_scale", "H0 scale c_t = null_scale I_p (default 0.0009)");
    add_setting(app, s, "--workers", "workers", "worker threads (default 1)");
    add_model_flags(app, s);
}

// Builds an MC config from settings; list-valued keys in `skip` are left
// for the caller.
ConfigPtr make_config(std::map<std::string, std::string> kv, const std::vector<std::string>& skip) {
    sv_mc_config* raw = nullptr;
    check(sv_mc_config_create(&raw));
    ConfigPtr cfg(raw);
    for (const auto& key : skip) kv.erase(key);
    // n first so that the k_n default follows it.
    if (auto it = kv.find("n"); it != kv.end()) {
        check(sv_mc_config_set(cfg.get(), "n", it->second.c_str()));
        if (!kv.count("k_n")) {
            const double n = to_real("n", it->second);
            const auto k = static_cast<long long>(std::floor(std::sqrt(n)));
            check(sv_mc_config_set(cfg.get(), "k_n", std::to_string(k).c_str()));
        }
        kv.erase(it);
    }
    for (const auto& [k, v] : kv) check(sv_mc_config_set(cfg.get(), k.c_str(), v.c_str()));
    return cfg;
}

std::string out_file(const std::string& dir, const std::string& name) {
    std::filesystem::path d(dir.empty() ? "." : dir);
    std::filesystem::create_directories(d);
    return (d / name).string();
}

std::string format_g(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// ---- subcommands

int cmd_simulate(const Settings& s, std::uint64_t seed, std::size_t n, std::size_t p, const std::string& out) {
    const auto kv = s.merged();
    sv_vol_model model = sv_vol_model_default();
    for (const auto& [k, v] : kv) {
        if (k == "model") {
            if (v == "deterministic" || v == "det") model.kind = SV_VOL_DETERMINISTIC_SIN;
            else if (v == "stochastic" || v == "sto") model.kind = SV_VOL_STOCHASTIC_BM;
            else config_error("simulate supports --model deterministic | stochastic");
        } else if (k == "base") {
            model.base = to_real(k, v);
        } else if (k == "r1") {
            model.r1 = to_real(k, v);
        } else if (k == "r2") {
            model.r2 = to_real(k, v);
        }
    }
    const sv_grid_config grid{n, p, seed};
    sv_path* raw = nullptr;
    check(sv_simulate_path(&grid, &model, &raw));
    PathPtr path(raw);
    check(sv_path_write_csv(path.get(), out.c_str()));
    std::cout << "wrote " << out << " (n=" << n << ", p=" << p << ")\n";
    return 0;
}

int cmd_spot(const std::string& path_file, double t, long long k_n, double scale, const std::string& out) {
    sv_path* raw_path = nullptr;
    check(sv_path_read_csv(path_file.c_str(), &raw_path));
    PathPtr path(raw_path);
    sv_matrix* raw_incr = nullptr;
    check(sv_path_increments(path.get(), &raw_incr));
    MatrixPtr incr(raw_incr);
    const std::size_t n = sv_path_steps(path.get());
    const std::size_t k = k_n > 0 ? static_cast<std::size_t>(k_n)
                                  : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    sv_spot_estimate* raw_spot = nullptr;
    check(sv_spot_vol(incr.get(), t, k, &raw_spot));
    SpotPtr spot(raw_spot);
    if (scale != 1.0) check(sv_spot_scale(spot.get(), 1.0 / scale));
    sv_matrix* raw_m = nullptr;
    check(sv_spot_matrix(spot.get(), &raw_m));
    MatrixPtr m(raw_m);
    check(sv_matrix_write_csv(m.get(), out.c_str()));
    std::size_t first = 0, last = 0;
    check(sv_spot_window(spot.get(), &first, &last));
    std::cout << "wrote " << out << " (window " << first << ".." << last << ", k_n=" << k
              << ", z_n=" << sv_spot_z(spot.get()) << ")\n";
    return 0;
}

SpotPtr load_estimate(const std::string& matrix_file, long long k_n, double scale) {
    if (k_n <= 0) config_error("--k-n is required with --matrix");
    sv_matrix* raw = nullptr;
    check(sv_matrix_read_csv(matrix_file.c_str(), &raw));
    MatrixPtr m(raw);
    if (scale != 1.0) check(sv_matrix_scale(m.get(), 1.0 / scale));
    sv_spot_estimate* spot = nullptr;
    check(sv_spot_from_matrix(m.get(), static_cast<std::size_t>(k_n), 0.0, &spot));
    return SpotPtr(spot);
}

int cmd_test(const std::string& matrix_file, long long k_n, double scale, const std::string& kinds,
             const std::string& out) {
    SpotPtr spot = load_estimate(matrix_file, k_n, scale);
    std::vector<sv_test_kind> selected;
    for (const auto& k : split_list(kinds)) {
        std::string up;
        for (char c : k) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (up == "ALL") selected = {SV_TEST_BJYZ, SV_TEST_LW, SV_TEST_J};
        else if (up == "BJYZ") selected.push_back(SV_TEST_BJYZ);
        else if (up == "LW") selected.push_back(SV_TEST_LW);
        else if (up == "J") selected.push_back(SV_TEST_J);
        else config_error("unknown test '" + k + "'");
    }
    std::ostringstream rows;
    rows << sv_test_report_csv_header() << '\n';
    for (sv_test_kind kind : selected) {
        // BJYZ is undefined for z_n >= 1; skip it silently under "all".
        if (kind == SV_TEST_BJYZ && selected.size() > 1 && sv_spot_z(spot.get()) >= 1.0) continue;
        sv_test_report report{};
        check(sv_run_test(kind, spot.get(), &report));
        char buf[256];
        check(sv_test_report_csv(&report, buf, sizeof(buf)));
        rows << buf << '\n';
    }
    if (out.empty()) {
        std::cout << rows.str();
    } else {
        std::ofstream f(out);
        if (!f) config_error("cannot open " + out);
        f << rows.str();
    }
    return 0;
}

int cmd_esd_matrix(const std::string& matrix_file, long long k_n, double scale, const std::string& out) {
    SpotPtr spot = load_estimate(matrix_file, k_n, scale);
    sv_matrix* raw = nullptr;
    check(sv_spot_matrix(spot.get(), &raw));
    MatrixPtr m(raw);
    sv_spectrum* rs = nullptr;
    check(sv_eigenvalues_sym(m.get(), &rs));
    SpectrumPtr spectrum(rs);
    const double y = sv_spot_z(spot.get());
    double ks = 0.0;
    check(sv_ks_distance_mp(spectrum.get(), y, 1.0, &ks));
    const std::string file = out.empty() ? "esd.csv" : out;
    check(sv_spectrum_write_esd_csv(spectrum.get(), y, 1.0, file.c_str()));
    std::cout << "wrote " << file << " (p=" << sv_spectrum_size(spectrum.get()) << ", ks=" << ks << ")\n";
    return 0;
}

int cmd_esd_figure(const Settings& s, std::uint64_t seed, const std::string& out_dir) {
    auto kv = s.merged();
    kv["seed"] = std::to_string(seed);
    kv.erase("s");
    kv.erase("low");
    ConfigPtr cfg = make_config(kv, {});
    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    std::vector<double> ks(64);
    const auto p_values = kv.count("p_list") ? split_list(kv["p_list"]) : std::vector<std::string>{"34", "68", "102"};
    ks.resize(std::max<std::size_t>(p_values.size(), 1));
    check(sv_run_esd_figure(cfg.get(), dir.c_str(), ks.data(), ks.size()));
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        std::cout << "esd_p" << p_values[i] << ".csv ks=" << ks[i] << '\n';
    }
    return 0;
}

std::vector<SummaryPtr> run_grid(const std::map<std::string, std::string>& kv, const std::string& r1_list,
                                 const std::string& s_list, bool power) {
    std::vector<SummaryPtr> runs;
    const auto r1s = split_list(r1_list);
    const auto ss = power ? split_list(s_list) : std::vector<std::string>{""};
    if (r1s.empty()) config_error("--r1 needs at least one value");
    if (power && ss.empty()) config_error("--s needs at least one value");
    for (const auto& s : ss) {
        for (const auto& r1 : r1s) {
            ConfigPtr cfg = make_config(kv, {"r1", "s"});
            check(sv_mc_config_set(cfg.get(), "r1", r1.c_str()));
            sv_mc_summary* raw = nullptr;
            if (power) {
                check(sv_mc_config_set(cfg.get(), "s", s.c_str()));
                check(sv_run_power_experiment(cfg.get(), &raw));
            } else {
                check(sv_mc_config_clear_alternative(cfg.get()));
                check(sv_run_size_experiment(cfg.get(), &raw));
            }
            runs.emplace_back(raw);
            std::cerr << (power ? "power s=" + s + " " : std::string("size ")) << "r1=" << r1 << " done\n";
        }
    }
    return runs;
}

int cmd_mc(const Settings& settings, bool power, std::uint64_t seed, const std::string& out_dir) {
    auto kv = settings.merged();
    kv["seed"] = std::to_string(seed);
    const std::string r1_list = kv.count("r1") ? kv["r1"] : (power ? "0,0.0002,0.0004" : "0,0.0004,0.0008");
    const std::string s_list = kv.count("s") ? kv["s"] : "0.45,0.6,0.75";
    if (!power) kv.erase("low");
    const auto runs = run_grid(kv, r1_list, s_list, power);
    std::vector<const sv_mc_summary*> ptrs;
    for (const auto& r : runs) ptrs.push_back(r.get());
    const std::string file = out_file(out_dir, power ? "power_table.csv" : "size_table.csv");
    if (power) {
        check(sv_write_power_table(ptrs.data(), ptrs.size(), file.c_str()));
    } else {
        check(sv_write_size_table(ptrs.data(), ptrs.size(), file.c_str()));
    }
    std::ifstream in(file);
    std::cout << in.rdbuf();
    std::cerr << "wrote " << file << '\n';
    return 0;
}

int cmd_qq(const Settings& settings, std::uint64_t seed, const std::string& out_dir) {
    auto kv = settings.merged();
    kv["seed"] = std::to_string(seed);
    kv.erase("s");
    kv.erase("low");
    ConfigPtr cfg = make_config(kv, {});
    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    std::size_t count = 0;
    std::vector<double> corr(64);
    check(sv_run_qq_figure(cfg.get(), dir.c_str(), corr.data(), corr.size(), &count));
    std::cout << "wrote " << count << " Q-Q series to " << dir << "; correlations:";
    for (std::size_t i = 0; i < count; ++i) std::cout << ' ' << corr[i];
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spotvol: spectral analysis and tests for high-dimensional spot volatility matrices"};
    app.require_subcommand(1);

    // simulate
    Settings sim_settings;
    std::uint64_t sim_seed = 0;
    std::size_t sim_n = 4680, sim_p = 34;
    std::string sim_out = "path.csv";
    auto* sim = app.add_subcommand("simulate", "simulate a log-price path and write it as CSV");
    sim->add_option("--config", sim_settings.config_file, "flat key = value configuration file");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--n", sim_n, "observations over [0,1]");
    sim->add_option("--p", sim_p, "number of assets");
    add_model_flags(sim, sim_settings);
    add_setting(sim, sim_settings, "--r1", "r1", "sine amplitude of the deterministic model");
    sim->add_option("--out", sim_out, "output CSV (t,x1,...,xp)");

    // spot
    std::string spot_path;
    double spot_t = 0.0, spot_scale = 1.0;
    long long spot_k = 0;
    std::string spot_out = "spot.csv";
    auto* spot = app.add_subcommand("spot", "realized spot volatility matrix from a path CSV");
    spot->add_option("--path", spot_path, "path CSV written by `simulate`")->required();
    spot->add_option("--t", spot_t, "estimation time");
    spot->add_option("--k-n", spot_k, "window length (default floor(sqrt(n)))");
    spot->add_option("--normalize", spot_scale, "divide the estimate by this scale");
    spot->add_option("--out", spot_out, "output matrix CSV");

    // esd
    Settings esd_settings;
    std::string esd_matrix, esd_out;
    long long esd_k = 0;
    double esd_scale = 1.0;
    std::uint64_t esd_seed = 0;
    auto* esd = app.add_subcommand("esd", "ESD against the Marcenko-Pastur law");
    esd->add_option("--matrix", esd_matrix, "spot estimate CSV; omit to simulate one path per p");
    esd->add_option("--normalize", esd_scale, "divide the matrix by this scale");
    esd->add_option("--seed", esd_seed, "master seed for simulated figures");
    esd->add_option("--out", esd_out, "output file (--matrix) or directory");
    add_mc_flags(esd, esd_settings);
    add_setting(esd, esd_settings, "--r1", "r1", "sine amplitude of the deterministic model");
    esd->callback([&] {
        if (auto it = esd_settings.flags.find("k_n"); it != esd_settings.flags.end()) {
            esd_k = static_cast<long long>(to_real("k-n", it->second));
        }
    });

    // test
    std::string test_matrix, test_kinds = "all", test_out;
    long long test_k = 0;
    double test_scale = 1.0;
    auto* test = app.add_subcommand("test", "BJYZ / LW / J tests on a spot estimate CSV");
    test->add_option("--matrix", test_matrix, "spot estimate CSV")->required();
    test->add_option("--k-n", test_k, "window length used for the estimate")->required();
    test->add_option("--kind", test_kinds, "BJYZ, LW, J or all (comma-separated)");
    test->add_option("--normalize", test_scale, "divide the matrix by the null scale first");
    test->add_option("--out", test_out, "write the report CSV here instead of stdout");

    // mc-size / mc-power / qq
    Settings size_settings, power_settings, qq_settings;
    std::uint64_t size_seed = 0, power_seed = 0, qq_seed = 0;
    std::string size_out, power_out, qq_out;
    auto* mc_size = app.add_subcommand("mc-size", "empirical size table (size_table.csv)");
    add_mc_flags(mc_size, size_settings);
    add_setting(mc_size, size_settings, "--r1", "r1", "comma-separated r1 values (default 0,0.0004,0.0008)");
    mc_size->add_option("--seed", size_seed, "master seed")->required();
    mc_size->add_option("--out-dir", size_out, "output directory");

    auto* mc_power = app.add_subcommand("mc-power", "empirical power table (power_table.csv)");
    add_mc_flags(mc_power, power_settings);
    add_setting(mc_power, power_settings, "--r1", "r1", "comma-separated r1 values (default 0,0.0002,0.0004)");
    add_setting(mc_power, power_settings, "--s", "s", "comma-separated alternative fractions (default 0.45,0.6,0.75)");
    add_setting(mc_power, power_settings, "--low", "low", "variance of the lower block (default 0.0004)");
    mc_power->add_option("--seed", power_seed, "master seed")->required();
    mc_power->add_option("--out-dir", power_out, "output directory");

    auto* qq = app.add_subcommand("qq", "Q-Q pairs of null z-scores (qq_<test>_<pbar>.csv)");
    add_mc_flags(qq, qq_settings);
    add_setting(qq, qq_settings, "--r1", "r1", "sine amplitude (default 0)");
    qq->add_option("--seed", qq_seed, "master seed")->required();
    qq->add_option("--out-dir", qq_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(sim_settings, sim_seed, sim_n, sim_p, sim_out);
        if (*spot) return cmd_spot(spot_path, spot_t, spot_k, spot_scale, spot_out);
        if (*esd) {
            if (!esd_matrix.empty()) return cmd_esd_matrix(esd_matrix, esd_k, esd_scale, esd_out);
            return cmd_esd_figure(esd_settings, esd_seed, esd_out);
        }
        if (*test) return cmd_test(test_matrix, test_k, test_scale, test_kinds, test_out);
        if (*mc_size) return cmd_mc(size_settings, false, size_seed, size_out);
        if (*mc_power) return cmd_mc(power_settings, true, power_seed, power_out);
        if (*qq) return cmd_qq(qq_settings, qq_seed, qq_out);
    } catch (const ApiFailure& f) {
        std::cerr << "error: " << f.message << '\n';
        if (f.status == SV_ERR_NUMERIC) return kExitNumeric;
        if (f.status == SV_ERR_CONFIG || f.status == SV_ERR_IO || f.status == SV_ERR_ARGUMENT) return kExitConfig;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
