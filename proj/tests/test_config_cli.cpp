#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "soc/cli.hpp"
#include "soc/config.hpp"
#include "soc/error.hpp"
#include "soc/rng.hpp"

using namespace soc;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "soc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("soc_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("config file with sections, comments and overrides") {
    std::istringstream in(
        "# run settings\n"
        "[lattice]\n"
        "n = 100\n"
        "w = 0.5   ; half variance\n"
        "seed = 42\n"
        "tie_break = random\n"
        "\n"
        "[run]\n"
        "equilibration_steps = 1000\n"
        "ensemble_runs = 3\n"
        "[series]\n"
        "lambda = 2e-5\n");
    RunConfig cfg;
    cfg.read(in);
    CHECK(cfg.lattice.n_intervals == 100);
    CHECK(cfg.lattice.variance_w == 0.5);
    CHECK(cfg.lattice.seed == 42);
    CHECK(cfg.lattice.tie_break == TieBreak::RandomAmongTies);
    CHECK(cfg.equilibration_steps == 1000);
    CHECK(cfg.ensemble_runs == 3);
    CHECK(cfg.lambda == 2e-5);
    cfg.set("gains.bin_width", "0.1");
    CHECK(cfg.gains_bin_width == 0.1);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.set("lattice.colour", "red"), ConfigError);
    CHECK_THROWS_AS(cfg.set("lattice.n", "many"), ConfigError);
    CHECK_THROWS_AS(cfg.set("lattice.n", "-3"), ConfigError);
    CHECK_THROWS_AS(cfg.set("run.ensemble_runs", "2.5"), ConfigError);
    CHECK_THROWS_AS(cfg.set("lattice.tie_break", "highest"), ConfigError);
    std::istringstream bad("[lattice\nn = 5\n");
    CHECK_THROWS_AS(cfg.read(bad), ConfigError);
    std::istringstream no_eq("[lattice]\nn 5\n");
    CHECK_THROWS_AS(cfg.read(no_eq), ConfigError);
    RunConfig zero;
    zero.lambda = 0.0;
    CHECK_THROWS_AS(zero.validate(), ConfigError);
    CHECK_THROWS_AS(RunConfig().load("/nonexistent/soc.ini"), ConfigError);
}

TEST_CASE("config hash covers numeric settings only") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.jobs = 8;
    b.out_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    b.lattice.seed = 2;
    CHECK(a.hash() != b.hash());
    RunConfig c;
    c.set("run.equilibration_steps", "2e5");
    CHECK(c.equilibration_steps == 200000);
    CHECK(c.hash() == a.hash());
    CHECK(a.canonical().find("lattice.n=780\n") != std::string::npos);
}

TEST_CASE("simulate twice gives byte-identical files") {
    const auto d1 = scratch("sim1"), d2 = scratch("sim2");
    for (const auto& d : {d1, d2}) {
        const auto r = cli({"simulate", "--seed", "9", "--n", "120", "--steps", "5000", "--hit-log", "--out-dir",
                            d.string()});
        REQUIRE(r.code == 0);
        CHECK(r.err.empty());
    }
    const auto a = dir_contents(d1), b = dir_contents(d2);
    CHECK(a.size() == 9);
    CHECK(a == b);
    CHECK(a.count("snapshot.socl") == 1);
    CHECK(a.at("signal_trace.csv").rfind("s,V\n", 0) == 0);

    const auto m = read_json(d1 / "simulate.manifest.json");
    CHECK(m["master_seed"] == 9);
    CHECK(m["per_run_seeds"][0] == 9);
    CHECK(m["artifacts"].size() == 8);
}

TEST_CASE("avalanche outputs do not depend on the worker count") {
    const auto d1 = scratch("av1"), d3 = scratch("av3");
    REQUIRE(cli({"avalanches", "--seed", "3", "--runs", "6", "--steps", "20000", "--jobs", "1", "--out-dir",
                 d1.string()})
                .code == 0);
    REQUIRE(cli({"avalanches", "--seed", "3", "--runs", "6", "--steps", "20000", "--jobs", "3", "--out-dir",
                 d3.string()})
                .code == 0);
    CHECK(dir_contents(d1) == dir_contents(d3));
    const auto fit = read_json(d1 / "powerlaw_fit.json");
    for (const char* key : {"amplitude", "exponent", "lambda_min", "lambda_max", "chi2", "dof", "n_bins_used"})
        CHECK(fit.contains(key));
    const auto m = read_json(d1 / "avalanches.manifest.json");
    REQUIRE(m["per_run_seeds"].size() == 6);
    CHECK(m["per_run_seeds"][4] == derive_seed(3, 4));
}

TEST_CASE("gains with one run has zero standard errors") {
    const auto d = scratch("gains1");
    const auto r = cli({"gains", "--runs", "1", "--steps", "20000", "--out-dir", d.string()});
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(d / "gains_histogram.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "r_center,mean_count,stderr");
    int rows = 0;
    while (std::getline(csv, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 201);
    CHECK(read_json(d / "gaussian_fits.json").contains("center"));
}

TEST_CASE("series and garch-fit with historical windows") {
    const auto d = scratch("series");
    fs::create_directories(d);
    {
        std::ofstream bars(d / "bars_in.csv");
        bars << "date,time,open,high,low,close,volume\n";
        Rng rng(4);
        double p = 2200.0;
        for (int i = 0; i < 2000; ++i) {
            const double next = p * std::exp(4e-4 * rng.normal());
            const int day = 1 + i / 390, minute = i % 390;
            char row[128];
            std::snprintf(row, sizeof row, "2007-03-%02d,%02d:%02d,%.4f,%.4f,%.4f,%.4f,%d\n", day, 9 + (30 + minute) / 60,
                          (30 + minute) % 60, p, std::max(p, next) + 0.1, std::min(p, next) - 0.1, next, 100 + i);
            bars << row;
            p = next;
        }
    }
    const auto bars = (d / "bars_in.csv").string();
    auto r = cli({"series", "--steps", "20000", "--sets", "2", "--bars", bars, "--offsets", "0,500", "--out-dir",
                  d.string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"series_L1.csv", "series_L2.csv", "series_N1.csv", "series_N2.csv"})
        CHECK(fs::exists(d / f));
    std::istringstream n1(slurp(d / "series_N1.csv"));
    int lines = 0;
    for (std::string line; std::getline(n1, line);) ++lines;
    CHECK(lines == 1 + 781);

    r = cli({"garch-fit", "--steps", "20000", "--sets", "1", "--bars", bars, "--offsets", "100", "--out-dir",
             d.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Set 1 L") != std::string::npos);
    CHECK(fs::exists(d / "garch_table_set1.txt"));
    const auto fits = read_json(d / "garch_fits.json");
    REQUIRE(fits.size() == 2);
    CHECK(fits[1]["series_id"] == "N1");
    CHECK(fits[1]["n_obs"] == 780);

    r = cli({"series", "--bars", bars, "--offsets", "1900", "--out-dir", d.string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: InputError: ", 0) == 0);
}

TEST_CASE("ingest reports located errors") {
    const auto d = scratch("ingest");
    fs::create_directories(d);
    {
        std::ofstream f(d / "bad.csv");
        f << "date,time,open,high,low,close,volume\n"
          << "2007-03-01,09:31,1,1,1,1,0\n"
          << "2007-03-01,09:32,1,1,1,-1,0\n";
    }
    auto r = cli({"ingest", "--input", (d / "bad.csv").string(), "--out-dir", d.string()});
    CHECK(r.code == 1);
    CHECK(r.err == "error: ValidationError: line 3: prices must be positive\n");

    r = cli({"ingest", "--input", (d / "bad.csv").string(), "--lenient", "--out-dir", d.string()});
    REQUIRE(r.code == 0);
    const auto rep = read_json(d / "ingest_report.json");
    CHECK(rep["rows"] == 2);
    CHECK(rep["bars"] == 1);
    CHECK(rep["errors"][0]["line"] == 3);
    CHECK(slurp(d / "bars.csv") == "date,time,open,high,low,close,volume\n2007-03-01,09:31:00,1,1,1,1,0\n");
}

TEST_CASE("failures print one machine-readable line") {
    auto r = cli({"simulate", "--n", "2", "--out-dir", scratch("bad").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: ConfigError: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    r = cli({"simulate", "--set", "lattice.colour=red"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: ConfigError: ", 0) == 0);

    r = cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: UsageError: ", 0) == 0);

    r = cli({"report", "--out-dir", scratch("empty_report").string()});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: IoError: ", 0) == 0);

    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("config file, overrides and SOC_OUT_DIR") {
    const auto d = scratch("env");
    fs::create_directories(d);
    {
        std::ofstream f(d / "run.ini");
        f << "[lattice]\nn = 60\nseed = 5\n[run]\nequilibration_steps = 300\n";
    }
    ::setenv("SOC_OUT_DIR", (d / "out").string().c_str(), 1);
    auto r = cli({"simulate", "--config", (d / "run.ini").string(), "--set", "run.entropy_every=50"});
    ::unsetenv("SOC_OUT_DIR");
    REQUIRE(r.code == 0);
    const auto m = read_json(d / "out" / "simulate.manifest.json");
    CHECK(m["config"]["lattice.n"] == "60");
    CHECK(m["config"]["run.entropy_every"] == "50");
    CHECK(m["master_seed"] == 5);
    std::istringstream ent(slurp(d / "out" / "entropy.csv"));
    int rows = -1;
    for (std::string line; std::getline(ent, line);) ++rows;
    CHECK(rows == 7);  // s = 0, 50, ..., 300

    r = cli({"simulate", "--config", (d / "run.ini").string(), "--seed", "6", "--out-dir", (d / "flag").string()});
    REQUIRE(r.code == 0);
    CHECK(read_json(d / "flag" / "simulate.manifest.json")["master_seed"] == 6);
}

TEST_CASE("report merges command manifests") {
    const auto d = scratch("report");
    const std::vector<std::string> common{"--seed", "4", "--n", "100", "--steps", "3000", "--runs", "3",
                                          "--out-dir", d.string()};
    for (const char* cmd : {"simulate", "avalanches", "gains"}) {
        std::vector<std::string> args{cmd};
        args.insert(args.end(), common.begin(), common.end());
        REQUIRE(cli(args).code == 0);
    }
    std::vector<std::string> args{"report"};
    args.insert(args.end(), common.begin(), common.end());
    REQUIRE(cli(args).code == 0);
    const auto m = read_json(d / "manifest.json");
    CHECK(m["consistent"] == true);
    CHECK(m["master_seed"] == 4);
    CHECK(m["config_hash"].get<std::string>().size() == 16);
    CHECK(m["commands"].size() == 3);
    CHECK(m["commands"]["avalanches"]["per_run_seeds"].size() == 3);
    CHECK(m["artifacts"].size() == 15);
    CHECK(m["versions"].contains("soc"));
}
