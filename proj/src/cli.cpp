#include "soc/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "soc/analysis.hpp"
#include "soc/bars.hpp"
#include "soc/config.hpp"
#include "soc/ensemble.hpp"
#include "soc/error.hpp"
#include "soc/gains.hpp"
#include "soc/garch.hpp"
#include "soc/io.hpp"
#include "soc/series.hpp"

namespace soc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* tool_version = "1.0.0";

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> steps;
    std::optional<std::uint64_t> runs;
    std::optional<std::uint32_t> n;
    std::optional<double> w;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Run configuration file (sectioned key = value)");
    cmd->add_option("--seed", o.seed, "Master seed (lattice.seed)");
    cmd->add_option("--out-dir", o.out_dir, "Output directory (default $SOC_OUT_DIR or ./soc_out)");
    cmd->add_option("--jobs", o.jobs, "Parallel ensemble workers");
    cmd->add_option("--steps", o.steps, "Updates per run (run.equilibration_steps)");
    cmd->add_option("--runs", o.runs, "Ensemble size (run.ensemble_runs)");
    cmd->add_option("--n", o.n, "Lattice intervals n (lattice.n)");
    cmd->add_option("--w", o.w, "Draw variance w (lattice.w)");
    cmd->add_option("--set", o.overrides, "Override section.key=value (repeatable)");
}

RunConfig resolve(const CommonOptions& o) {
    RunConfig cfg;
    bool dir_from_config = false;
    if (!o.config_path.empty()) {
        const fs::path default_dir = cfg.out_dir;
        cfg.load(o.config_path);
        dir_from_config = cfg.out_dir != default_dir;
    }
    if (!dir_from_config) {
        if (const char* env = std::getenv("SOC_OUT_DIR"); env && *env) cfg.out_dir = env;
    }
    for (const auto& ov : o.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + ov + "'");
        cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (o.seed) cfg.lattice.seed = *o.seed;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (o.steps) cfg.equilibration_steps = *o.steps;
    if (o.runs) cfg.ensemble_runs = *o.runs;
    if (o.n) cfg.lattice.n_intervals = *o.n;
    if (o.w) cfg.lattice.variance_w = *o.w;
    cfg.validate();
    return cfg;
}

/// Collects artifacts of one command and writes <command>.manifest.json.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {}

    std::ofstream open(const std::string& name) {
        artifacts_.push_back(name);
        return io::open_out(cfg_.out_dir / name);
    }
    void json_file(const std::string& name, const json& j) {
        artifacts_.push_back(name);
        io::write_json(cfg_.out_dir / name, j);
    }
    void seed(std::uint64_t s) { seeds_.push_back(s); }

    void write() const {
        json config = json::object();
        std::istringstream lines(cfg_.canonical());
        for (std::string line; std::getline(lines, line);) {
            const auto eq = line.find('=');
            config[line.substr(0, eq)] = line.substr(eq + 1);
        }
        json m = {{"command", command_},
                  {"config_hash", cfg_.hash()},
                  {"master_seed", cfg_.lattice.seed},
                  {"per_run_seeds", seeds_},
                  {"artifacts", artifacts_},
                  {"config", config},
                  {"versions", {{"soc", tool_version}, {"snapshot_format", io::snapshot_version}}}};
        io::write_json(cfg_.out_dir / (command_ + ".manifest.json"), m);
    }

private:
    std::string command_;
    const RunConfig& cfg_;
    std::vector<std::string> artifacts_;
    std::vector<std::uint64_t> seeds_;
};

HitWindow parse_window(const std::string& text) {
    std::vector<std::uint64_t> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) {
        try {
            parts.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw ConfigError("--hit-window expects s_min:s_max:j_min:j_max");
        }
    }
    if (parts.size() != 4) throw ConfigError("--hit-window expects s_min:s_max:j_min:j_max");
    return {parts[0], parts[1], static_cast<std::uint32_t>(parts[2]), static_cast<std::uint32_t>(parts[3])};
}

// -- simulate -------------------------------------------------------------------

struct SimulateOptions {
    std::optional<std::string> hit_window;
    bool hit_log = false;
};

void cmd_simulate(const RunConfig& cfg, const SimulateOptions& opt, std::ostream& out) {
    Manifest manifest("simulate", cfg);
    manifest.seed(cfg.lattice.seed);
    Lattice lattice = Lattice::init_random(cfg.lattice);

    SignalTraceRecorder trace;
    EntropyRecorder entropy(cfg.entropy_every);
    std::optional<HitLogRecorder> hits;
    if (opt.hit_window) hits.emplace(parse_window(*opt.hit_window));
    else if (opt.hit_log) hits.emplace();
    std::vector<Recorder*> recorders{&trace, &entropy};
    if (hits) recorders.push_back(&*hits);
    run(lattice, cfg.equilibration_steps, recorders);

    const auto snap = io::Snapshot::of(lattice);
    { auto f = manifest.open("snapshot.csv"); io::write_snapshot_csv(f, snap); }
    { auto f = manifest.open("snapshot.socl"); io::write_snapshot_binary(f, snap); }
    { auto f = manifest.open("signal_trace.csv"); io::write_signal_trace(f, trace.trace()); }
    const GapFunction gap = gap_function(trace.trace());
    { auto f = manifest.open("gap.csv"); io::write_gap(f, gap); }
    const AvalancheRecord rec = avalanches(gap, trace.trace().values.size());
    { auto f = manifest.open("avalanches.csv"); io::write_avalanches(f, rec); }
    { auto f = manifest.open("entropy.csv"); io::write_entropy(f, entropy.samples()); }
    { auto f = manifest.open("activity.csv"); io::write_activity(f, activity_histogram(lattice.state())); }
    if (hits) {
        auto f = manifest.open("hit_log.csv");
        io::write_hit_log(f, hits->entries());
    }
    manifest.write();
    const auto gs = lattice.global_signal();
    out << "simulate: " << cfg.equilibration_steps << " updates, V=" << io::fmt(gs.value)
        << " at j=" << gs.site << ", G=" << io::fmt(gap.breakpoints.back().level) << ", avalanches="
        << rec.size() << "\n";
}

// -- avalanches -----------------------------------------------------------------

struct AvalancheAcc {
    SizeHistogramAccumulator hist;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;  // (run, avalanches)
    std::optional<std::pair<GapFunction, AvalancheRecord>> first;

    void merge(AvalancheAcc& other) {
        hist.merge(other.hist);
        counts.insert(counts.end(), other.counts.begin(), other.counts.end());
        if (other.first) first = std::move(other.first);
    }
};

void cmd_avalanches(const RunConfig& cfg, std::ostream& out) {
    Manifest manifest("avalanches", cfg);
    auto acc = ensemble_reduce(
        cfg.ensemble_runs, cfg.jobs,
        [&] { return AvalancheAcc{SizeHistogramAccumulator(cfg.avalanche_bin_width, cfg.avalanche_bins), {}, {}}; },
        [&](AvalancheAcc& a, std::uint64_t i) {
            LatticeConfig lc = cfg.lattice;
            lc.seed = derive_seed(cfg.lattice.seed, i);
            Lattice lattice = Lattice::init_random(lc);
            SignalTraceRecorder trace;
            Recorder* recs[] = {&trace};
            run(lattice, cfg.equilibration_steps, recs);
            GapFunction gap = gap_function(trace.trace());
            AvalancheRecord rec = avalanches(gap, trace.trace().values.size());
            a.hist.add_run(rec);
            a.counts.emplace_back(i, rec.size());
            if (i == 0) a.first.emplace(std::move(gap), std::move(rec));
        });
    std::sort(acc.counts.begin(), acc.counts.end());
    for (std::uint64_t i = 0; i < cfg.ensemble_runs; ++i) manifest.seed(derive_seed(cfg.lattice.seed, i));

    const SizeHistogram hist = acc.hist.result();
    { auto f = manifest.open("avalanche_sizes.csv"); io::write_size_histogram(f, hist); }
    if (acc.first) {
        { auto f = manifest.open("gap_run0.csv"); io::write_gap(f, acc.first->first); }
        { auto f = manifest.open("avalanches_run0.csv"); io::write_avalanches(f, acc.first->second); }
    }
    {
        auto f = manifest.open("avalanche_counts.csv");
        f << "run,seed,avalanches\n";
        for (auto [run_index, count] : acc.counts)
            f << run_index << ',' << derive_seed(cfg.lattice.seed, run_index) << ',' << count << '\n';
    }
    const PowerLawFit fit = fit_power_law(hist, {cfg.fit_min, cfg.fit_max});
    json j = io::to_json(fit);
    j["integrated_count_fit_range"] = integrate_count(fit, {cfg.fit_min, cfg.fit_max});
    j["n_runs"] = hist.n_runs;
    manifest.json_file("powerlaw_fit.json", j);
    manifest.write();
    out << "avalanches: " << hist.n_runs << " runs, dN/dL = " << io::fmt(fit.amplitude) << " L^"
        << io::fmt(fit.exponent) << " over [" << io::fmt(cfg.fit_min) << ", " << io::fmt(cfg.fit_max) << "]\n";
}

// -- gains ------------------------------------------------------------------------

void cmd_gains(const RunConfig& cfg, std::ostream& out) {
    Manifest manifest("gains", cfg);
    for (std::uint64_t i = 0; i < cfg.ensemble_runs; ++i) manifest.seed(derive_seed(cfg.lattice.seed, i));
    const GainsHistogram hist = ensemble_gains(cfg.lattice, cfg.ensemble_runs, cfg.equilibration_steps,
                                               cfg.gains_bin_width, {cfg.gains_r_min, cfg.gains_r_max}, cfg.jobs);
    { auto f = manifest.open("gains_histogram.csv"); io::write_gains_histogram(f, hist); }
    const OverlayScaling overlay{cfg.overlay_x, cfg.overlay_y};
    { auto f = manifest.open("gains_overlay.csv"); io::write_gains_histogram(f, apply_overlay(hist, overlay)); }

    json fits = json::object();
    std::optional<GaussianFit> center;
    try {
        center = fit_gaussian(hist, GaussianRegion::center(cfg.center_points));
        fits["center"] = io::to_json(*center);
        fits["tail_excess_3sigma"] = tail_excess(hist, *center, 3.0 * center->sigma);
    } catch (const FitError& e) {
        fits["center"] = {{"error", e.what()}};
    }
    try {
        fits["tails"] = io::to_json(fit_gaussian(hist, GaussianRegion::tails(cfg.tail_points)));
    } catch (const FitError& e) {
        fits["tails"] = {{"error", e.what()}};
    }
    fits["overlay"] = {{"x_factor", overlay.x_factor}, {"y_factor", overlay.y_factor}};
    manifest.json_file("gaussian_fits.json", fits);
    manifest.write();
    out << "gains: " << hist.n_samples << " samples";
    if (center) out << ", center sigma=" << io::fmt(center->sigma);
    out << "\n";
}

// -- series / garch-fit -----------------------------------------------------------

struct SeriesOptions {
    std::uint64_t sets = 1;
    std::string bars_path;
    std::string columns = "date,time,open,high,low,close,volume";
    std::vector<std::size_t> offsets;
    std::optional<std::size_t> length;
    std::string gap_policy = "ignore";
};

ColumnMap column_map(const std::string& spec) {
    if (spec == "finam") return ColumnMap::finam();
    return ColumnMap::parse(spec);
}

struct NamedSeries {
    std::string id;
    ReturnsSeries returns;  // lattice series already rescaled by λ
    double p0 = 1.0;
};

std::vector<NamedSeries> lattice_series(const RunConfig& cfg, std::uint64_t sets, Manifest& manifest) {
    std::vector<NamedSeries> out;
    for (std::uint64_t i = 0; i < sets; ++i) {
        LatticeConfig lc = cfg.lattice;
        lc.seed = derive_seed(cfg.lattice.seed, i);
        manifest.seed(lc.seed);
        Lattice lattice = Lattice::init_random(lc);
        run(lattice, cfg.equilibration_steps);
        auto r = ReturnsSeries::simulated(lattice.state().returns, lc.seed, lattice.step(), lc.variance_w);
        out.push_back({"L" + std::to_string(i + 1), rescale(r, cfg.lambda), cfg.p0});
    }
    return out;
}

std::vector<NamedSeries> historical_series(const RunConfig& cfg, const SeriesOptions& opt) {
    std::vector<NamedSeries> out;
    if (opt.bars_path.empty()) {
        if (!opt.offsets.empty()) throw ConfigError("--offsets given without --bars");
        return out;
    }
    const auto bars = ingest_minutes(opt.bars_path, column_map(opt.columns));
    GapPolicy policy;
    if (opt.gap_policy == "ignore") policy = GapPolicy::Ignore;
    else if (opt.gap_policy == "skip-session-breaks") policy = GapPolicy::SkipSessionBreaks;
    else throw ConfigError("--gap-policy must be 'ignore' or 'skip-session-breaks'");
    const std::size_t length = opt.length.value_or(cfg.lattice.n_intervals);
    std::vector<std::size_t> offsets = opt.offsets;
    if (offsets.empty()) offsets.push_back(0);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        auto r = historical_returns(bars, offsets[k], length, policy, fs::path(opt.bars_path).filename().string());
        out.push_back({"N" + std::to_string(k + 1), std::move(r), bars[offsets[k]].close});
    }
    return out;
}

void cmd_series(const RunConfig& cfg, const SeriesOptions& opt, std::ostream& out) {
    Manifest manifest("series", cfg);
    auto all = lattice_series(cfg, opt.sets, manifest);
    auto hist = historical_series(cfg, opt);
    all.insert(all.end(), std::make_move_iterator(hist.begin()), std::make_move_iterator(hist.end()));
    for (const auto& s : all) {
        const PriceSeries p = prices(s.returns, s.p0);
        const VolatilitySeries v = volatility(s.returns);
        auto f = manifest.open("series_" + s.id + ".csv");
        io::write_series(f, s.returns, p, v);
        out << "series " << s.id << ": " << s.returns.size() << " returns, final price " << io::fmt(p.values.back())
            << "\n";
    }
    manifest.write();
}

void cmd_garch_fit(const RunConfig& cfg, const SeriesOptions& opt, std::ostream& out) {
    Manifest manifest("garch-fit", cfg);
    const auto lat = lattice_series(cfg, opt.sets, manifest);
    const auto hist = historical_series(cfg, opt);
    std::vector<garch::Fit> lat_fits, hist_fits;
    json all = json::array();
    for (const auto& s : lat) {
        lat_fits.push_back(garch::fit(s.returns, cfg.garch, s.id));
        manifest.json_file("garch_" + s.id + ".json", io::to_json(lat_fits.back()));
        all.push_back(io::to_json(lat_fits.back()));
    }
    for (const auto& s : hist) {
        hist_fits.push_back(garch::fit(s.returns, cfg.garch, s.id));
        manifest.json_file("garch_" + s.id + ".json", io::to_json(hist_fits.back()));
        all.push_back(io::to_json(hist_fits.back()));
    }
    manifest.json_file("garch_fits.json", all);
    const std::size_t pairs = std::min(lat_fits.size(), hist_fits.size());
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::string label = "Set " + std::to_string(i + 1);
        const std::string table = garch::fit_report(lat_fits[i], hist_fits[i], label);
        auto f = manifest.open("garch_table_set" + std::to_string(i + 1) + ".txt");
        f << table;
        out << table;
    }
    if (pairs == 0) {
        for (const auto& f : lat_fits)
            out << f.series_id << ": " << garch::format_cell(0, f.params.alpha0, f.std_errors[0], f.t_stats[0]) << " "
                << garch::format_cell(1, f.params.alpha1, f.std_errors[1], f.t_stats[1]) << " "
                << garch::format_cell(2, f.params.beta1, f.std_errors[2], f.t_stats[2])
                << (f.converged ? "" : " (not converged)") << "\n";
    }
    manifest.write();
}

// -- ingest -----------------------------------------------------------------------

struct IngestOptions {
    std::string input;
    std::string columns = "date,time,open,high,low,close,volume";
    std::string delimiter;
    bool no_header = false;
    bool lenient = false;
};

void cmd_ingest(const RunConfig& cfg, const IngestOptions& opt, std::ostream& out) {
    Manifest manifest("ingest", cfg);
    ColumnMap map = column_map(opt.columns);
    if (!opt.delimiter.empty()) {
        if (opt.delimiter != "," && opt.delimiter != ";") throw ConfigError("--delimiter must be ',' or ';'");
        map.delimiter = opt.delimiter[0];
    }
    if (opt.no_header) map.has_header = false;
    std::ifstream in(opt.input);
    if (!in) throw IoError("cannot open " + opt.input);
    IngestReport report = parse_minutes(in, map);
    if (!opt.lenient && !report.errors.empty()) {
        const auto& e = report.errors.front();
        if (e.kind == "ValidationError") throw ValidationError(e.line, e.message);
        throw ParseError(e.line, e.message);
    }
    { auto f = manifest.open("bars.csv"); export_minutes(f, report.bars); }
    json errors = json::array();
    for (const auto& e : report.errors) errors.push_back({{"line", e.line}, {"kind", e.kind}, {"message", e.message}});
    manifest.json_file("ingest_report.json", {{"source", opt.input},
                                              {"rows", report.rows},
                                              {"bars", report.bars.size()},
                                              {"errors", errors}});
    manifest.write();
    out << "ingest: " << report.rows << " rows, " << report.bars.size() << " bars, " << report.errors.size()
        << " errors\n";
}

// -- report -----------------------------------------------------------------------

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    if (!fs::is_directory(cfg.out_dir)) throw IoError("no such output directory " + cfg.out_dir.string());
    std::vector<fs::path> fragments;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() > 14 && name.ends_with(".manifest.json")) fragments.push_back(entry.path());
    }
    std::sort(fragments.begin(), fragments.end());
    if (fragments.empty()) throw InputError("no command manifests in " + cfg.out_dir.string());

    json commands = json::object();
    json artifacts = json::array();
    std::optional<std::string> hash;
    std::optional<std::uint64_t> master;
    bool consistent = true;
    for (const auto& path : fragments) {
        std::ifstream in(path);
        json m = json::parse(in);
        const std::string cmd = m.at("command");
        for (const auto& a : m.at("artifacts")) artifacts.push_back(a);
        if (hash && *hash != m.at("config_hash").get<std::string>()) consistent = false;
        if (master && *master != m.at("master_seed").get<std::uint64_t>()) consistent = false;
        hash = m.at("config_hash").get<std::string>();
        master = m.at("master_seed").get<std::uint64_t>();
        commands[cmd] = {{"config_hash", m.at("config_hash")},
                         {"master_seed", m.at("master_seed")},
                         {"per_run_seeds", m.at("per_run_seeds")},
                         {"artifacts", m.at("artifacts")},
                         {"config", m.at("config")}};
    }
    json manifest = {{"config_hash", consistent ? json(*hash) : json(nullptr)},
                     {"master_seed", consistent ? json(*master) : json(nullptr)},
                     {"consistent", consistent},
                     {"commands", commands},
                     {"artifacts", artifacts},
                     {"versions", {{"soc", tool_version}, {"snapshot_format", io::snapshot_version}}}};
    io::write_json(cfg.out_dir / "manifest.json", manifest);
    out << "report: " << fragments.size() << " command manifests -> " << (cfg.out_dir / "manifest.json").string()
        << (consistent ? "" : " (mixed configurations)") << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Self-organized-critical lattice market model: simulation, criticality analysis and GARCH fits",
                 "soc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    CommonOptions common;
    SimulateOptions sim_opt;
    SeriesOptions series_opt;
    IngestOptions ingest_opt;

    auto* simulate = app.add_subcommand("simulate", "Run one lattice and write snapshot, traces and activity");
    add_common(simulate, common);
    simulate->add_option("--hit-window", sim_opt.hit_window, "Record hits in s_min:s_max:j_min:j_max");
    simulate->add_flag("--hit-log", sim_opt.hit_log, "Record every hit (3 per update)");

    auto* aval = app.add_subcommand("avalanches", "Ensemble avalanche-size distribution and power-law fit");
    add_common(aval, common);

    auto* gains = app.add_subcommand("gains", "Ensemble gains histogram, Gaussian fits and overlay");
    add_common(gains, common);

    auto add_series_opts = [&](CLI::App* cmd) {
        add_common(cmd, common);
        cmd->add_option("--sets", series_opt.sets, "Number of lattice series");
        cmd->add_option("--bars", series_opt.bars_path, "Minute-bar CSV for historical windows");
        cmd->add_option("--columns", series_opt.columns, "Bar column order, or 'finam'");
        cmd->add_option("--offsets", series_opt.offsets, "Historical window start bars")->delimiter(',');
        cmd->add_option("--length", series_opt.length, "Returns per historical window (default n)");
        cmd->add_option("--gap-policy", series_opt.gap_policy, "ignore | skip-session-breaks");
    };
    auto* series = app.add_subcommand("series", "Returns, prices and volatility series (lattice and historical)");
    add_series_opts(series);
    auto* garch_cmd = app.add_subcommand("garch-fit", "GARCH(1,1) fits and lattice-vs-historical tables");
    add_series_opts(garch_cmd);

    auto* ingest = app.add_subcommand("ingest", "Validate minute bars and write a normalized bar store");
    add_common(ingest, common);
    ingest->add_option("--input", ingest_opt.input, "Bar CSV")->required();
    ingest->add_option("--columns", ingest_opt.columns, "Column order, or 'finam'");
    ingest->add_option("--delimiter", ingest_opt.delimiter, "',' or ';' (default: detect)");
    ingest->add_flag("--no-header", ingest_opt.no_header, "First line is data");
    ingest->add_flag("--lenient", ingest_opt.lenient, "Skip bad rows (listed in ingest_report.json)");

    auto* report = app.add_subcommand("report", "Merge command manifests into manifest.json");
    add_common(report, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: UsageError: " << e.what() << "\n";
        return 2;
    }

    try {
        const RunConfig cfg = resolve(common);
        if (simulate->parsed()) cmd_simulate(cfg, sim_opt, out);
        else if (aval->parsed()) cmd_avalanches(cfg, out);
        else if (gains->parsed()) cmd_gains(cfg, out);
        else if (series->parsed()) cmd_series(cfg, series_opt, out);
        else if (garch_cmd->parsed()) cmd_garch_fit(cfg, series_opt, out);
        else if (ingest->parsed()) cmd_ingest(cfg, ingest_opt, out);
        else if (report->parsed()) cmd_report(cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: InternalError: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace soc
