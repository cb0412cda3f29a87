#include "soc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "soc/error.hpp"
#include "soc/io.hpp"

namespace soc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    std::from_chars_result res;
    if constexpr (std::is_floating_point_v<T>) {
        res = std::from_chars(first, last, out);
    } else {
        res = std::from_chars(first, last, out);
        if (res.ec == std::errc() && res.ptr != last) {
            // Accept integral values written in float notation, e.g. 2e6.
            double d = 0.0;
            auto r2 = std::from_chars(first, last, d);
            if (r2.ec == std::errc() && r2.ptr == last && d >= 0.0 && d == static_cast<double>(static_cast<T>(d))) {
                return static_cast<T>(d);
            }
        }
    }
    if (res.ec != std::errc() || res.ptr != last)
        throw ConfigError("bad value '" + value + "' for " + key);
    return out;
}

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    auto u64 = [&] { return parse_number<std::uint64_t>(key, value); };
    auto f64 = [&] { return parse_number<double>(key, value); };

    if (key == "lattice.n") lattice.n_intervals = parse_number<std::uint32_t>(key, value);
    else if (key == "lattice.w") lattice.variance_w = f64();
    else if (key == "lattice.seed") lattice.seed = u64();
    else if (key == "lattice.tie_break") {
        if (value == "lowest") lattice.tie_break = TieBreak::LowestIndex;
        else if (value == "random") lattice.tie_break = TieBreak::RandomAmongTies;
        else throw ConfigError("lattice.tie_break must be 'lowest' or 'random'");
    }
    else if (key == "run.equilibration_steps") equilibration_steps = u64();
    else if (key == "run.ensemble_runs") ensemble_runs = u64();
    else if (key == "run.jobs") jobs = parse_number<unsigned>(key, value);
    else if (key == "run.entropy_every") entropy_every = u64();
    else if (key == "series.lambda") lambda = f64();
    else if (key == "series.p0") p0 = f64();
    else if (key == "avalanche.bin_width") avalanche_bin_width = f64();
    else if (key == "avalanche.bins") avalanche_bins = u64();
    else if (key == "avalanche.fit_min") fit_min = f64();
    else if (key == "avalanche.fit_max") fit_max = f64();
    else if (key == "gains.bin_width") gains_bin_width = f64();
    else if (key == "gains.r_min") gains_r_min = f64();
    else if (key == "gains.r_max") gains_r_max = f64();
    else if (key == "gains.center_points") center_points = u64();
    else if (key == "gains.tail_points") tail_points = u64();
    else if (key == "gains.overlay_x") overlay_x = f64();
    else if (key == "gains.overlay_y") overlay_y = f64();
    else if (key == "garch.max_iterations") garch.max_iterations = parse_number<unsigned>(key, value);
    else if (key == "garch.tolerance") garch.rel_tolerance = f64();
    else if (key == "output.dir") out_dir = value;
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void RunConfig::read(std::istream& in, const std::string& origin) {
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        try {
            set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    read(in, path.string());
}

void RunConfig::validate() const {
    lattice.validate();
    if (ensemble_runs < 1) throw ConfigError("run.ensemble_runs must be >= 1");
    if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
    if (entropy_every < 1) throw ConfigError("run.entropy_every must be >= 1");
    if (!(lambda > 0.0)) throw ConfigError("series.lambda must be positive");
    if (!(p0 > 0.0)) throw ConfigError("series.p0 must be positive");
    if (!(avalanche_bin_width > 0.0) || avalanche_bins < 1)
        throw ConfigError("avalanche binning needs bin_width > 0 and bins >= 1");
    if (!(fit_max > fit_min) || !(fit_min > 0.0)) throw ConfigError("avalanche fit range must satisfy 0 < fit_min < fit_max");
    if (!(gains_bin_width > 0.0) || !(gains_r_max > gains_r_min))
        throw ConfigError("gains binning needs bin_width > 0 and r_min < r_max");
    if (center_points < 2 || tail_points < 1) throw ConfigError("gains fit point counts too small");
    if (!(overlay_x > 0.0) || !(overlay_y > 0.0)) throw ConfigError("overlay factors must be positive");
    if (garch.max_iterations < 1 || !(garch.rel_tolerance > 0.0)) throw ConfigError("bad garch settings");
}

std::string RunConfig::canonical() const {
    std::map<std::string, std::string> kv;
    kv["lattice.n"] = std::to_string(lattice.n_intervals);
    kv["lattice.w"] = io::fmt(lattice.variance_w);
    kv["lattice.seed"] = std::to_string(lattice.seed);
    kv["lattice.tie_break"] = lattice.tie_break == TieBreak::LowestIndex ? "lowest" : "random";
    kv["run.equilibration_steps"] = std::to_string(equilibration_steps);
    kv["run.ensemble_runs"] = std::to_string(ensemble_runs);
    kv["run.entropy_every"] = std::to_string(entropy_every);
    kv["series.lambda"] = io::fmt(lambda);
    kv["series.p0"] = io::fmt(p0);
    kv["avalanche.bin_width"] = io::fmt(avalanche_bin_width);
    kv["avalanche.bins"] = std::to_string(avalanche_bins);
    kv["avalanche.fit_min"] = io::fmt(fit_min);
    kv["avalanche.fit_max"] = io::fmt(fit_max);
    kv["gains.bin_width"] = io::fmt(gains_bin_width);
    kv["gains.r_min"] = io::fmt(gains_r_min);
    kv["gains.r_max"] = io::fmt(gains_r_max);
    kv["gains.center_points"] = std::to_string(center_points);
    kv["gains.tail_points"] = std::to_string(tail_points);
    kv["gains.overlay_x"] = io::fmt(overlay_x);
    kv["gains.overlay_y"] = io::fmt(overlay_y);
    kv["garch.max_iterations"] = std::to_string(garch.max_iterations);
    kv["garch.tolerance"] = io::fmt(garch.rel_tolerance);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace soc
