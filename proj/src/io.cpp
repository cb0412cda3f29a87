#include "soc/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "soc/error.hpp"

namespace soc::io {

std::string fmt(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

Snapshot Snapshot::of(const Lattice& lattice) {
    return {lattice.config().n_intervals, lattice.config().variance_w, lattice.config().seed,
            lattice.step(), lattice.state().returns};
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
    std::uint64_t bits = 0;
    if constexpr (std::is_floating_point_v<T>)
        bits = std::bit_cast<std::uint64_t>(value);
    else
        bits = static_cast<std::uint64_t>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(bytes, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw InputError("snapshot: truncated frame");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    if constexpr (std::is_same_v<T, double>)
        return std::bit_cast<double>(bits);
    else
        return static_cast<T>(bits);
}

}  // namespace

void write_snapshot_binary(std::ostream& out, const Snapshot& snap) {
    if (snap.returns.size() != std::size_t{snap.n_intervals} + 1)
        throw InputError("snapshot: returns length must be n + 1");
    out.write("SOCL", 4);
    put_le<std::uint16_t>(out, snapshot_version);
    put_le<std::uint32_t>(out, snap.n_intervals);
    put_le<double>(out, snap.variance_w);
    put_le<std::uint64_t>(out, snap.seed);
    put_le<std::uint64_t>(out, snap.step);
    for (double r : snap.returns) put_le<double>(out, r);
}

Snapshot read_snapshot_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SOCL", 4) != 0) throw InputError("snapshot: bad magic");
    const auto version = get_le<std::uint16_t>(in);
    if (version != snapshot_version)
        throw InputError("snapshot: unsupported version " + std::to_string(version));
    Snapshot s;
    s.n_intervals = get_le<std::uint32_t>(in);
    s.variance_w = get_le<double>(in);
    s.seed = get_le<std::uint64_t>(in);
    s.step = get_le<std::uint64_t>(in);
    s.returns.resize(std::size_t{s.n_intervals} + 1);
    for (auto& r : s.returns) r = get_le<double>(in);
    return s;
}

void write_snapshot_csv(std::ostream& out, const Snapshot& snap) {
    out << "j,r_j\n";
    for (std::size_t j = 0; j < snap.returns.size(); ++j) out << j << ',' << fmt(snap.returns[j]) << '\n';
}

void write_signal_trace(std::ostream& out, const SignalTrace& trace) {
    out << "s,V\n";
    for (std::size_t s = 0; s < trace.values.size(); ++s) out << s << ',' << fmt(trace.values[s]) << '\n';
}

void write_gap(std::ostream& out, const GapFunction& gap) {
    out << "x_k,level\n";
    for (const auto& b : gap.breakpoints) out << b.x << ',' << fmt(b.level) << '\n';
}

void write_avalanches(std::ostream& out, const AvalancheRecord& rec) {
    out << "k,length,start_level\n";
    for (std::size_t k = 0; k < rec.lengths.size(); ++k)
        out << k + 1 << ',' << rec.lengths[k] << ',' << fmt(rec.start_levels[k]) << '\n';
}

void write_size_histogram(std::ostream& out, const SizeHistogram& h) {
    out << "lambda_bin_center,mean_count,stderr\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        out << fmt(h.center(k)) << ',' << fmt(h.counts[k]) << ',' << fmt(h.errors[k]) << '\n';
}

void write_hit_log(std::ostream& out, const std::vector<HitEntry>& hits) {
    out << "s,j\n";
    for (const auto& e : hits) out << e.s << ',' << e.j << '\n';
}

void write_entropy(std::ostream& out, const std::vector<EntropySample>& samples) {
    out << "s,S\n";
    for (const auto& e : samples) out << e.s << ',' << fmt(e.value) << '\n';
}

void write_activity(std::ostream& out, const std::vector<std::uint64_t>& hits) {
    out << "j,H\n";
    for (std::size_t j = 0; j < hits.size(); ++j) out << j << ',' << hits[j] << '\n';
}

nlohmann::json to_json(const PowerLawFit& fit) {
    return {{"amplitude", fit.amplitude}, {"exponent", fit.exponent}, {"lambda_min", fit.lambda_min},
            {"lambda_max", fit.lambda_max}, {"chi2", fit.chi2},       {"dof", fit.dof},
            {"n_bins_used", fit.bins_used()}};
}

void write_gains_histogram(std::ostream& out, const GainsHistogram& h) {
    out << "r_center,mean_count,stderr\n";
    for (std::size_t k = 0; k < h.centers.size(); ++k)
        out << fmt(h.centers[k]) << ',' << fmt(h.mean_counts[k]) << ',' << fmt(h.std_errors[k]) << '\n';
}

nlohmann::json to_json(const GaussianFit& fit) {
    return {{"amplitude", fit.amplitude},
            {"sigma", fit.sigma},
            {"region", fit.region.name()},
            {"n_points", fit.region.n_points},
            {"chi2", fit.chi2}};
}

void write_series(std::ostream& out, const ReturnsSeries& r, const PriceSeries& p,
                  const VolatilitySeries& v) {
    out << "j,r,p,v\n";
    for (std::size_t j = 0; j < p.values.size(); ++j) {
        out << j << ',';
        // Lattice index j maps to values[j - first_index].
        const bool has_r = j >= r.first_index && j - r.first_index < r.values.size();
        const std::size_t idx = j - r.first_index;
        if (has_r) out << fmt(r.values[idx]);
        out << ',' << fmt(p.values[j]) << ',';
        if (has_r && v.defined(idx)) out << fmt(v.values[idx]);
        out << '\n';
    }
}

nlohmann::json to_json(const garch::Fit& fit) {
    auto finite_or_null = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return nullptr;
    };
    nlohmann::json se = nlohmann::json::array(), t = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        se.push_back(finite_or_null(fit.std_errors[i]));
        t.push_back(finite_or_null(fit.t_stats[i]));
    }
    return {{"series_id", fit.series_id},   {"alpha0", fit.params.alpha0}, {"alpha1", fit.params.alpha1},
            {"beta1", fit.params.beta1},    {"stderr", se},                {"t", t},
            {"loglik", fit.loglik},         {"iterations", fit.iterations}, {"converged", fit.converged},
            {"n_obs", fit.n_obs}};
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace soc::io
