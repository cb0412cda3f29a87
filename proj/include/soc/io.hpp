#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "soc/analysis.hpp"
#include "soc/gains.hpp"
#include "soc/garch.hpp"
#include "soc/lattice.hpp"
#include "soc/series.hpp"

namespace soc::io {

/// Shortest decimal that parses back to the same double.
std::string fmt(double v);

// -- lattice snapshot ---------------------------------------------------------

struct Snapshot {
    std::uint32_t n_intervals = 0;
    double variance_w = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    std::vector<double> returns;  // n_intervals + 1 values

    static Snapshot of(const Lattice& lattice);
    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

inline constexpr std::uint16_t snapshot_version = 1;

/// "SOCL", u16 version, u32 n, f64 w, u64 seed, u64 step, (n+1) f64; little-endian.
void write_snapshot_binary(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot_binary(std::istream& in);
void write_snapshot_csv(std::ostream& out, const Snapshot& snap);  // j,r_j

// -- analysis outputs ---------------------------------------------------------

void write_signal_trace(std::ostream& out, const SignalTrace& trace);   // s,V
void write_gap(std::ostream& out, const GapFunction& gap);              // x_k,level
void write_avalanches(std::ostream& out, const AvalancheRecord& rec);   // k,length,start_level
void write_size_histogram(std::ostream& out, const SizeHistogram& h);   // lambda_bin_center,mean_count,stderr
void write_hit_log(std::ostream& out, const std::vector<HitEntry>& hits);  // s,j
void write_entropy(std::ostream& out, const std::vector<EntropySample>& samples);  // s,S
void write_activity(std::ostream& out, const std::vector<std::uint64_t>& hits);    // j,H
nlohmann::json to_json(const PowerLawFit& fit);

// -- gains ----------------------------------------------------------------------

void write_gains_histogram(std::ostream& out, const GainsHistogram& h);  // r_center,mean_count,stderr
nlohmann::json to_json(const GaussianFit& fit);

// -- series ---------------------------------------------------------------------

/// j,r,p,v. Lattice index j; empty cells where a value is undefined.
void write_series(std::ostream& out, const ReturnsSeries& r, const PriceSeries& p,
                  const VolatilitySeries& v);

// -- garch ----------------------------------------------------------------------

nlohmann::json to_json(const garch::Fit& fit);

// -- files ----------------------------------------------------------------------

/// Opens `path` for writing (binary mode, parent directories created).
std::ofstream open_out(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace soc::io
