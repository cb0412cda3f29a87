#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "soc/garch.hpp"
#include "soc/lattice.hpp"

namespace soc {

/// Everything that determines a run's numeric output. Read from a sectioned
/// key = value file; every key can be overridden as "section.key".
///
///   [lattice]  n, w, seed, tie_break (lowest | random)
///   [run]      equilibration_steps, ensemble_runs, jobs, entropy_every
///   [series]   lambda, p0
///   [avalanche] bin_width, bins, fit_min, fit_max
///   [gains]    bin_width, r_min, r_max, center_points, tail_points, overlay_x, overlay_y
///   [garch]    max_iterations, tolerance
///   [output]   dir
struct RunConfig {
    LatticeConfig lattice{780, 1.0, 1, TieBreak::LowestIndex};
    std::uint64_t equilibration_steps = 200000;
    std::uint64_t ensemble_runs = 200;
    unsigned jobs = 1;
    std::uint64_t entropy_every = 100;

    double lambda = 2e-5;
    double p0 = 1950.0;

    double avalanche_bin_width = 1.0;
    std::size_t avalanche_bins = 10000;
    double fit_min = 10.0;
    double fit_max = 100.0;

    double gains_bin_width = 0.05;
    double gains_r_min = -5.0;
    double gains_r_max = 5.0;
    std::size_t center_points = 7;
    std::size_t tail_points = 38;
    double overlay_x = 2.4e-3;
    double overlay_y = 1.1e5;

    garch::Options garch;

    std::filesystem::path out_dir = "soc_out";

    /// Assigns "section.key"; throws ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Applies every assignment in an INI-style stream ('#' and ';' comments).
    void read(std::istream& in, const std::string& origin = "config");
    void load(const std::filesystem::path& path);
    void validate() const;

    /// Sorted "section.key=value" lines of every numeric-output-relevant field
    /// (output.dir and run.jobs excluded).
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), 16 hex digits.
    std::string hash() const;
};

}  // namespace soc
