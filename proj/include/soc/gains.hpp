#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soc/lattice.hpp"

namespace soc {

/// Bins of width Δr centered on r_min + kΔr, k = 0..K with K = round((r_max - r_min)/Δr).
struct GainsBinning {
    double bin_width = 0.05;
    double r_min = -5.0;
    double r_max = 5.0;

    std::size_t bins() const;
    double center(std::size_t k) const noexcept { return r_min + static_cast<double>(k) * bin_width; }
    /// Bin index of r, or bins() when r falls outside.
    std::size_t index(double r) const noexcept;
};

struct GainsHistogram {
    double bin_width = 0.05;
    std::vector<double> centers;
    std::vector<double> mean_counts;  // Δc/Δr
    std::vector<double> std_errors;
    double normalization = 0.0;       // Σ mean_counts·Δr
    std::uint64_t n_samples = 0;      // ensemble members
};

/// Per-sample histograms merged by exact count addition.
class GainsAccumulator {
public:
    explicit GainsAccumulator(GainsBinning binning);

    void add_sample(std::span<const double> returns);
    void merge(const GainsAccumulator& other);
    /// Mean and standard error over samples, scaled so Σ counts·Δr == normalization.
    GainsHistogram result(double normalization) const;
    std::uint64_t samples() const noexcept { return n_; }

private:
    GainsBinning binning_;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    std::vector<std::uint32_t> scratch_;
    std::uint64_t n_ = 0;
};

/// One critical-state sample per run after `equilibration_steps` updates.
/// Run i uses seed derive_seed(config.seed, i). Normalized to n = n_intervals.
GainsHistogram ensemble_gains(const LatticeConfig& config, std::uint64_t n_runs,
                              std::uint64_t equilibration_steps, double bin_width,
                              std::pair<double, double> range, unsigned jobs = 1);

enum class GaussianRegionKind { Center, Tails };

struct GaussianRegion {
    GaussianRegionKind kind = GaussianRegionKind::Center;
    std::size_t n_points = 7;  // Center: total bins; Tails: bins per side

    static GaussianRegion center(std::size_t n = 7) { return {GaussianRegionKind::Center, n}; }
    static GaussianRegion tails(std::size_t n = 38) { return {GaussianRegionKind::Tails, n}; }
    std::string name() const { return kind == GaussianRegionKind::Center ? "center" : "tails"; }
};

struct GaussianFit {
    double amplitude = 0.0;
    double sigma = 0.0;
    GaussianRegion region;
    double chi2 = 0.0;
    bool weighted = false;

    double operator()(double r) const;
};

/// A exp(-r^2 / 2σ^2) fitted by linear regression of log counts on r^2.
GaussianFit fit_gaussian(const GainsHistogram& hist, GaussianRegion region);

struct OverlayScaling {
    double x_factor = 1.0;
    double y_factor = 1.0;

    /// Lattice-to-NASDAQ minute-return overlay.
    static OverlayScaling nasdaq() { return {2.4e-3, 1.1e5}; }
    OverlayScaling inverse() const { return {1.0 / x_factor, 1.0 / y_factor}; }
};

GainsHistogram apply_overlay(const GainsHistogram& hist, const OverlayScaling& s);

/// Observed over predicted counts summed over bins with |r| > threshold.
double tail_excess(const GainsHistogram& hist, const GaussianFit& reference, double threshold);

}  // namespace soc
