#include "soc/gains.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "soc/ensemble.hpp"
#include "soc/error.hpp"

namespace soc {

std::size_t GainsBinning::bins() const {
    if (!(bin_width > 0.0)) throw InputError("gains binning: bin width must be positive");
    if (!(r_max > r_min)) throw InputError("gains binning: empty range");
    return static_cast<std::size_t>(std::llround((r_max - r_min) / bin_width)) + 1;
}

std::size_t GainsBinning::index(double r) const noexcept {
    const double k = std::floor((r - r_min) / bin_width + 0.5);
    const auto n = static_cast<double>(bins());
    if (!(k >= 0.0) || k >= n) return bins();
    return static_cast<std::size_t>(k);
}

GainsAccumulator::GainsAccumulator(GainsBinning binning)
    : binning_(binning),
      sum_(binning.bins(), 0.0),
      sum_sq_(binning.bins(), 0.0),
      scratch_(binning.bins(), 0) {}

void GainsAccumulator::add_sample(std::span<const double> returns) {
    std::fill(scratch_.begin(), scratch_.end(), 0u);
    const std::size_t nb = scratch_.size();
    for (double r : returns) {
        const std::size_t k = binning_.index(r);
        if (k < nb) ++scratch_[k];
    }
    for (std::size_t k = 0; k < nb; ++k) {
        const double c = scratch_[k];
        sum_[k] += c;
        sum_sq_[k] += c * c;
    }
    ++n_;
}

void GainsAccumulator::merge(const GainsAccumulator& other) {
    if (other.sum_.size() != sum_.size()) throw InputError("gains merge: incompatible binning");
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        sum_[k] += other.sum_[k];
        sum_sq_[k] += other.sum_sq_[k];
    }
    n_ += other.n_;
}

GainsHistogram GainsAccumulator::result(double normalization) const {
    if (n_ == 0) throw InputError("gains histogram: no samples");
    if (!(normalization > 0.0)) throw InputError("gains histogram: normalization must be positive");
    const std::size_t nb = sum_.size();
    const double n = static_cast<double>(n_);
    const double dr = binning_.bin_width;

    GainsHistogram h;
    h.bin_width = dr;
    h.n_samples = n_;
    h.centers.resize(nb);
    h.mean_counts.resize(nb);
    h.std_errors.assign(nb, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < nb; ++k) total += sum_[k] / n;
    if (!(total > 0.0)) throw InputError("gains histogram: no returns fell inside the range");
    const double factor = normalization / total / dr;
    for (std::size_t k = 0; k < nb; ++k) {
        h.centers[k] = binning_.center(k);
        const double mean = sum_[k] / n;
        h.mean_counts[k] = mean * factor;
        if (n_ > 1) {
            const double var = std::max(0.0, (sum_sq_[k] - n * mean * mean) / (n - 1.0));
            h.std_errors[k] = std::sqrt(var / n) * factor;
        }
    }
    h.normalization = normalization;
    return h;
}

GainsHistogram ensemble_gains(const LatticeConfig& config, std::uint64_t n_runs,
                              std::uint64_t equilibration_steps, double bin_width,
                              std::pair<double, double> range, unsigned jobs) {
    config.validate();
    if (n_runs == 0) throw ConfigError("ensemble_gains: n_runs must be >= 1");
    const GainsBinning binning{bin_width, range.first, range.second};
    binning.bins();
    auto acc = ensemble_reduce(
        n_runs, jobs, [&] { return GainsAccumulator(binning); },
        [&](GainsAccumulator& a, std::uint64_t i) {
            LatticeConfig c = config;
            c.seed = derive_seed(config.seed, i);
            Lattice lattice = Lattice::init_random(c);
            run(lattice, equilibration_steps);
            a.add_sample(lattice.state().returns);
        });
    return acc.result(static_cast<double>(config.n_intervals));
}

double GaussianFit::operator()(double r) const {
    return amplitude * std::exp(-r * r / (2.0 * sigma * sigma));
}

GaussianFit fit_gaussian(const GainsHistogram& hist, GaussianRegion region) {
    const std::size_t nb = hist.mean_counts.size();
    std::vector<std::size_t> chosen;
    if (region.n_points == 0) throw FitError("fit_gaussian: region needs at least one point");
    if (region.kind == GaussianRegionKind::Center) {
        std::vector<std::size_t> order;
        for (std::size_t k = 0; k < nb; ++k)
            if (hist.mean_counts[k] > 0.0) order.push_back(k);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(hist.centers[a]) < std::abs(hist.centers[b]);
        });
        if (order.size() < region.n_points)
            throw FitError("fit_gaussian: fewer than " + std::to_string(region.n_points) +
                           " nonzero bins for the center region");
        chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(region.n_points));
    } else {
        std::vector<std::size_t> neg, pos;
        for (std::size_t k = 0; k < nb; ++k) {
            if (!(hist.mean_counts[k] > 0.0)) continue;
            if (hist.centers[k] < 0.0) neg.push_back(k);
            if (hist.centers[k] > 0.0) pos.push_back(k);
        }
        if (neg.size() < region.n_points || pos.size() < region.n_points)
            throw FitError("fit_gaussian: fewer than " + std::to_string(region.n_points) +
                           " nonzero bins on a tail side");
        chosen.assign(neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(region.n_points));
        chosen.insert(chosen.end(), pos.end() - static_cast<std::ptrdiff_t>(region.n_points), pos.end());
    }
    if (chosen.size() < 2) throw FitError("fit_gaussian: need at least two bins");

    const bool weighted = std::all_of(chosen.begin(), chosen.end(),
                                      [&](std::size_t k) { return hist.std_errors[k] > 0.0; });
    double s = 0, sx = 0, sy = 0;
    std::vector<double> x, y, w;
    for (std::size_t k : chosen) {
        x.push_back(hist.centers[k] * hist.centers[k]);
        y.push_back(std::log(hist.mean_counts[k]));
        const double rel = hist.std_errors[k] / hist.mean_counts[k];
        w.push_back(weighted ? 1.0 / (rel * rel) : 1.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xbar = sx / s, ybar = sy / s;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0)) throw FitError("fit_gaussian: selected bins have a single |r|");
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) throw FitError("fit_gaussian: counts do not decrease with |r|");
    const double intercept = ybar - slope * xbar;

    GaussianFit fit;
    fit.amplitude = std::exp(intercept);
    fit.sigma = std::sqrt(-1.0 / (2.0 * slope));
    fit.region = region;
    fit.weighted = weighted;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - intercept - slope * x[i];
        fit.chi2 += w[i] * r * r;
    }
    return fit;
}

GainsHistogram apply_overlay(const GainsHistogram& hist, const OverlayScaling& s) {
    if (!(s.x_factor > 0.0) || !(s.y_factor > 0.0))
        throw InputError("apply_overlay: scale factors must be positive");
    GainsHistogram out = hist;
    out.bin_width *= s.x_factor;
    for (auto& c : out.centers) c *= s.x_factor;
    for (auto& c : out.mean_counts) c *= s.y_factor;
    for (auto& e : out.std_errors) e *= s.y_factor;
    out.normalization *= s.x_factor * s.y_factor;
    return out;
}

double tail_excess(const GainsHistogram& hist, const GaussianFit& reference, double threshold) {
    double observed = 0.0, predicted = 0.0;
    for (std::size_t k = 0; k < hist.centers.size(); ++k) {
        if (std::abs(hist.centers[k]) <= threshold) continue;
        observed += hist.mean_counts[k];
        predicted += reference(hist.centers[k]);
    }
    if (!(predicted > 0.0)) throw ComputationError("tail_excess: no predicted mass beyond threshold");
    return observed / predicted;
}

}  // namespace soc
