#include "soc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "soc/error.hpp"

namespace soc {

double GapFunction::at(std::uint64_t x) const {
    if (breakpoints.empty()) throw InputError("empty gap function");
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x,
                               [](std::uint64_t v, const GapBreakpoint& b) { return v < b.x; });
    return std::prev(it)->level;
}

GapFunction gap_function(std::span<const double> trace) {
    if (trace.empty()) throw InputError("gap_function: empty signal trace");
    GapFunction gap;
    gap.breakpoints.push_back({0, trace[0]});
    double level = trace[0];
    for (std::size_t s = 1; s < trace.size(); ++s) {
        if (trace[s] < level) {
            level = trace[s];
            gap.breakpoints.push_back({s, level});
        }
    }
    return gap;
}

AvalancheRecord avalanches(const GapFunction& gap, std::uint64_t trace_len) {
    AvalancheRecord rec;
    const auto& bp = gap.breakpoints;
    if (!bp.empty() && bp.back().x >= trace_len)
        throw InputError("avalanches: breakpoint beyond trace length");
    for (std::size_t k = 1; k < bp.size(); ++k) {
        rec.lengths.push_back(bp[k].x - bp[k - 1].x);
        rec.start_levels.push_back(bp[k - 1].level);
    }
    return rec;
}

double SizeHistogram::center(std::size_t k) const {
    const double lo = static_cast<double>(k) * bin_width;
    const double hi = lo + bin_width;
    const double first = std::max(std::ceil(lo), 1.0);  // avalanche lengths start at 1
    const double last = std::ceil(hi) - 1.0;
    if (first > last) return lo + 0.5 * bin_width;
    return 0.5 * (first + last);
}

double PowerLawFit::operator()(double lambda) const { return amplitude * std::pow(lambda, exponent); }

SizeHistogramAccumulator::SizeHistogramAccumulator(double bin_width, std::size_t n_bins)
    : bin_width_(bin_width), sum_(n_bins, 0.0), sum_sq_(n_bins, 0.0) {
    if (!(bin_width > 0.0)) throw InputError("size histogram: bin width must be positive");
    if (n_bins == 0) throw InputError("size histogram: need at least one bin");
}

void SizeHistogramAccumulator::add_run(const AvalancheRecord& record) {
    std::vector<double> run(sum_.size(), 0.0);
    double overflow = 0.0;
    for (auto len : record.lengths) {
        const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(len) / bin_width_));
        if (k < run.size())
            run[k] += 1.0;
        else
            overflow += 1.0;
    }
    // Raw integer counts keep merges exact in any order.
    for (std::size_t k = 0; k < run.size(); ++k) {
        sum_[k] += run[k];
        sum_sq_[k] += run[k] * run[k];
    }
    overflow_ += overflow;
    ++n_runs_;
}

void SizeHistogramAccumulator::merge(const SizeHistogramAccumulator& other) {
    if (other.sum_.size() != sum_.size() || other.bin_width_ != bin_width_)
        throw InputError("size histogram merge: incompatible binning");
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        sum_[k] += other.sum_[k];
        sum_sq_[k] += other.sum_sq_[k];
    }
    overflow_ += other.overflow_;
    n_runs_ += other.n_runs_;
}

SizeHistogram SizeHistogramAccumulator::result() const {
    if (n_runs_ == 0) throw InputError("size histogram: no runs");
    SizeHistogram h;
    h.bin_width = bin_width_;
    h.n_runs = n_runs_;
    h.counts.resize(sum_.size());
    h.errors.assign(sum_.size(), 0.0);
    const double n = static_cast<double>(n_runs_);
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        const double mean = sum_[k] / n;
        h.counts[k] = mean / bin_width_;
        if (n_runs_ > 1) {
            const double var = std::max(0.0, (sum_sq_[k] - n * mean * mean) / (n - 1.0));
            h.errors[k] = std::sqrt(var / n) / bin_width_;
        }
    }
    h.mean_overflow = overflow_ / n;
    return h;
}

SizeHistogram size_histogram(std::span<const AvalancheRecord> records, double bin_width,
                             std::size_t n_bins) {
    if (records.empty()) throw InputError("size_histogram: empty collection");
    SizeHistogramAccumulator acc(bin_width, n_bins);
    for (const auto& r : records) acc.add_run(r);
    return acc.result();
}

PowerLawFit fit_power_law(const SizeHistogram& hist, std::pair<double, double> range) {
    std::vector<double> xs, ys, sig;
    bool all_errors = true;
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        const double lam = hist.center(k);
        if (lam < range.first || lam > range.second || lam <= 0.0) continue;
        if (!(hist.counts[k] > 0.0)) continue;
        xs.push_back(std::log(lam));
        ys.push_back(std::log(hist.counts[k]));
        const double e = hist.errors[k] / hist.counts[k];
        sig.push_back(e);
        if (!(e > 0.0)) all_errors = false;
    }
    if (xs.size() < 3)
        throw FitError("fit_power_law: fewer than 3 usable bins in [" + std::to_string(range.first) +
                       ", " + std::to_string(range.second) + "]");

    // Weighted linear regression y = a + b x.
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto weight = [&](std::size_t i) { return all_errors ? 1.0 / (sig[i] * sig[i]) : 1.0; };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = weight(i);
        s += w;
        sx += w * xs[i];
        sy += w * ys[i];
    }
    const double xbar = sx / s;
    const double ybar = sy / s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = weight(i);
        sxx += w * (xs[i] - xbar) * (xs[i] - xbar);
        sxy += w * (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (!(sxx > 0.0)) throw FitError("fit_power_law: degenerate abscissae");
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;

    PowerLawFit fit;
    fit.amplitude = std::exp(intercept);
    fit.exponent = slope;
    fit.lambda_min = range.first;
    fit.lambda_max = range.second;
    fit.weighted = all_errors;
    fit.dof = xs.size() - 2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - intercept - slope * xs[i];
        fit.chi2 += weight(i) * r * r;
    }
    return fit;
}

double integrate_count(const PowerLawFit& fit, std::pair<double, double> range) {
    const auto [lo, hi] = range;
    const double p = fit.exponent + 1.0;
    if (std::abs(p) < 1e-12) return fit.amplitude * std::log(hi / lo);
    return fit.amplitude * (std::pow(hi, p) - std::pow(lo, p)) / p;
}

std::vector<std::uint64_t> activity_histogram(const LatticeState& state) { return state.hits; }

double entropy(std::span<const double> returns) {
    if (returns.size() < 2) throw InputError("entropy: need at least two sites");
    double sum = 0.0;
    for (std::size_t j = 1; j < returns.size(); ++j) {
        const double r = returns[j];
        if (std::abs(r) > 700.0)
            throw ComputationError("entropy: |r_" + std::to_string(j) + "| > 700, runaway field");
        const double big_r = std::exp(r);
        sum += big_r * std::log(big_r);
    }
    return sum / static_cast<double>(returns.size() - 1);
}

void SignalTraceRecorder::on_start(const Lattice& lattice) {
    trace_.config = lattice.config();
    trace_.values.clear();
    trace_.values.push_back(lattice.global_signal().value);
}

void SignalTraceRecorder::on_update(const Lattice& lattice, const UpdateEvent&) {
    trace_.values.push_back(lattice.global_signal().value);
}

void HitLogRecorder::on_update(const Lattice& lattice, const UpdateEvent& event) {
    const std::size_t m = lattice.sites();
    const std::size_t left = (event.site == 0) ? m - 1 : event.site - 1;
    const std::size_t right = (event.site + 1 == m) ? 0 : event.site + 1;
    for (std::size_t j : {left, event.site, right}) {
        HitEntry e{event.step, static_cast<std::uint32_t>(j)};
        if (!capture_ || capture_->contains(e)) entries_.push_back(e);
    }
}

std::vector<HitEntry> HitLogRecorder::window(const HitWindow& w) const {
    std::vector<HitEntry> out;
    std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
                 [&](const HitEntry& e) { return w.contains(e); });
    return out;
}

EntropyRecorder::EntropyRecorder(std::uint64_t every) : every_(every) {
    if (every == 0) throw ConfigError("entropy sampling interval must be >= 1");
}

void EntropyRecorder::on_start(const Lattice& lattice) {
    samples_.clear();
    samples_.push_back({lattice.step(), entropy(lattice.state())});
}

void EntropyRecorder::on_update(const Lattice& lattice, const UpdateEvent& event) {
    if (event.step % every_ == 0) samples_.push_back({event.step, entropy(lattice.state())});
}

}  // namespace soc
