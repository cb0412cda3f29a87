#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "soc/lattice.hpp"

namespace soc {

/// Global signal V(s) for s = 0..S.
struct SignalTrace {
    std::vector<double> values;
    LatticeConfig config;
};

struct GapBreakpoint {
    std::uint64_t x = 0;
    double level = 0.0;
};

/// Running minimum of a signal trace, stored at its strict decreases.
struct GapFunction {
    std::vector<GapBreakpoint> breakpoints;

    /// G(x) for integer x >= 0.
    double at(std::uint64_t x) const;
};

/// Completed avalanches; the trailing open plateau is never included.
struct AvalancheRecord {
    std::vector<std::uint64_t> lengths;
    std::vector<double> start_levels;

    std::size_t size() const noexcept { return lengths.size(); }
};

/// Ensemble-mean avalanche-size frequency dN/dΛ with per-bin standard error.
/// Bin k covers lengths in [k·ΔΛ, (k+1)·ΔΛ).
struct SizeHistogram {
    double bin_width = 1.0;
    std::vector<double> counts;
    std::vector<double> errors;
    std::uint64_t n_runs = 0;
    double mean_overflow = 0.0;  // mean avalanches per run beyond the last bin

    /// Representative length of bin k: mean of the integer lengths it can hold.
    double center(std::size_t k) const;
};

struct PowerLawFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double chi2 = 0.0;
    std::uint64_t dof = 0;
    bool weighted = false;

    std::size_t bins_used() const noexcept { return dof + 2; }
    double operator()(double lambda) const;
};

GapFunction gap_function(std::span<const double> trace);
inline GapFunction gap_function(const SignalTrace& trace) { return gap_function(trace.values); }

AvalancheRecord avalanches(const GapFunction& gap, std::uint64_t trace_len);

/// Associative, commutative merge of per-run avalanche histograms.
class SizeHistogramAccumulator {
public:
    SizeHistogramAccumulator(double bin_width, std::size_t n_bins);

    void add_run(const AvalancheRecord& record);
    void merge(const SizeHistogramAccumulator& other);
    SizeHistogram result() const;
    std::uint64_t runs() const noexcept { return n_runs_; }

private:
    double bin_width_;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    double overflow_ = 0.0;
    std::uint64_t n_runs_ = 0;
};

SizeHistogram size_histogram(std::span<const AvalancheRecord> records, double bin_width = 1.0,
                             std::size_t n_bins = 10000);

/// Least-squares line through (log Λ, log count) over in-range nonzero bins.
PowerLawFit fit_power_law(const SizeHistogram& hist, std::pair<double, double> range);

/// ∫ A Λ^γ dΛ over [lo, hi], closed form.
double integrate_count(const PowerLawFit& fit, std::pair<double, double> range);

std::vector<std::uint64_t> activity_histogram(const LatticeState& state);

/// (1/n) Σ_{j=1..n} R_j log R_j with R_j = exp(r_j); site 0 is excluded.
double entropy(std::span<const double> returns);
inline double entropy(const LatticeState& state) { return entropy(state.returns); }

struct HitEntry {
    std::uint64_t s = 0;
    std::uint32_t j = 0;

    friend bool operator==(const HitEntry&, const HitEntry&) = default;
};

struct HitWindow {
    std::uint64_t s_min = 0;
    std::uint64_t s_max = UINT64_MAX;
    std::uint32_t j_min = 0;
    std::uint32_t j_max = UINT32_MAX;

    bool contains(const HitEntry& e) const noexcept {
        return e.s >= s_min && e.s <= s_max && e.j >= j_min && e.j <= j_max;
    }
};

// -- recorders ---------------------------------------------------------------

class SignalTraceRecorder : public Recorder {
public:
    void on_start(const Lattice& lattice) override;
    void on_update(const Lattice& lattice, const UpdateEvent& event) override;

    const SignalTrace& trace() const noexcept { return trace_; }
    SignalTrace take() { return std::move(trace_); }

private:
    SignalTrace trace_;
};

/// One (s, j) entry per replaced site, three per update. An optional capture
/// window bounds memory for long runs.
class HitLogRecorder : public Recorder {
public:
    HitLogRecorder() = default;
    explicit HitLogRecorder(HitWindow capture) : capture_(capture) {}

    void on_update(const Lattice& lattice, const UpdateEvent& event) override;

    const std::vector<HitEntry>& entries() const noexcept { return entries_; }
    std::vector<HitEntry> window(const HitWindow& w) const;

private:
    std::optional<HitWindow> capture_;
    std::vector<HitEntry> entries_;
};

struct EntropySample {
    std::uint64_t s = 0;
    double value = 0.0;
};

/// Samples entropy at s = 0 and every `every` steps.
class EntropyRecorder : public Recorder {
public:
    explicit EntropyRecorder(std::uint64_t every = 100);

    void on_start(const Lattice& lattice) override;
    void on_update(const Lattice& lattice, const UpdateEvent& event) override;

    const std::vector<EntropySample>& samples() const noexcept { return samples_; }

private:
    std::uint64_t every_;
    std::vector<EntropySample> samples_;
};

}  // namespace soc
