#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "soc/rng.hpp"

namespace soc {

enum class TieBreak { LowestIndex, RandomAmongTies };

/// Lattice of n_intervals + 1 sites with periodic boundary.
struct LatticeConfig {
    std::uint32_t n_intervals = 780;
    double variance_w = 1.0;
    std::uint64_t seed = 0;
    TieBreak tie_break = TieBreak::LowestIndex;

    std::size_t sites() const noexcept { return std::size_t{n_intervals} + 1; }

    /// Throws ConfigError when n_intervals < 4 or variance_w <= 0.
    void validate() const;
};

struct LatticeState {
    std::vector<double> returns;       // r_j
    std::vector<double> signals;       // cached V_j
    std::uint64_t step = 0;            // simulation time s
    std::vector<std::uint64_t> hits;   // replacement visits per site
};

struct UpdateEvent {
    std::uint64_t step = 0;       // simulation time after the update (first update is 1)
    std::size_t site = 0;         // j_s
    double old_signal = 0.0;      // global V that selected j_s
    std::array<double, 3> drawn{};  // values written to j_s-1, j_s, j_s+1
};

struct GlobalSignal {
    double value = 0.0;
    std::size_t site = 0;
};

/// V_j = |r_j (r_{j+1} - r_{j-1})| with periodic indexing.
inline double compute_signal(std::span<const double> returns, std::size_t j) noexcept {
    const std::size_t m = returns.size();
    const std::size_t next = (j + 1 == m) ? 0 : j + 1;
    const std::size_t prev = (j == 0) ? m - 1 : j - 1;
    const double v = returns[j] * (returns[next] - returns[prev]);
    return v < 0.0 ? -v : v;
}

/// O(n) scan: maximum signal and its lowest index.
GlobalSignal rescan_global_signal(std::span<const double> signals) noexcept;

/// Binary max-tournament over the site signals. Each node keeps the maximum
/// of its subtree, the leftmost index attaining it and how many leaves tie.
class MaxTournament {
public:
    MaxTournament() = default;
    explicit MaxTournament(std::span<const double> values);

    void set(std::size_t index, double value) noexcept;
    /// Recompute internal nodes above leaves [first, last] (inclusive).
    void refresh(std::size_t first, std::size_t last) noexcept;
    /// Assign a leaf without touching ancestors; follow with refresh().
    void set_leaf(std::size_t index, double value) noexcept { value_[cap_ + index] = value; }

    double max() const noexcept { return value_[1]; }
    std::size_t argmax() const noexcept { return index_[1]; }
    std::uint32_t ties() const noexcept { return count_[1]; }
    /// Index of the k-th (0-based, left to right) leaf equal to max().
    std::size_t nth_argmax(std::uint32_t k) const noexcept;

private:
    void pull(std::size_t node) noexcept;

    std::size_t cap_ = 0;
    std::vector<double> value_;
    std::vector<std::uint32_t> index_;
    std::vector<std::uint32_t> count_;
};

/// Periodic returns field with the max-signal triplet-replacement dynamics.
/// Owns its generator, so (config, seed) determines the whole trajectory.
class Lattice {
public:
    /// Field drawn iid Normal(0, w); throws ConfigError on invalid config.
    static Lattice init_random(const LatticeConfig& config);

    const LatticeConfig& config() const noexcept { return config_; }
    const LatticeState& state() const noexcept { return state_; }
    std::size_t sites() const noexcept { return state_.returns.size(); }
    std::uint64_t step() const noexcept { return state_.step; }

    /// Current V and the lowest-index site attaining it.
    GlobalSignal global_signal() const noexcept { return {tree_.max(), tree_.argmax()}; }

    /// Replace the triplet around the max-signal site with a zero-sum draw.
    UpdateEvent update_step();

private:
    Lattice(const LatticeConfig& config);

    void refresh_signals(std::size_t centre) noexcept;

    LatticeConfig config_;
    LatticeState state_;
    MaxTournament tree_;
    Rng rng_;
    double sigma_ = 1.0;
};

/// Three iid Normal(0, w) draws projected onto the zero-sum plane.
std::array<double, 3> draw_zero_sum_triple(Rng& rng, double sigma) noexcept;

/// Observer notified by run(); on_start sees the state before the first update.
class Recorder {
public:
    virtual ~Recorder() = default;
    virtual void on_start(const Lattice&) {}
    virtual void on_update(const Lattice& lattice, const UpdateEvent& event) = 0;
};

void run(Lattice& lattice, std::uint64_t steps, std::span<Recorder* const> recorders = {});

}  // namespace soc
