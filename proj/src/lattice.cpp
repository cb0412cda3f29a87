#include "soc/lattice.hpp"

#include <cmath>
#include <string>

#include "soc/error.hpp"

namespace soc {

void LatticeConfig::validate() const {
    if (n_intervals < 4)
        throw ConfigError("n_intervals must be >= 4, got " + std::to_string(n_intervals));
    if (!(variance_w > 0.0) || !std::isfinite(variance_w))
        throw ConfigError("variance_w must be positive and finite");
}

GlobalSignal rescan_global_signal(std::span<const double> signals) noexcept {
    GlobalSignal best{signals.empty() ? 0.0 : signals[0], 0};
    for (std::size_t j = 1; j < signals.size(); ++j) {
        if (signals[j] > best.value) best = {signals[j], j};
    }
    return best;
}

MaxTournament::MaxTournament(std::span<const double> values) {
    cap_ = 1;
    while (cap_ < values.size()) cap_ <<= 1;
    value_.assign(2 * cap_, -1.0);
    index_.assign(2 * cap_, 0);
    count_.assign(2 * cap_, 0);
    for (std::size_t i = 0; i < cap_; ++i) {
        index_[cap_ + i] = static_cast<std::uint32_t>(i);
        if (i < values.size()) {
            value_[cap_ + i] = values[i];
            count_[cap_ + i] = 1;
        }
    }
    for (std::size_t node = cap_ - 1; node >= 1; --node) pull(node);
}

void MaxTournament::pull(std::size_t node) noexcept {
    const std::size_t l = 2 * node;
    const std::size_t r = l + 1;
    // Leftmost child wins ties so argmax() is the lowest index.
    if (value_[l] > value_[r]) {
        value_[node] = value_[l];
        index_[node] = index_[l];
        count_[node] = count_[l];
    } else if (value_[r] > value_[l]) {
        value_[node] = value_[r];
        index_[node] = index_[r];
        count_[node] = count_[r];
    } else {
        value_[node] = value_[l];
        index_[node] = index_[l];
        count_[node] = count_[l] + count_[r];
    }
}

void MaxTournament::set(std::size_t index, double value) noexcept {
    std::size_t node = cap_ + index;
    value_[node] = value;
    for (node >>= 1; node >= 1; node >>= 1) pull(node);
}

void MaxTournament::refresh(std::size_t first, std::size_t last) noexcept {
    std::size_t lo = (cap_ + first) >> 1;
    std::size_t hi = (cap_ + last) >> 1;
    while (lo >= 1) {
        for (std::size_t node = lo; node <= hi; ++node) pull(node);
        lo >>= 1;
        hi >>= 1;
    }
}

std::size_t MaxTournament::nth_argmax(std::uint32_t k) const noexcept {
    const double target = value_[1];
    std::size_t node = 1;
    while (node < cap_) {
        const std::size_t l = 2 * node;
        if (value_[l] == target) {
            if (k < count_[l]) {
                node = l;
                continue;
            }
            k -= count_[l];
        }
        node = l + 1;
    }
    return node - cap_;
}

std::array<double, 3> draw_zero_sum_triple(Rng& rng, double sigma) noexcept {
    const double a = rng.normal();
    const double b = rng.normal();
    const double c = rng.normal();
    const double mean = (a + b + c) / 3.0;
    return {sigma * (a - mean), sigma * (b - mean), sigma * (c - mean)};
}

Lattice::Lattice(const LatticeConfig& config)
    : config_(config), rng_(config.seed), sigma_(std::sqrt(config.variance_w)) {}

Lattice Lattice::init_random(const LatticeConfig& config) {
    config.validate();
    Lattice lattice(config);
    const std::size_t m = config.sites();
    auto& st = lattice.state_;
    st.returns.resize(m);
    for (auto& r : st.returns) r = lattice.sigma_ * lattice.rng_.normal();
    st.signals.resize(m);
    for (std::size_t j = 0; j < m; ++j) st.signals[j] = compute_signal(st.returns, j);
    st.hits.assign(m, 0);
    st.step = 0;
    lattice.tree_ = MaxTournament(st.signals);
    return lattice;
}

void Lattice::refresh_signals(std::size_t centre) noexcept {
    const std::size_t m = sites();
    auto& st = state_;
    // Sites centre-2 .. centre+2, periodic. first is the leftmost of them.
    const std::size_t first = (centre + m - 2) % m;
    for (std::size_t k = 0; k < 5; ++k) {
        std::size_t j = first + k;
        if (j >= m) j -= m;
        st.signals[j] = compute_signal(st.returns, j);
        tree_.set_leaf(j, st.signals[j]);
    }
    const std::size_t last = first + 4;
    if (last < m) {
        tree_.refresh(first, last);
    } else {
        tree_.refresh(first, m - 1);
        tree_.refresh(0, last - m);
    }
}

UpdateEvent Lattice::update_step() {
    const std::size_t m = sites();
    UpdateEvent ev;
    ev.old_signal = tree_.max();
    ev.site = tree_.argmax();
    if (config_.tie_break == TieBreak::RandomAmongTies && tree_.ties() > 1) {
        const auto k = static_cast<std::uint32_t>(rng_.below(tree_.ties()));
        ev.site = tree_.nth_argmax(k);
    }
    ev.drawn = draw_zero_sum_triple(rng_, sigma_);

    const std::size_t left = (ev.site == 0) ? m - 1 : ev.site - 1;
    const std::size_t right = (ev.site + 1 == m) ? 0 : ev.site + 1;
    auto& st = state_;
    st.returns[left] = ev.drawn[0];
    st.returns[ev.site] = ev.drawn[1];
    st.returns[right] = ev.drawn[2];
    ++st.hits[left];
    ++st.hits[ev.site];
    ++st.hits[right];
    refresh_signals(ev.site);
    ev.step = ++st.step;
    return ev;
}

void run(Lattice& lattice, std::uint64_t steps, std::span<Recorder* const> recorders) {
    for (auto* rec : recorders) rec->on_start(lattice);
    if (recorders.empty()) {
        for (std::uint64_t s = 0; s < steps; ++s) lattice.update_step();
        return;
    }
    for (std::uint64_t s = 0; s < steps; ++s) {
        const UpdateEvent ev = lattice.update_step();
        for (auto* rec : recorders) rec->on_update(lattice, ev);
    }
}

}  // namespace soc
