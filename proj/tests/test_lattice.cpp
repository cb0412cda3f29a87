#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "soc/analysis.hpp"
#include "soc/error.hpp"
#include "soc/lattice.hpp"
#include "support/reference_lattice.hpp"

using namespace soc;

namespace {

std::vector<double> recompute_signals(const std::vector<double>& r) {
    std::vector<double> v(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) v[j] = compute_signal(r, j);
    return v;
}

}  // namespace

TEST_CASE("init_random builds a fresh state") {
    const Lattice lat = Lattice::init_random({4, 1.0, 42});
    CHECK(lat.sites() == 5);
    CHECK(lat.step() == 0);
    for (auto h : lat.state().hits) CHECK(h == 0);
    CHECK(lat.state().signals == recompute_signals(lat.state().returns));
}

TEST_CASE("init_random rejects invalid configs") {
    CHECK_THROWS_AS(Lattice::init_random({3, 1.0, 1}), ConfigError);
    CHECK_THROWS_AS(Lattice::init_random({10, 0.0, 1}), ConfigError);
    CHECK_THROWS_AS(Lattice::init_random({10, -1.0, 1}), ConfigError);
}

TEST_CASE("init variance over 1000 seeds") {
    double sum = 0.0, sum_sq = 0.0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        const double r0 = Lattice::init_random({780, 1.0, derive_seed(7, s)}).state().returns[0];
        sum += r0;
        sum_sq += r0 * r0;
    }
    const double mean = sum / seeds;
    const double var = (sum_sq - seeds * mean * mean) / (seeds - 1);
    CHECK(var >= 0.9);
    CHECK(var <= 1.1);
}

TEST_CASE("compute_signal") {
    const std::vector<double> constant(9, 2.5);
    for (std::size_t j = 0; j < constant.size(); ++j) CHECK(compute_signal(constant, j) == 0.0);

    const std::vector<double> r{1, 2, 3, 4};
    CHECK(compute_signal(r, 0) == 2.0);
    CHECK(compute_signal(r, 1) == 4.0);
    CHECK(compute_signal(r, 2) == 6.0);
    CHECK(compute_signal(r, 3) == 8.0);

    Rng rng(3);
    std::vector<double> x(20), neg(20);
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = rng.normal();
        neg[j] = -x[j];
    }
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(compute_signal(x, j) == compute_signal(neg, j));
}

TEST_CASE("global signal of small fields") {
    const std::vector<double> r{1, 2, 3, 4};
    const auto g = rescan_global_signal(recompute_signals(r));
    CHECK(g.value == 8.0);
    CHECK(g.site == 3);

    const std::vector<double> zero(6, 0.0);
    const auto z = rescan_global_signal(zero);
    CHECK(z.value == 0.0);
    CHECK(z.site == 0);

    MaxTournament t(zero);
    CHECK(t.max() == 0.0);
    CHECK(t.argmax() == 0);
    CHECK(t.ties() == 6);
    CHECK(t.nth_argmax(4) == 4);
}

TEST_CASE("tournament tracks maximum, lowest argmax and ties") {
    Rng rng(11);
    std::vector<double> v(37);
    for (auto& x : v) x = std::floor(rng.uniform() * 8.0);
    MaxTournament t(v);
    for (int round = 0; round < 2000; ++round) {
        const std::size_t i = rng.below(v.size());
        v[i] = std::floor(rng.uniform() * 8.0);
        t.set(i, v[i]);
        const auto best = rescan_global_signal(v);
        REQUIRE(t.max() == best.value);
        REQUIRE(t.argmax() == best.site);
        std::vector<std::size_t> at_max;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j] == best.value) at_max.push_back(j);
        REQUIRE(t.ties() == at_max.size());
        for (std::uint32_t k = 0; k < at_max.size(); ++k) REQUIRE(t.nth_argmax(k) == at_max[k]);
    }
}

TEST_CASE("global_signal matches a full rescan after every step") {
    Lattice lat = Lattice::init_random({50, 1.0, 5});
    for (int s = 0; s < 5000; ++s) {
        const auto g = lat.global_signal();
        const auto ref = rescan_global_signal(lat.state().signals);
        REQUIRE(g.value == ref.value);
        REQUIRE(g.site == ref.site);
        lat.update_step();
    }
}

TEST_CASE("update_step draws a zero-sum triple and stays local") {
    for (std::uint32_t n : {4u, 5u, 6u, 17u, 780u}) {
        Lattice lat = Lattice::init_random({n, 1.0, n});
        const std::size_t m = lat.sites();
        for (int s = 0; s < 3000; ++s) {
            const auto before = lat.state();
            const auto ev = lat.update_step();
            const auto& after = lat.state();

            const double scale = std::max({std::fabs(ev.drawn[0]), std::fabs(ev.drawn[1]), std::fabs(ev.drawn[2])});
            REQUIRE(std::fabs(ev.drawn[0] + ev.drawn[1] + ev.drawn[2]) <= 1e-12 * scale);
            REQUIRE(ev.step == before.step + 1);
            REQUIRE(ev.old_signal == rescan_global_signal(before.signals).value);

            std::set<std::size_t> replaced{(ev.site + m - 1) % m, ev.site, (ev.site + 1) % m};
            std::set<std::size_t> window;
            for (std::size_t d = 0; d < 5; ++d) window.insert((ev.site + m - 2 + d) % m);
            for (std::size_t j = 0; j < m; ++j) {
                if (!replaced.count(j)) REQUIRE(after.returns[j] == before.returns[j]);
                if (!window.count(j)) REQUIRE(after.signals[j] == before.signals[j]);
            }
            REQUIRE(after.returns[(ev.site + m - 1) % m] == ev.drawn[0]);
            REQUIRE(after.returns[ev.site] == ev.drawn[1]);
            REQUIRE(after.returns[(ev.site + 1) % m] == ev.drawn[2]);
            REQUIRE(after.signals == recompute_signals(after.returns));
        }
        const auto& h = lat.state().hits;
        CHECK(std::accumulate(h.begin(), h.end(), std::uint64_t{0}) == 3 * lat.step());
    }
}

TEST_CASE("projected triple marginal variance is 2/3") {
    Rng rng(2024);
    double sum_sq[3] = {0, 0, 0};
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) {
        const auto t = draw_zero_sum_triple(rng, 1.0);
        for (int k = 0; k < 3; ++k) sum_sq[k] += t[k] * t[k];
    }
    for (double s : sum_sq) {
        CHECK(s / draws >= 0.65);
        CHECK(s / draws <= 0.69);
    }
}

TEST_CASE("incremental lattice equals the O(n) reference") {
    for (std::uint64_t seed : {1ull, 99ull}) {
        Lattice lat = Lattice::init_random({780, 1.0, seed});
        testing::ReferenceLattice ref(780, 1.0, seed);
        REQUIRE(lat.state().returns == ref.returns());
        for (int s = 0; s < 20000; ++s) {
            const auto ev = lat.update_step();
            const std::size_t js = ref.step();
            REQUIRE(ev.site == js);
        }
        CHECK(lat.state().returns == ref.returns());
        CHECK(lat.state().signals == ref.signals());
        CHECK(lat.state().hits == ref.hits());
    }
}

TEST_CASE("run is deterministic and steps=0 is the identity") {
    Lattice a = Lattice::init_random({100, 1.0, 8});
    const auto start = a.state();
    run(a, 0);
    CHECK(a.state().returns == start.returns);
    CHECK(a.step() == 0);

    Lattice b = Lattice::init_random({100, 1.0, 8});
    run(a, 10000);
    run(b, 10000);
    CHECK(a.state().returns == b.state().returns);
    CHECK(a.state().hits == b.state().hits);

    Lattice c = Lattice::init_random({100, 1.0, 9});
    run(c, 10000);
    CHECK(c.state().returns != a.state().returns);
}

TEST_CASE("scaling covariance") {
    SUBCASE("lambda = 4 is exact") {
        Lattice a = Lattice::init_random({780, 1.0, 21});
        Lattice b = Lattice::init_random({780, 4.0, 21});
        for (int s = 0; s < 50000; ++s) REQUIRE(a.update_step().site == b.update_step().site);
        for (std::size_t j = 0; j < a.sites(); ++j) REQUIRE(b.state().returns[j] == 2.0 * a.state().returns[j]);
    }
    SUBCASE("lambda = 2e-5 within round-off") {
        const double lambda = 2e-5;
        Lattice a = Lattice::init_random({780, 1.0, 22});
        Lattice b = Lattice::init_random({780, lambda, 22});
        for (int s = 0; s < 50000; ++s) REQUIRE(a.update_step().site == b.update_step().site);
        const double k = std::sqrt(lambda);
        for (std::size_t j = 0; j < a.sites(); ++j) {
            const double expect = k * a.state().returns[j];
            REQUIRE(std::fabs(b.state().returns[j] - expect) <= 1e-9 * std::fabs(expect));
        }
    }
}

TEST_CASE("random tie-breaking agrees with lowest index when nothing ties") {
    Lattice low = Lattice::init_random({200, 1.0, 4, TieBreak::LowestIndex});
    Lattice rnd = Lattice::init_random({200, 1.0, 4, TieBreak::RandomAmongTies});
    run(low, 20000);
    run(rnd, 20000);
    CHECK(low.state().returns == rnd.state().returns);
}

TEST_CASE("late-time gap level after 2e6 updates") {
    Lattice lat = Lattice::init_random({780, 1.0, 1});
    SignalTraceRecorder trace;
    Recorder* recs[] = {&trace};
    run(lat, 2000000, recs);
    const auto gap = gap_function(trace.trace());
    CHECK(gap.at(2000000) <= 0.05);
    CHECK(lat.step() == 2000000);
}
