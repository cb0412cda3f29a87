#include <doctest.h>

#include <cmath>

#include "soc/error.hpp"
#include "soc/lattice.hpp"
#include "soc/series.hpp"

using namespace soc;

namespace {

bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b)); }

ReturnsSeries random_historical(std::uint64_t seed, std::size_t n, double scale) {
    Rng rng(seed);
    std::vector<double> r(n);
    for (auto& x : r) x = scale * rng.normal();
    return ReturnsSeries::historical(std::move(r), "synthetic", 0);
}

ReturnsSeries lattice_returns(std::uint64_t seed) {
    Lattice lat = Lattice::init_random({780, 1.0, seed});
    run(lat, 20000);
    return ReturnsSeries::simulated(lat.state().returns, seed, lat.step(), 1.0);
}

}  // namespace

TEST_CASE("provenance fixes the boundary") {
    const auto sim = lattice_returns(1);
    CHECK(sim.is_simulated());
    CHECK(sim.boundary == Boundary::Periodic);
    CHECK(sim.size() == 781);
    const auto hist = random_historical(1, 10, 1.0);
    CHECK_FALSE(hist.is_simulated());
    CHECK(hist.boundary == Boundary::Open);
}

TEST_CASE("prices from returns") {
    const auto r = ReturnsSeries::historical({0.1, -0.1}, "x", 0);
    const auto p = prices(r, 100.0);
    REQUIRE(p.values.size() == 3);
    CHECK(p.values[0] == 100.0);
    CHECK(p.values[1] == doctest::Approx(100.0 * std::exp(0.1)).epsilon(1e-15));
    CHECK(p.values[2] == doctest::Approx(100.0).epsilon(1e-15));

    const auto flat = prices(ReturnsSeries::historical(std::vector<double>(20, 0.0), "x", 0), 1950.0);
    for (double v : flat.values) CHECK(v == 1950.0);

    CHECK_THROWS_AS(prices(r, 0.0), InputError);
    CHECK_THROWS_AS(prices(ReturnsSeries::historical({800.0, 800.0}, "x", 0), 1.0), ComputationError);
}

TEST_CASE("returns from prices") {
    const std::vector<double> p{1.0, std::exp(1.0), std::exp(1.0)};
    const auto r = returns_of(p);
    REQUIRE(r.size() == 2);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.values[1] == 0.0);
    for (double x : returns_of(std::vector<double>(5, 3.0)).values) CHECK(x == 0.0);
    CHECK_THROWS_AS(returns_of(std::vector<double>{1.0, -2.0, 3.0}), InputError);
    CHECK_THROWS_AS(returns_of(std::vector<double>{1.0, 0.0}), InputError);
}

TEST_CASE("prices and returns are an inverse pair") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = random_historical(seed, 500, 0.01);
        const auto back = returns_of(prices(r, 1950.0));
        REQUIRE(back.size() == r.size());
        for (std::size_t j = 0; j < r.size(); ++j)
            REQUIRE(std::fabs(back.values[j] - r.values[j]) <= 1e-12 * std::max(1e-2, std::fabs(r.values[j])));

        Rng rng(seed + 1000);
        std::vector<double> p(300);
        for (auto& x : p) x = 10.0 + 1000.0 * rng.uniform();
        const auto again = prices(returns_of(p), p[0]);
        REQUIRE(again.values.size() == p.size());
        for (std::size_t j = 0; j < p.size(); ++j) REQUIRE(rel_close(again.values[j], p[j], 1e-12));
    }
}

TEST_CASE("lattice field prices") {
    const auto r = rescale(lattice_returns(3), 2e-5);
    const auto p = prices(r, 1950.0);
    REQUIRE(p.values.size() == r.size());
    CHECK(p.values[0] == 1950.0);
    for (std::size_t j = 1; j < p.values.size(); ++j) {
        REQUIRE(p.values[j] > 0.0);
        REQUIRE(std::fabs(std::log(p.values[j] / p.values[j - 1]) - r.values[j]) <= 1e-12);
    }
    // Units: p0 has no effect on the returns recovered from the prices.
    const auto a = returns_of(prices(r, 1.0));
    const auto b = returns_of(prices(r, 1950.0));
    for (std::size_t j = 0; j < a.size(); ++j) REQUIRE(std::fabs(a.values[j] - b.values[j]) <= 1e-15);
}

TEST_CASE("volatility windows") {
    const auto c = volatility(ReturnsSeries::historical(std::vector<double>(6, 0.3), "x", 0));
    for (std::size_t j = 1; j < 5; ++j) CHECK(c.values[j] == doctest::Approx(0.0));

    const auto v = volatility(ReturnsSeries::historical({0.0, 1.0, 2.0}, "x", 0));
    CHECK(v.begin == 1);
    CHECK(v.end == 2);
    CHECK(v.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_FALSE(v.defined(0));
    CHECK_FALSE(v.defined(2));
    CHECK(std::isnan(v.values[0]));

    auto periodic = ReturnsSeries::simulated({0.0, 1.0, 2.0}, 0, 0, 1.0);
    const auto vp = volatility(periodic);
    CHECK(vp.begin == 0);
    CHECK(vp.end == 3);
    for (double x : vp.values) CHECK(x == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(volatility(ReturnsSeries::historical({1.0, 2.0}, "x", 0)), InputError);
}

TEST_CASE("volatility is quadratically homogeneous") {
    for (double lambda : {2e-5, 0.5, 4.0, 37.0}) {
        for (std::uint64_t seed : {1ull, 2ull}) {
            const auto r = lattice_returns(seed);
            const auto v = volatility(r);
            const auto vs = volatility(rescale(r, lambda));
            for (std::size_t j = 0; j < v.values.size(); ++j)
                REQUIRE(rel_close(vs.values[j], lambda * v.values[j], 1e-12));
        }
        const auto h = random_historical(5, 200, 1.0);
        const auto v = volatility(h);
        const auto vs = volatility(rescale(h, lambda));
        for (std::size_t j = v.begin; j < v.end; ++j) REQUIRE(rel_close(vs.values[j], lambda * v.values[j], 1e-12));
    }
}

TEST_CASE("volatility does not depend on p0") {
    const auto r = random_historical(8, 100, 0.01);
    const auto v1 = volatility(returns_of(prices(r, 1.0)));
    const auto v2 = volatility(returns_of(prices(r, 1950.0, "USD")));
    for (std::size_t j = v1.begin; j < v1.end; ++j) CHECK(v1.values[j] == doctest::Approx(v2.values[j]).epsilon(1e-9));
}

TEST_CASE("rescale") {
    const auto r = ReturnsSeries::historical({1.0, -2.0, 4.0}, "x", 0);
    const auto s = rescale(r, 4.0);
    CHECK(s.values == std::vector<double>{2.0, -4.0, 8.0});
    CHECK(s.scale == 4.0);
    CHECK(rescale(s, 0.25).values == r.values);
    CHECK_THROWS_AS(rescale(r, 0.0), InputError);
    CHECK_THROWS_AS(rescale(r, -1.0), InputError);
}
