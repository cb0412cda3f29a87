#include "soc/series.hpp"

#include <cmath>
#include <limits>

#include "soc/error.hpp"

namespace soc {

ReturnsSeries ReturnsSeries::simulated(std::vector<double> values, std::uint64_t seed,
                                       std::uint64_t steps, double variance_w) {
    ReturnsSeries r;
    r.values = std::move(values);
    r.provenance = SimulatedOrigin{seed, steps, variance_w};
    r.boundary = Boundary::Periodic;
    r.first_index = 0;
    return r;
}

ReturnsSeries ReturnsSeries::historical(std::vector<double> values, std::string source,
                                        std::size_t offset) {
    ReturnsSeries r;
    r.values = std::move(values);
    r.provenance = HistoricalOrigin{std::move(source), offset};
    r.boundary = Boundary::Open;
    r.first_index = 1;
    return r;
}

PriceSeries prices(const ReturnsSeries& r, double p0, std::string currency_unit) {
    if (!(p0 > 0.0) || !std::isfinite(p0)) throw InputError("prices: p0 must be positive");
    if (r.first_index > 1) throw InputError("prices: first_index must be 0 or 1");
    PriceSeries p;
    p.p0 = p0;
    p.currency_unit = std::move(currency_unit);
    p.provenance = r.provenance;
    const std::size_t len = r.first_index + r.values.size();
    p.values.resize(len);
    p.values[0] = p0;
    for (std::size_t j = 1; j < len; ++j) {
        const double next = p.values[j - 1] * std::exp(r.values[j - r.first_index]);
        if (!std::isfinite(next) || !(next > 0.0))
            throw ComputationError("prices: overflow at j=" + std::to_string(j));
        p.values[j] = next;
    }
    return p;
}

ReturnsSeries returns_of(std::span<const double> prices) {
    if (prices.size() < 2) throw InputError("returns_of: need at least two prices");
    std::vector<double> r(prices.size() - 1);
    for (std::size_t j = 0; j < prices.size(); ++j) {
        if (!(prices[j] > 0.0) || !std::isfinite(prices[j]))
            throw InputError("returns_of: nonpositive price at j=" + std::to_string(j));
        if (j > 0) r[j - 1] = std::log(prices[j] / prices[j - 1]);
    }
    return ReturnsSeries::historical(std::move(r), "prices", 0);
}

ReturnsSeries returns_of(const PriceSeries& p) {
    ReturnsSeries r = returns_of(std::span<const double>(p.values));
    r.provenance = p.provenance;
    return r;
}

namespace {

double three_slice(double a, double b, double c) noexcept {
    const double mean = (a + b + c) / 3.0;
    const double da = a - mean, db = b - mean, dc = c - mean;
    return (da * da + db * db + dc * dc) / 3.0;
}

}  // namespace

VolatilitySeries volatility(const ReturnsSeries& r) {
    const auto& x = r.values;
    const std::size_t m = x.size();
    if (m < 3) throw InputError("volatility: series length < 3");
    VolatilitySeries v;
    v.values.assign(m, std::numeric_limits<double>::quiet_NaN());
    if (r.boundary == Boundary::Periodic) {
        v.begin = 0;
        v.end = m;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t prev = (j == 0) ? m - 1 : j - 1;
            const std::size_t next = (j + 1 == m) ? 0 : j + 1;
            v.values[j] = three_slice(x[prev], x[j], x[next]);
        }
    } else {
        v.begin = 1;
        v.end = m - 1;
        for (std::size_t j = 1; j + 1 < m; ++j) v.values[j] = three_slice(x[j - 1], x[j], x[j + 1]);
    }
    return v;
}

ReturnsSeries rescale(const ReturnsSeries& r, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InputError("rescale: lambda must be positive");
    ReturnsSeries out = r;
    const double f = std::sqrt(lambda);
    for (auto& v : out.values) v *= f;
    out.scale *= lambda;
    return out;
}

}  // namespace soc
