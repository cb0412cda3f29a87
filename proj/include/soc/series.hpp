#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace soc {

enum class Boundary { Periodic, Open };

struct SimulatedOrigin {
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;
    double variance_w = 1.0;
};

struct HistoricalOrigin {
    std::string source;
    std::size_t offset = 0;
};

using Provenance = std::variant<SimulatedOrigin, HistoricalOrigin>;

/// Returns r_j with provenance. `first_index` is the lattice index j of
/// values[0]: 0 for a simulated field (all n+1 sites), 1 for returns derived
/// from a price series (r_1..r_n, paired with price steps p_{j-1} -> p_j).
struct ReturnsSeries {
    std::vector<double> values;
    Provenance provenance = HistoricalOrigin{};
    Boundary boundary = Boundary::Open;
    std::size_t first_index = 1;
    double scale = 1.0;  // cumulative λ applied by rescale()

    static ReturnsSeries simulated(std::vector<double> values, std::uint64_t seed,
                                   std::uint64_t steps, double variance_w);
    static ReturnsSeries historical(std::vector<double> values, std::string source,
                                    std::size_t offset);

    bool is_simulated() const noexcept { return std::holds_alternative<SimulatedOrigin>(provenance); }
    std::size_t size() const noexcept { return values.size(); }
};

struct PriceSeries {
    std::vector<double> values;  // p_0..p_n
    double p0 = 1.0;
    std::string currency_unit;
    Provenance provenance = HistoricalOrigin{};
};

/// v_j over [begin, end); entries outside that range are NaN.
struct VolatilitySeries {
    std::vector<double> values;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool defined(std::size_t j) const noexcept { return j >= begin && j < end; }
};

/// p_0 = p0, p_j = p_{j-1} exp(r_j). Throws ComputationError on overflow.
PriceSeries prices(const ReturnsSeries& r, double p0, std::string currency_unit = {});

/// r_j = log(p_j / p_{j-1}), j = 1..n.
ReturnsSeries returns_of(const PriceSeries& p);
ReturnsSeries returns_of(std::span<const double> prices);

/// Three-slice variance around each site. Periodic series wrap; Open series
/// leave the two endpoints undefined.
VolatilitySeries volatility(const ReturnsSeries& r);

/// values * sqrt(lambda); the field map for w -> lambda w.
ReturnsSeries rescale(const ReturnsSeries& r, double lambda);

}  // namespace soc
