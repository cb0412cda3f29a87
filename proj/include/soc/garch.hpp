#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "soc/series.hpp"

namespace soc::garch {

/// sigma^2_t = alpha0 + alpha1 eps^2_{t-1} + beta1 sigma^2_{t-1}.
struct Params {
    double alpha0 = 1e-6;
    double alpha1 = 0.05;
    double beta1 = 0.9;

    double persistence() const noexcept { return alpha1 + beta1; }
    bool valid() const noexcept;
    /// Throws InputError unless alpha0 > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1.
    void validate() const;
    std::array<double, 3> as_array() const noexcept { return {alpha0, alpha1, beta1}; }
};

/// Returns centred on their sample mean.
struct ShockSeries {
    std::vector<double> eps;
    double mean = 0.0;

    static ShockSeries from_returns(std::span<const double> returns);
    std::size_t size() const noexcept { return eps.size(); }
    /// (1/T) Σ eps^2, the sigma^2_0 convention.
    double sample_variance() const noexcept;
};

std::vector<double> variance_recursion(const Params& p, const ShockSeries& shocks, double sigma0_sq);

/// Gaussian quasi negative log-likelihood ½ Σ_t [log(2π σ²_t) + ε²_t/σ²_t].
double neg_log_likelihood(const Params& p, const ShockSeries& shocks, double sigma0_sq);
/// Same with sigma^2_0 = shocks.sample_variance().
double neg_log_likelihood(const Params& p, const ShockSeries& shocks);

/// Analytic gradient of neg_log_likelihood w.r.t. (alpha0, alpha1, beta1).
std::array<double, 3> neg_log_likelihood_gradient(const Params& p, const ShockSeries& shocks);

/// Unconstrained coordinates: alpha0 = exp(t0), alpha1 + beta1 = logistic(t1),
/// alpha1 / (alpha1 + beta1) = logistic(t2). Every theta maps to a stationary model.
std::array<double, 3> to_unconstrained(const Params& p);
Params from_unconstrained(const std::array<double, 3>& theta);

struct Options {
    unsigned max_iterations = 500;
    double rel_tolerance = 1e-9;
    double initial_damping = 1e-3;
};

struct Fit {
    std::string series_id;
    Params params;
    std::array<double, 3> std_errors{};
    std::array<double, 3> t_stats{};
    double loglik = 0.0;
    unsigned iterations = 0;
    bool converged = false;
    std::size_t n_obs = 0;
    std::vector<double> objective_history;  // accepted iterates, starting point first
};

/// Levenberg-Marquardt on the BHHH outer-product matrix. Requires >= 50
/// returns with nonzero variance (InputError otherwise).
Fit fit(std::span<const double> returns, const Options& options = {}, std::string series_id = {});
Fit fit(const ReturnsSeries& returns, const Options& options = {}, std::string series_id = {});

/// |t| thresholds for two-sided 5% and 1% significance.
inline constexpr double t_crit_5 = 1.96;
inline constexpr double t_crit_1 = 2.576;

/// "3.23E-08(1.01E-08)[3.214841]": estimate, standard error and t-statistic.
std::string format_cell(std::size_t param_index, double estimate, double std_error, double t_stat);
/// "", "*" (5%) or "**" (1%).
std::string significance_flag(double t_stat);

/// Side-by-side plain-text table for a lattice (L) and historical (N) fit.
std::string fit_report(const Fit& lattice, const Fit& historical, const std::string& set_label = "Set");

}  // namespace soc::garch
