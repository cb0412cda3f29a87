#include "soc/garch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "soc/error.hpp"

namespace soc::garch {

namespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

// Jacobian d(alpha0, alpha1, beta1) / d(theta).
Mat3 reparam_jacobian(const std::array<double, 3>& theta) {
    const double a0 = std::exp(theta[0]);
    const double pers = logistic(theta[1]);
    const double share = logistic(theta[2]);
    const double dp = pers * (1.0 - pers);
    const double ds = share * (1.0 - share);
    Mat3 j = Mat3::Zero();
    j(0, 0) = a0;
    j(1, 1) = share * dp;
    j(1, 2) = pers * ds;
    j(2, 1) = (1.0 - share) * dp;
    j(2, 2) = -pers * ds;
    return j;
}

struct Evaluation {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();  // natural parameters
    Mat3 outer = Mat3::Zero();     // Σ s_t s_tᵀ, natural parameters
};

// Objective plus per-observation scores in natural parameters.
Evaluation evaluate(const Params& p, const ShockSeries& shocks, double sigma0_sq, bool with_scores) {
    constexpr double log_two_pi = 1.8378770664093454836;
    Evaluation ev;
    double var = sigma0_sq;
    Vec3 dvar = Vec3::Zero();
    const auto& eps = shocks.eps;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        if (t > 0) {
            const double e2 = eps[t - 1] * eps[t - 1];
            if (with_scores) dvar = Vec3(1.0, e2, var) + p.beta1 * dvar;
            var = p.alpha0 + p.alpha1 * e2 + p.beta1 * var;
        }
        if (!(var > 0.0) || !std::isfinite(var))
            throw ComputationError("garch: nonpositive conditional variance at t=" + std::to_string(t));
        const double e2t = eps[t] * eps[t];
        ev.value += 0.5 * (log_two_pi + std::log(var) + e2t / var);
        if (with_scores) {
            const Vec3 score = 0.5 * (1.0 / var - e2t / (var * var)) * dvar;
            ev.gradient += score;
            ev.outer += score * score.transpose();
        }
    }
    return ev;
}

Params start_values(const ShockSeries& shocks) {
    const double var = shocks.sample_variance();
    const double sigma0 = var;
    Params best;
    double best_value = std::numeric_limits<double>::infinity();
    for (double a1 : {0.02, 0.05, 0.1, 0.2}) {
        for (double b1 : {0.5, 0.7, 0.85, 0.9, 0.95}) {
            if (a1 + b1 >= 0.995) continue;
            Params p{var * (1.0 - a1 - b1), a1, b1};
            const double v = evaluate(p, shocks, sigma0, false).value;
            if (v < best_value) {
                best_value = v;
                best = p;
            }
        }
    }
    return best;
}

}  // namespace

bool Params::valid() const noexcept {
    return alpha0 > 0.0 && alpha1 >= 0.0 && beta1 >= 0.0 && alpha1 + beta1 < 1.0 &&
           std::isfinite(alpha0);
}

void Params::validate() const {
    if (!valid())
        throw InputError("garch: parameters violate alpha0 > 0, alpha1, beta1 >= 0, alpha1 + beta1 < 1");
}

ShockSeries ShockSeries::from_returns(std::span<const double> returns) {
    ShockSeries s;
    if (returns.empty()) return s;
    double sum = 0.0;
    for (double r : returns) sum += r;
    s.mean = sum / static_cast<double>(returns.size());
    s.eps.reserve(returns.size());
    for (double r : returns) s.eps.push_back(r - s.mean);
    return s;
}

double ShockSeries::sample_variance() const noexcept {
    if (eps.empty()) return 0.0;
    double ss = 0.0;
    for (double e : eps) ss += e * e;
    return ss / static_cast<double>(eps.size());
}

std::vector<double> variance_recursion(const Params& p, const ShockSeries& shocks, double sigma0_sq) {
    if (!(sigma0_sq > 0.0)) throw InputError("variance_recursion: sigma0_sq must be positive");
    std::vector<double> var(shocks.size());
    if (var.empty()) return var;
    var[0] = sigma0_sq;
    for (std::size_t t = 1; t < var.size(); ++t)
        var[t] = p.alpha0 + p.alpha1 * shocks.eps[t - 1] * shocks.eps[t - 1] + p.beta1 * var[t - 1];
    return var;
}

double neg_log_likelihood(const Params& p, const ShockSeries& shocks, double sigma0_sq) {
    return evaluate(p, shocks, sigma0_sq, false).value;
}

double neg_log_likelihood(const Params& p, const ShockSeries& shocks) {
    return neg_log_likelihood(p, shocks, shocks.sample_variance());
}

std::array<double, 3> neg_log_likelihood_gradient(const Params& p, const ShockSeries& shocks) {
    const Vec3 g = evaluate(p, shocks, shocks.sample_variance(), true).gradient;
    return {g[0], g[1], g[2]};
}

std::array<double, 3> to_unconstrained(const Params& p) {
    const double pers = p.alpha1 + p.beta1;
    return {std::log(p.alpha0), logit(pers), logit(p.alpha1 / pers)};
}

Params from_unconstrained(const std::array<double, 3>& theta) {
    // logistic() rounds to exactly 1 beyond ~37; cap so alpha1 + beta1 < 1 survives rounding.
    const double pers = logistic(std::min(theta[1], 30.0));
    const double share = logistic(theta[2]);
    return {std::exp(theta[0]), pers * share, pers * (1.0 - share)};
}

Fit fit(std::span<const double> returns, const Options& options, std::string series_id) {
    if (returns.size() < 50)
        throw InputError("garch fit: need at least 50 returns, got " + std::to_string(returns.size()));
    const ShockSeries shocks = ShockSeries::from_returns(returns);
    const double sigma0 = shocks.sample_variance();
    double scale = 0.0;
    for (double r : returns) scale = std::max(scale, std::abs(r));
    // Centring a constant series leaves round-off of order eps * |r|.
    if (!(sigma0 > 1e-24 * scale * scale) || !std::isfinite(sigma0))
        throw InputError("garch fit: returns have zero variance");

    Fit out;
    out.series_id = std::move(series_id);
    out.n_obs = shocks.size();

    std::array<double, 3> theta = to_unconstrained(start_values(shocks));
    auto eval_theta = [&](const std::array<double, 3>& th, bool scores) {
        return evaluate(from_unconstrained(th), shocks, sigma0, scores);
    };

    Evaluation cur = eval_theta(theta, true);
    out.objective_history.push_back(cur.value);
    double damping = options.initial_damping;
    unsigned iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Mat3 jac = reparam_jacobian(theta);
        const Vec3 g = jac.transpose() * cur.gradient;
        const Mat3 b = jac.transpose() * cur.outer * jac;
        const double floor = 1e-12 * std::max(b.diagonal().maxCoeff(), 1e-300);

        bool accepted = false;
        while (!accepted && damping < 1e16) {
            Mat3 lhs = b;
            for (int i = 0; i < 3; ++i) lhs(i, i) += damping * std::max(b(i, i), floor);
            const Vec3 step = lhs.ldlt().solve(-g);
            std::array<double, 3> trial{theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]};
            double value = std::numeric_limits<double>::infinity();
            Evaluation next;
            if (step.allFinite()) {
                try {
                    next = eval_theta(trial, true);
                    value = next.value;
                } catch (const ComputationError&) {
                }
            }
            if (std::isfinite(value) && value < cur.value) {
                const double rel = (cur.value - value) / std::max(std::abs(cur.value), 1.0);
                theta = trial;
                cur = next;
                out.objective_history.push_back(value);
                damping = std::max(damping / 10.0, 1e-12);
                accepted = true;
                if (rel < options.rel_tolerance) out.converged = true;
            } else {
                damping *= 10.0;
            }
        }
        if (!accepted) {
            // No descent direction left at any damping: stationary to working precision.
            out.converged = true;
            break;
        }
        if (out.converged) {
            ++iter;
            break;
        }
    }
    out.iterations = iter;
    out.params = from_unconstrained(theta);
    out.loglik = -cur.value;

    // Delta method: cov(natural) = J (BHHH_theta)^-1 Jᵀ.
    const Mat3 jac = reparam_jacobian(theta);
    const Mat3 b = jac.transpose() * cur.outer * jac;
    const Mat3 cov = jac * b.inverse() * jac.transpose();
    const auto est = out.params.as_array();
    for (int i = 0; i < 3; ++i) {
        const double var = cov(i, i);
        out.std_errors[i] = var > 0.0 ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
        out.t_stats[i] = est[i] / out.std_errors[i];
    }
    return out;
}

Fit fit(const ReturnsSeries& returns, const Options& options, std::string series_id) {
    return fit(std::span<const double>(returns.values), options, std::move(series_id));
}

namespace {

std::string sig_digits(double x, int digits) {
    if (!std::isfinite(x)) return "nan";
    const double ax = std::abs(x);
    int before = ax >= 1.0 ? static_cast<int>(std::floor(std::log10(ax))) + 1 : 1;
    int decimals = std::max(0, digits - before);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    // Rounding may carry into a new leading digit (9.9999999 -> 10.000000).
    std::string s = buf;
    const auto digit_count = std::count_if(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (digit_count > digits && decimals > 0) {
        std::snprintf(buf, sizeof buf, "%.*f", decimals - 1, x);
        s = buf;
    }
    return s;
}

std::string format_value(std::size_t param_index, double v) {
    char buf[64];
    if (param_index == 0)
        std::snprintf(buf, sizeof buf, "%.2E", v);
    else
        std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string format_cell(std::size_t param_index, double estimate, double std_error, double t_stat) {
    return format_value(param_index, estimate) + "(" + format_value(param_index, std_error) + ")[" +
           sig_digits(t_stat, 7) + "]";
}

std::string significance_flag(double t_stat) {
    const double a = std::abs(t_stat);
    if (a > t_crit_1) return "**";
    if (a > t_crit_5) return "*";
    return "";
}

std::string fit_report(const Fit& lattice, const Fit& historical, const std::string& set_label) {
    static const char* names[] = {"alpha0", "alpha1", "beta1"};
    std::vector<std::array<std::string, 3>> rows;
    std::size_t width_l = set_label.size() + 2, width_n = set_label.size() + 2;
    const auto el = lattice.params.as_array();
    const auto en = historical.params.as_array();
    for (std::size_t i = 0; i < 3; ++i) {
        std::string l = format_cell(i, el[i], lattice.std_errors[i], lattice.t_stats[i]);
        l += significance_flag(lattice.t_stats[i]);
        std::string n = format_cell(i, en[i], historical.std_errors[i], historical.t_stats[i]);
        n += significance_flag(historical.t_stats[i]);
        width_l = std::max(width_l, l.size());
        width_n = std::max(width_n, n.size());
        rows.push_back({names[i], l, n});
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    std::string out;
    const std::string rule(8 + 2 + width_l + 2 + width_n, '-');
    out += rule + "\n";
    out += pad("", 8) + "  " + pad(set_label + " L", width_l) + "  " + set_label + " N\n";
    out += rule + "\n";
    for (const auto& r : rows) out += pad(r[0], 8) + "  " + pad(r[1], width_l) + "  " + r[2] + "\n";
    out += rule + "\n";
    out += "* significant at 5% (|t| > 1.96), ** at 1% (|t| > 2.576)\n";
    return out;
}

}  // namespace soc::garch
