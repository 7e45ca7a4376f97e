#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opensis/config.hpp"
#include "opensis/errors.hpp"
#include "opensis/sim.hpp"

namespace opensis {

namespace detail {

inline void check_bound_params(int n0, double p, double beta_bar, double delta_bar) {
    if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
    check_probability(p, "edge probability");
    if (!(beta_bar >= 0.0) || !(delta_bar >= 0.0))
        throw std::invalid_argument("rates must be nonnegative");
}

// mu + 2*n0*delta_bar - 2*beta_bar*p*(n0-1), the decay margin every
// asymptotic bound divides by
inline double bound_denominator(int n0, double p, double beta_bar, double delta_bar, double mu) {
    return mu + 2.0 * n0 * delta_bar - 2.0 * beta_bar * p * (n0 - 1.0);
}

} // namespace detail

struct StabilityResult {
    double reproduction_ratio; // lambda1_bar * beta / delta_bar
    bool stable;               // ratio < 1
};

// Spectral stability of the healthy state on the expected topology:
// lambda1_bar = p*(n0-1), beta = beta_bar/n0.
inline StabilityResult stability_check(int n0, double p, double beta_bar, double delta_bar) {
    detail::check_bound_params(n0, p, beta_bar, delta_bar);
    if (!(delta_bar > 0.0)) throw std::invalid_argument("delta_bar must be positive");
    const double ratio = p * (n0 - 1.0) * (beta_bar / n0) / delta_bar;
    return {ratio, ratio < 1.0};
}

// Exact E[V(t)] for the flowless replacement process:
// (V0 - E[Theta^2]) * exp(-mu*t/n0) + E[Theta^2].
inline double pure_replacement_expectation(double t, double v0, double mu, int n0,
                                           const ThetaDistribution& theta) {
    if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
    if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
    if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
    const double m2 = theta.second_moment();
    return (v0 - m2) * std::exp(-mu * t / n0) + m2;
}

// Asymptotic bound on E[V] for the replacement process with flow. Exists
// only when the turnover-plus-healing margin is positive.
inline double ev_limsup_bound(int n0, double p, double beta_bar, double delta_bar, double mu,
                              const ThetaDistribution& theta) {
    detail::check_bound_params(n0, p, beta_bar, delta_bar);
    if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
    const double denom = detail::bound_denominator(n0, p, beta_bar, delta_bar, mu);
    if (denom <= 0.0)
        throw unstable_configuration("no asymptotic bound: mu + 2*n0*delta_bar <= 2*beta_bar*p*(n0-1)");
    return mu * theta.second_moment() / denom;
}

struct TransientBoundParams {
    double offset;   // multiplies the decaying exponential
    double level;    // asymptotic level, equals the limsup bound
    double exponent; // negative decay rate of the transient term
};

inline TransientBoundParams ev_transient_params(int n0, double p, double beta_bar,
                                                double delta_bar, double mu, double ev0,
                                                const ThetaDistribution& theta) {
    const double level = ev_limsup_bound(n0, p, beta_bar, delta_bar, mu, theta);
    const double denom = detail::bound_denominator(n0, p, beta_bar, delta_bar, mu);
    return {ev0 - level, level, -denom / n0};
}

// Transient envelope for E[V(t)]: offset * e^{exponent * t} + level.
inline double ev_transient_bound(double t, const TransientBoundParams& params) {
    if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
    return params.offset * std::exp(params.exponent * t) + params.level;
}

// Asymptotic bound on E[V^2] (and hence on Var(V)) for the replacement
// process with flow.
inline double ev2_limsup_bound(int n0, double p, double beta_bar, double delta_bar, double mu,
                               const ThetaDistribution& theta) {
    detail::check_bound_params(n0, p, beta_bar, delta_bar);
    if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
    const double denom = detail::bound_denominator(n0, p, beta_bar, delta_bar, mu);
    if (denom <= 0.0)
        throw unstable_configuration("no asymptotic bound: mu + 2*n0*delta_bar <= 2*beta_bar*p*(n0-1)");
    const double m2 = theta.second_moment();
    const double m4 = theta.fourth_moment();
    return (mu * m4 * denom + mu * mu * m2 * (2.0 * m2 * (n0 - 1.0) + 1.0)) /
           (2.0 * n0 * denom * denom);
}

// Mean initial aggregate level implied by the config's initial condition.
inline double initial_v_mean(const SimulationConfig& cfg) {
    if (cfg.init == InitKind::constant) return cfg.init_value * cfg.init_value;
    return cfg.theta.second_moment();
}

// Everything the closed forms can say about a configuration. The optional
// fields are absent when the margin is nonpositive (bounds do not exist).
struct BoundReport {
    double reproduction_ratio = 0.0;
    bool stable = false;
    double pure_replacement_asymptote = 0.0; // E[Theta^2]
    std::optional<double> ev_limsup;
    std::optional<TransientBoundParams> ev_transient;
    std::optional<double> ev2_limsup;
    std::optional<double> var_limsup; // equals ev2_limsup when present
};

inline BoundReport make_bound_report(const SimulationConfig& cfg) {
    BoundReport rep;
    const StabilityResult st = stability_check(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar);
    rep.reproduction_ratio = st.reproduction_ratio;
    rep.stable = st.stable;
    rep.pure_replacement_asymptote = cfg.theta.second_moment();
    const double denom =
        detail::bound_denominator(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu);
    if (denom > 0.0) {
        rep.ev_limsup = ev_limsup_bound(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu, cfg.theta);
        rep.ev_transient = ev_transient_params(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu,
                                               initial_v_mean(cfg), cfg.theta);
        rep.ev2_limsup = ev2_limsup_bound(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu, cfg.theta);
        rep.var_limsup = rep.ev2_limsup;
    }
    return rep;
}

// Ensemble moments of V on a common grid, with standard errors.
struct MomentEstimates {
    std::vector<double> grid;
    std::vector<double> ev, ev_se;   // mean and its standard error
    std::vector<double> ev2, ev2_se; // second moment and its standard error
    std::vector<double> var, var_se; // unbiased variance, batch-based error
    int realizations = 0;
};

namespace detail {

// grid-flagged V values of one trajectory, validated against the given grid
inline std::vector<double> grid_values(const Trajectory& traj, const std::vector<double>& grid) {
    std::vector<double> v;
    v.reserve(grid.size());
    for (const auto& s : traj.samples)
        if (s.event_flag == 0) v.push_back(s.v);
    if (v.size() != grid.size())
        throw grid_mismatch_error("trajectory has " + std::to_string(v.size()) +
                                  " grid samples, expected " + std::to_string(grid.size()));
    std::size_t k = 0;
    for (const auto& s : traj.samples) {
        if (s.event_flag != 0) continue;
        if (s.t != grid[k])
            throw grid_mismatch_error("trajectory grid time " + std::to_string(s.t) +
                                      " does not match expected " + std::to_string(grid[k]));
        ++k;
    }
    return v;
}

} // namespace detail

// Pointwise Monte Carlo estimates over the ensemble. Mean and second-moment
// errors are iid standard errors; the variance error comes from splitting
// the ensemble into up to 50 batches and looking at the spread of per-batch
// variances. Needs at least 2 realizations.
inline MomentEstimates estimate_moments(const std::vector<Trajectory>& trajectories,
                                        const std::vector<double>& grid) {
    const int big_r = static_cast<int>(trajectories.size());
    if (big_r < 2) throw std::invalid_argument("moment estimation needs at least 2 realizations");

    std::vector<std::vector<double>> values;
    values.reserve(trajectories.size());
    for (const auto& traj : trajectories)
        values.push_back(detail::grid_values(traj, grid));

    MomentEstimates est;
    est.grid = grid;
    est.realizations = big_r;
    const std::size_t big_k = grid.size();
    est.ev.resize(big_k);
    est.ev_se.resize(big_k);
    est.ev2.resize(big_k);
    est.ev2_se.resize(big_k);
    est.var.resize(big_k);
    est.var_se.resize(big_k);

    const int batches = std::min(50, big_r / 2);
    std::vector<double> batch_vars(static_cast<std::size_t>(std::max(batches, 0)));

    for (std::size_t k = 0; k < big_k; ++k) {
        double sum = 0.0, sum2 = 0.0;
        double lo = values[0][k], hi = lo;
        for (int r = 0; r < big_r; ++r) {
            const double v = values[static_cast<std::size_t>(r)][k];
            sum += v;
            sum2 += v * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) { // degenerate column: exactly zero spread, no rounding noise
            est.ev[k] = lo;
            est.ev2[k] = lo * lo;
            est.var[k] = 0.0;
            est.ev_se[k] = est.ev2_se[k] = est.var_se[k] = 0.0;
            continue;
        }
        const double mean = sum / big_r;
        const double mean2 = sum2 / big_r;
        // centered second passes avoid the cancellation of sum2 - n*mean^2
        double cvar = 0.0, cvar2 = 0.0;
        for (int r = 0; r < big_r; ++r) {
            const double v = values[static_cast<std::size_t>(r)][k];
            const double d = v - mean;
            const double d2 = v * v - mean2;
            cvar += d * d;
            cvar2 += d2 * d2;
        }
        const double var_v = cvar / (big_r - 1);
        const double var_v2 = cvar2 / (big_r - 1);

        est.ev[k] = mean;
        est.ev2[k] = mean2;
        est.var[k] = var_v;
        est.ev_se[k] = std::sqrt(var_v / big_r);
        est.ev2_se[k] = std::sqrt(var_v2 / big_r);

        if (batches >= 2) {
            // contiguous batches; remainder realizations spread over the first ones
            const int base = big_r / batches;
            const int extra = big_r % batches;
            int start = 0;
            for (int b = 0; b < batches; ++b) {
                const int len = base + (b < extra ? 1 : 0);
                double bs = 0.0;
                for (int r = start; r < start + len; ++r)
                    bs += values[static_cast<std::size_t>(r)][k];
                const double bm = bs / len;
                double bc = 0.0;
                for (int r = start; r < start + len; ++r) {
                    const double d = values[static_cast<std::size_t>(r)][k] - bm;
                    bc += d * d;
                }
                batch_vars[static_cast<std::size_t>(b)] = bc / (len - 1);
                start += len;
            }
            double vm = 0.0;
            for (int b = 0; b < batches; ++b) vm += batch_vars[static_cast<std::size_t>(b)];
            vm /= batches;
            double vv = 0.0;
            for (int b = 0; b < batches; ++b) {
                const double d = batch_vars[static_cast<std::size_t>(b)] - vm;
                vv += d * d;
            }
            vv /= (batches - 1);
            est.var_se[k] = std::sqrt(vv / batches);
        } else {
            est.var_se[k] = 0.0;
        }
    }
    return est;
}

// Mean of a grid series over the trailing fraction of the time window.
inline double tail_average(const std::vector<double>& grid, const std::vector<double>& series,
                           double tail_fraction) {
    if (grid.size() != series.size() || grid.empty())
        throw std::invalid_argument("grid and series must match and be nonempty");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must lie in (0,1)");
    const double start = grid.back() * (1.0 - tail_fraction);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] >= start) {
            sum += series[k];
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

struct ComparisonRow {
    double t = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    bool bound_available = false;
    double bound = 0.0;
    double margin = 0.0;    // bound - estimate
    bool violation = false; // estimate - 4*se > bound, where the bound applies
};

// Estimates placed next to the bounds they must respect. The transient mean
// envelope holds for every t, so its rows are flagged pointwise; the
// second-moment and variance bounds are asymptotic and only flag inside the
// trailing tail window, which starts at tail_start.
struct BoundComparison {
    std::vector<ComparisonRow> ev, ev2, var;
    double tail_start = 0.0;

    bool any_violation() const {
        for (const auto* rows : {&ev, &ev2, &var})
            for (const auto& row : *rows)
                if (row.violation) return true;
        return false;
    }
};

inline BoundComparison compare_bounds(const MomentEstimates& est, const BoundReport& rep,
                                      double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("tail_fraction must lie in (0,1)");
    BoundComparison cmp;
    const std::size_t big_k = est.grid.size();
    cmp.tail_start = est.grid.empty() ? 0.0 : est.grid.back() * (1.0 - tail_fraction);
    cmp.ev.resize(big_k);
    cmp.ev2.resize(big_k);
    cmp.var.resize(big_k);
    for (std::size_t k = 0; k < big_k; ++k) {
        const double t = est.grid[k];

        ComparisonRow& ev_row = cmp.ev[k];
        ev_row.t = t;
        ev_row.estimate = est.ev[k];
        ev_row.se = est.ev_se[k];
        if (rep.ev_transient) {
            ev_row.bound_available = true;
            ev_row.bound = ev_transient_bound(t, *rep.ev_transient);
            ev_row.margin = ev_row.bound - ev_row.estimate;
            ev_row.violation = ev_row.estimate - 4.0 * ev_row.se > ev_row.bound;
        }

        const bool in_tail = t >= cmp.tail_start;
        ComparisonRow& ev2_row = cmp.ev2[k];
        ev2_row.t = t;
        ev2_row.estimate = est.ev2[k];
        ev2_row.se = est.ev2_se[k];
        if (rep.ev2_limsup) {
            ev2_row.bound_available = true;
            ev2_row.bound = *rep.ev2_limsup;
            ev2_row.margin = ev2_row.bound - ev2_row.estimate;
            ev2_row.violation = in_tail && ev2_row.estimate - 4.0 * ev2_row.se > ev2_row.bound;
        }

        ComparisonRow& var_row = cmp.var[k];
        var_row.t = t;
        var_row.estimate = est.var[k];
        var_row.se = est.var_se[k];
        if (rep.var_limsup) {
            var_row.bound_available = true;
            var_row.bound = *rep.var_limsup;
            var_row.margin = var_row.bound - var_row.estimate;
            var_row.violation = in_tail && var_row.estimate - 4.0 * var_row.se > var_row.bound;
        }
    }
    return cmp;
}

// For the flowless kind the mean has an exact closed form instead of an
// upper bound; rows compare against that curve and flag deviations beyond
// 4 standard errors on either side.
inline BoundComparison compare_pure(const MomentEstimates& est, double ev0, double mu, int n0,
                                    const ThetaDistribution& theta, double tail_fraction) {
    BoundComparison cmp;
    const std::size_t big_k = est.grid.size();
    cmp.tail_start = est.grid.empty() ? 0.0 : est.grid.back() * (1.0 - tail_fraction);
    cmp.ev.resize(big_k);
    cmp.ev2.resize(big_k);
    cmp.var.resize(big_k);
    for (std::size_t k = 0; k < big_k; ++k) {
        const double t = est.grid[k];
        ComparisonRow& ev_row = cmp.ev[k];
        ev_row.t = t;
        ev_row.estimate = est.ev[k];
        ev_row.se = est.ev_se[k];
        ev_row.bound_available = true;
        ev_row.bound = pure_replacement_expectation(t, ev0, mu, n0, theta);
        ev_row.margin = ev_row.bound - ev_row.estimate;
        ev_row.violation = std::abs(ev_row.estimate - ev_row.bound) > 4.0 * ev_row.se &&
                           ev_row.se > 0.0;

        cmp.ev2[k] = {t, est.ev2[k], est.ev2_se[k], false, 0.0, 0.0, false};
        cmp.var[k] = {t, est.var[k], est.var_se[k], false, 0.0, 0.0, false};
    }
    return cmp;
}

} // namespace opensis
