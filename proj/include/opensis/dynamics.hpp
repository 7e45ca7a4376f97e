#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "opensis/errors.hpp"
#include "opensis/graph.hpp"

namespace opensis {

enum class BetaScaling {
    current_n, // beta = beta_bar / n(t), tracks the live population size
    fixed_n0   // beta = beta_bar / n0, frozen at the reference size
};

struct RateParams {
    double beta_bar = 0.0;
    double delta_bar = 0.0;
    BetaScaling scaling = BetaScaling::current_n;
    int n0 = 0; // required when scaling == fixed_n0

    double effective_beta(int n) const {
        if (scaling == BetaScaling::fixed_n0) {
            if (n0 < 1) throw std::invalid_argument("fixed_n0 scaling needs n0 >= 1");
            return beta_bar / n0;
        }
        if (n < 1) throw std::invalid_argument("population size must be >= 1");
        return beta_bar / n;
    }
};

// Full mean-field state: per-agent infection probabilities x in [0,1]^n,
// the contact graph, current time, and stable identities so that events can
// be traced to agents across index shifts.
struct EpidemicState {
    Eigen::VectorXd x;
    Adjacency adjacency;
    double t = 0.0;
    std::vector<std::int64_t> node_ids;
    std::int64_t next_node_id = 0;

    int n() const { return static_cast<int>(x.size()); }
};

// V(x) = |x|^2 / n, the normalized aggregate infection level in [0,1].
inline double aggregate_v(const EpidemicState& s) {
    return s.x.squaredNorm() / static_cast<double>(s.n());
}

namespace detail {

// dx/dt = beta*(A x) - delta*x - beta*x.*(A x), elementwise
inline void sis_rhs(const Eigen::MatrixXd& w, double beta, double delta,
                    const Eigen::VectorXd& x, Eigen::VectorXd& ax, Eigen::VectorXd& out) {
    ax.noalias() = w * x;
    out.array() = beta * ax.array() * (1.0 - x.array()) - delta * x.array();
}

} // namespace detail

inline Eigen::VectorXd sis_derivative(const EpidemicState& s, const RateParams& r) {
    Eigen::VectorXd ax(s.n()), out(s.n());
    detail::sis_rhs(s.adjacency.weights, r.effective_beta(s.n()), r.delta_bar, s.x, ax, out);
    return out;
}

struct FlowDiagnostics {
    double total_clamp = 0.0;      // summed overshoot removed over the whole flow
    double max_single_clamp = 0.0; // worst single-component overshoot seen
};

// A single clamp larger than this means the step size cannot resolve the
// dynamics; the flow aborts rather than silently projecting.
inline constexpr double flow_clamp_abort = 1e-6;

// Classic RK4 with fixed step h; the final partial step lands exactly on
// t_end. Components are clamped back into [0,1] after each step and the
// removed overshoot is accumulated into the diagnostics.
inline EpidemicState integrate_flow(EpidemicState s, const RateParams& r,
                                    double t_end, double h,
                                    FlowDiagnostics* diag = nullptr) {
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    if (t_end < s.t) throw std::invalid_argument("t_end precedes current time");

    const double beta = r.effective_beta(s.n());
    const double delta = r.delta_bar;
    const auto& w = s.adjacency.weights;
    const int n = s.n();
    Eigen::VectorXd ax(n), k1(n), k2(n), k3(n), k4(n), xs(n);

    double t = s.t;
    while (t < t_end) {
        const double remaining = t_end - t;
        const double dt = std::min(h, remaining);

        detail::sis_rhs(w, beta, delta, s.x, ax, k1);
        xs = s.x + (0.5 * dt) * k1;
        detail::sis_rhs(w, beta, delta, xs, ax, k2);
        xs = s.x + (0.5 * dt) * k2;
        detail::sis_rhs(w, beta, delta, xs, ax, k3);
        xs = s.x + dt * k3;
        detail::sis_rhs(w, beta, delta, xs, ax, k4);
        s.x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        double step_clamp = 0.0;
        for (int i = 0; i < n; ++i) {
            double& xi = s.x[i];
            if (xi < 0.0) {
                step_clamp = std::max(step_clamp, -xi);
                if (diag) diag->total_clamp += -xi;
                xi = 0.0;
            } else if (xi > 1.0) {
                step_clamp = std::max(step_clamp, xi - 1.0);
                if (diag) diag->total_clamp += xi - 1.0;
                xi = 1.0;
            }
        }
        if (diag) diag->max_single_clamp = std::max(diag->max_single_clamp, step_clamp);
        if (step_clamp > flow_clamp_abort)
            throw integration_fault("flow left [0,1] by more than the clamp tolerance");

        t = (remaining <= h) ? t_end : t + h;
    }
    s.t = t_end;
    return s;
}

// Differential descent bound on the aggregate: dV/dt <= 2*(beta*lambda1 - delta)*V.
inline double v_descent_rate_bound(const EpidemicState& s, const RateParams& r, double lambda1) {
    return 2.0 * (r.effective_beta(s.n()) * lambda1 - r.delta_bar) * aggregate_v(s);
}

} // namespace opensis
