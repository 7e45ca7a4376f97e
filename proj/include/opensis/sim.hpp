#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "opensis/config.hpp"
#include "opensis/dynamics.hpp"
#include "opensis/events.hpp"
#include "opensis/rng.hpp"

namespace opensis {

// flag: 0 = regular grid sample, 1 = just before an event, 2 = just after
struct TrajectorySample {
    double t;
    double v;
    int n;
    int event_flag;
    int event_index; // into Trajectory::events, -1 for grid samples
};

struct LoggedEvent {
    double t;
    EventKind kind;
    std::int64_t agent_id; // the arriving, departing or replaced agent
    double theta;          // fresh level, NaN for departures
    double x_prev;         // prior level of the affected agent, NaN for arrivals
    double v_pre, v_post;
    int n_pre, n_post;
};

// One realization: the sampled aggregate process plus the full event log.
// Samples are ordered by time; around each event the pre/post pair shares
// the event's timestamp (the process is cadlag).
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<LoggedEvent> events;
    std::uint64_t seed = 0;
    double clamp_diagnostic = 0.0; // total overshoot removed by the flow clamp
};

// t = 0, g, 2g, ..., capped at the horizon (which is appended even when it
// is not a multiple of g).
inline std::vector<double> uniform_grid(double horizon, double spacing) {
    if (!(horizon > 0.0) || !(spacing > 0.0))
        throw std::invalid_argument("horizon and grid spacing must be positive");
    std::vector<double> grid;
    const long long k_max = static_cast<long long>(std::floor(horizon / spacing + 1e-9));
    grid.reserve(static_cast<std::size_t>(k_max) + 2);
    for (long long k = 0; k <= k_max; ++k)
        grid.push_back(std::min(static_cast<double>(k) * spacing, horizon));
    if (grid.back() < horizon) grid.push_back(horizon);
    return grid;
}

// Initial condition shared by all process kinds: levels are drawn before the
// topology, so paired runs of different kinds from the same stream see the
// same x(0).
inline EpidemicState initial_state(ProcessKind kind, const SimulationConfig& cfg,
                                   RandomStream& rng) {
    EpidemicState s;
    s.t = 0.0;
    s.x.resize(cfg.n0);
    if (cfg.init == InitKind::constant) {
        s.x.setConstant(cfg.init_value);
    } else {
        for (int i = 0; i < cfg.n0; ++i)
            s.x[i] = sample_theta(cfg.theta, rng);
    }

    const bool sampled = (kind == ProcessKind::open) ||
                         (kind == ProcessKind::replacement &&
                          cfg.topology_mode == TopologyMode::sampled_er_fixed);
    s.adjacency = sampled ? sample_er_graph(cfg.n0, cfg.p, rng)
                          : expected_adjacency(cfg.n0, cfg.p);

    s.node_ids.resize(cfg.n0);
    for (int i = 0; i < cfg.n0; ++i) s.node_ids[i] = i;
    s.next_node_id = cfg.n0;
    return s;
}

namespace detail {

inline std::optional<Event> sample_next_event(ProcessKind kind, const SimulationConfig& cfg,
                                              const EpidemicState& s, RandomStream& rng) {
    EventRates rates{cfg.mu_a, cfg.mu_d, cfg.mu};
    if (kind == ProcessKind::open)
        return next_open_event(s.t, s.n(), rates, cfg.theta, rng);
    return next_replacement_event(s.t, rates, cfg.n0, cfg.theta, rng);
}

} // namespace detail

// Simulate one realization of the chosen process on [0, horizon]. The
// deterministic flow runs between events (except for the pure replacement
// kind, which has no flow); events and grid crossings are handled in time
// order; events falling beyond the horizon are left unapplied.
inline Trajectory simulate(ProcessKind kind, const SimulationConfig& cfg, std::uint64_t seed) {
    validate_config(cfg);

    RandomStream rng(seed);
    EpidemicState s = initial_state(kind, cfg, rng);

    RateParams rp;
    rp.beta_bar = cfg.beta_bar;
    rp.delta_bar = cfg.delta_bar;
    rp.scaling = (kind == ProcessKind::open) ? BetaScaling::current_n : BetaScaling::fixed_n0;
    rp.n0 = cfg.n0;

    Trajectory traj;
    traj.seed = seed;
    FlowDiagnostics diag;

    const std::vector<double> grid = uniform_grid(cfg.horizon, cfg.grid_spacing);
    const double horizon = cfg.horizon;
    std::size_t gi = 0;

    traj.samples.push_back({0.0, aggregate_v(s), s.n(), 0, -1});
    ++gi;

    std::optional<Event> pending = detail::sample_next_event(kind, cfg, s, rng);

    const double inf = std::numeric_limits<double>::infinity();
    for (;;) {
        const double t_grid = (gi < grid.size()) ? grid[gi] : inf;
        const double t_event = pending ? pending->t : inf;
        const double t_stop = std::min({t_grid, t_event, horizon});

        if (kind == ProcessKind::pure_replacement)
            s.t = t_stop;
        else
            s = integrate_flow(std::move(s), rp, t_stop, cfg.step, &diag);

        const bool grid_here = (gi < grid.size() && t_grid <= t_stop);
        const bool event_here = (pending && t_event <= t_stop);

        if (grid_here) {
            traj.samples.push_back({t_stop, aggregate_v(s), s.n(), 0, -1});
            ++gi;
        }
        if (event_here) {
            const Event e = *pending;
            const int event_index = static_cast<int>(traj.events.size());
            LoggedEvent log;
            log.t = e.t;
            log.kind = e.kind;
            log.theta = e.theta;
            log.v_pre = aggregate_v(s);
            log.n_pre = s.n();
            log.x_prev = (e.kind == EventKind::arrival)
                             ? std::numeric_limits<double>::quiet_NaN()
                             : s.x[e.target_index];
            log.agent_id = (e.kind == EventKind::arrival) ? s.next_node_id
                                                          : s.node_ids[e.target_index];
            traj.samples.push_back({e.t, log.v_pre, log.n_pre, 1, event_index});

            switch (e.kind) {
                case EventKind::arrival: s = apply_arrival(s, e, cfg.p, rng); break;
                case EventKind::departure: s = apply_departure(s, e); break;
                case EventKind::replacement: s = apply_replacement(s, e); break;
            }

            log.v_post = aggregate_v(s);
            log.n_post = s.n();
            traj.events.push_back(log);
            traj.samples.push_back({e.t, log.v_post, log.n_post, 2, event_index});

            pending = detail::sample_next_event(kind, cfg, s, rng);
        }
        if (!grid_here && !event_here) break; // reached the horizon
    }

    traj.clamp_diagnostic = diag.total_clamp;
    return traj;
}

// Ensemble of independent realizations. Realization r always uses the
// stream derived from (base_seed, r), so the result is independent of the
// worker count and of scheduling; threads > 0 forces a worker count.
inline std::vector<Trajectory> run_ensemble(ProcessKind kind, const SimulationConfig& cfg,
                                            int realizations, std::uint64_t base_seed,
                                            int threads = 0) {
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
    std::vector<Trajectory> out(static_cast<std::size_t>(realizations));

    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(realizations));

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= realizations) return;
            try {
                out[static_cast<std::size_t>(r)] =
                    simulate(kind, cfg, derive_stream_seed(base_seed, static_cast<std::uint64_t>(r)));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace opensis
