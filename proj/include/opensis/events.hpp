#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "opensis/dynamics.hpp"
#include "opensis/graph.hpp"
#include "opensis/rng.hpp"

namespace opensis {

// Distribution of the infection level assigned to fresh agents. Supported
// on [0,1]. point_mass is a degenerate member mostly useful in tests and
// worst-case experiments.
struct ThetaDistribution {
    enum class Kind { uniform01, beta, point_mass };

    Kind kind = Kind::uniform01;
    double alpha = 1.0; // beta shape parameters
    double beta = 1.0;
    double value = 0.0; // point_mass location

    static ThetaDistribution uniform01() { return {}; }

    static ThetaDistribution make_beta(double alpha, double beta) {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("beta shape parameters must be positive");
        ThetaDistribution d;
        d.kind = Kind::beta;
        d.alpha = alpha;
        d.beta = beta;
        return d;
    }

    static ThetaDistribution point_mass(double value) {
        if (!(value >= 0.0 && value <= 1.0))
            throw std::invalid_argument("point mass must lie in [0,1]");
        ThetaDistribution d;
        d.kind = Kind::point_mass;
        d.value = value;
        return d;
    }

    double mean() const {
        switch (kind) {
            case Kind::uniform01: return 0.5;
            case Kind::beta: return alpha / (alpha + beta);
            case Kind::point_mass: return value;
        }
        return 0.0;
    }

    // E[Theta^2] = variance + mean^2, the quantity the closed forms revolve around
    double second_moment() const {
        switch (kind) {
            case Kind::uniform01: return 1.0 / 3.0;
            case Kind::beta:
                return alpha * (alpha + 1.0) / ((alpha + beta) * (alpha + beta + 1.0));
            case Kind::point_mass: return value * value;
        }
        return 0.0;
    }

    double variance() const {
        const double m = mean();
        return second_moment() - m * m;
    }

    double fourth_moment() const {
        switch (kind) {
            case Kind::uniform01: return 0.2;
            case Kind::beta: {
                const double s = alpha + beta;
                return alpha * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) /
                       (s * (s + 1.0) * (s + 2.0) * (s + 3.0));
            }
            case Kind::point_mass: {
                const double v2 = value * value;
                return v2 * v2;
            }
        }
        return 0.0;
    }
};

namespace detail {

// Marsaglia-Tsang; boosts shape < 1 via the power trick
inline double sample_gamma(double shape, RandomStream& rng) {
    if (shape < 1.0) {
        const double u = 1.0 - rng.uniform01(); // (0,1], keeps pow finite
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal01();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - rng.uniform01(); // (0,1]
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
            return d * v;
    }
}

} // namespace detail

inline double sample_theta(const ThetaDistribution& dist, RandomStream& rng) {
    switch (dist.kind) {
        case ThetaDistribution::Kind::uniform01:
            return rng.uniform01();
        case ThetaDistribution::Kind::beta: {
            const double ga = detail::sample_gamma(dist.alpha, rng);
            const double gb = detail::sample_gamma(dist.beta, rng);
            return ga / (ga + gb);
        }
        case ThetaDistribution::Kind::point_mass:
            return dist.value;
    }
    return 0.0;
}

struct EventRates {
    double mu_a = 0.0; // arrival rate (open process)
    double mu_d = 0.0; // departure rate (open process, suppressed at n = 1)
    double mu = 0.0;   // replacement rate (replacement process)
};

enum class EventKind { arrival, departure, replacement };

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::arrival;
    int target_index = -1; // affected agent position (departure / replacement)
    double theta = std::numeric_limits<double>::quiet_NaN(); // fresh level (arrival / replacement)
};

// Next event of the open process after t_now, given the current population
// size n. Departures compete only when n > 1. If the total rate is zero the
// process is dead and nullopt is returned. Draw order is fixed: waiting
// time, kind split, then the event's own attribute.
inline std::optional<Event> next_open_event(double t_now, int n, const EventRates& rates,
                                            const ThetaDistribution& theta,
                                            RandomStream& rng) {
    if (n < 1) throw std::invalid_argument("population size must be >= 1");
    if (rates.mu_a < 0.0 || rates.mu_d < 0.0)
        throw std::invalid_argument("event rates must be nonnegative");
    const double departure_rate = (n > 1) ? rates.mu_d : 0.0;
    const double total = rates.mu_a + departure_rate;
    if (total <= 0.0) return std::nullopt;

    Event e;
    e.t = t_now + rng.exponential(total);
    const double u = rng.uniform01() * total;
    if (u < rates.mu_a) {
        e.kind = EventKind::arrival;
        e.theta = sample_theta(theta, rng);
    } else {
        e.kind = EventKind::departure;
        e.target_index = rng.uniform_index(n);
    }
    return e;
}

// Next replacement in the fixed-size surrogate process: rate mu, uniform
// target among the n0 slots, fresh level from theta.
inline std::optional<Event> next_replacement_event(double t_now, const EventRates& rates,
                                                   int n0, const ThetaDistribution& theta,
                                                   RandomStream& rng) {
    if (n0 < 1) throw std::invalid_argument("population size must be >= 1");
    if (rates.mu < 0.0) throw std::invalid_argument("event rates must be nonnegative");
    if (rates.mu <= 0.0) return std::nullopt;

    Event e;
    e.t = t_now + rng.exponential(rates.mu);
    e.kind = EventKind::replacement;
    e.target_index = rng.uniform_index(n0);
    e.theta = sample_theta(theta, rng);
    return e;
}

// Arrival: append a node wired Bernoulli(p) to everyone, infection level
// e.theta, a fresh stable id.
inline EpidemicState apply_arrival(const EpidemicState& s, const Event& e, double p,
                                   RandomStream& rng) {
    if (e.kind != EventKind::arrival) throw std::invalid_argument("event is not an arrival");
    if (!(e.theta >= 0.0 && e.theta <= 1.0))
        throw std::invalid_argument("arrival level must lie in [0,1]");
    EpidemicState out = s;
    out.adjacency = attach_node(s.adjacency, p, rng);
    out.x.conservativeResize(s.n() + 1);
    out.x[s.n()] = e.theta;
    out.node_ids.push_back(out.next_node_id);
    out.next_node_id += 1;
    out.t = e.t;
    return out;
}

inline EpidemicState apply_departure(const EpidemicState& s, const Event& e) {
    if (e.kind != EventKind::departure) throw std::invalid_argument("event is not a departure");
    const int n = s.n();
    if (n < 2) throw cannot_empty_error("cannot remove the last agent");
    if (e.target_index < 0 || e.target_index >= n)
        throw std::out_of_range("departure target out of range");
    EpidemicState out;
    out.adjacency = remove_node(s.adjacency, e.target_index);
    out.x.resize(n - 1);
    out.x.head(e.target_index) = s.x.head(e.target_index);
    out.x.tail(n - 1 - e.target_index) = s.x.tail(n - 1 - e.target_index);
    out.node_ids = s.node_ids;
    out.node_ids.erase(out.node_ids.begin() + e.target_index);
    out.next_node_id = s.next_node_id;
    out.t = e.t;
    return out;
}

// Replacement: the target keeps its slot and edges, its level resets to
// e.theta and it gets a fresh identity.
inline EpidemicState apply_replacement(const EpidemicState& s, const Event& e) {
    if (e.kind != EventKind::replacement) throw std::invalid_argument("event is not a replacement");
    if (e.target_index < 0 || e.target_index >= s.n())
        throw std::out_of_range("replacement target out of range");
    if (!(e.theta >= 0.0 && e.theta <= 1.0))
        throw std::invalid_argument("replacement level must lie in [0,1]");
    EpidemicState out = s;
    out.x[e.target_index] = e.theta;
    out.node_ids[e.target_index] = out.next_node_id;
    out.next_node_id += 1;
    out.t = e.t;
    return out;
}

} // namespace opensis
