#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "opensis/events.hpp"
#include "opensis/rng.hpp"

using opensis::EpidemicState;
using opensis::Event;
using opensis::EventKind;
using opensis::EventRates;
using opensis::RandomStream;
using opensis::ThetaDistribution;

namespace {

EpidemicState uniform_state(int n, double c, double p = 0.5) {
    EpidemicState s;
    s.adjacency = opensis::expected_adjacency(n, p);
    s.x = Eigen::VectorXd::Constant(n, c);
    s.node_ids.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s.node_ids[static_cast<std::size_t>(i)] = i;
    s.next_node_id = n;
    return s;
}

} // namespace

TEST_CASE("uniform01 moments and the beta(1,1) coincidence") {
    const auto u = ThetaDistribution::uniform01();
    REQUIRE(u.mean() == 0.5);
    REQUIRE(std::abs(u.variance() - 1.0 / 12.0) < 1e-15);
    REQUIRE(std::abs(u.second_moment() - 1.0 / 3.0) < 1e-15);
    REQUIRE(std::abs(u.fourth_moment() - 0.2) < 1e-15);

    const auto b11 = ThetaDistribution::make_beta(1.0, 1.0);
    REQUIRE(std::abs(b11.mean() - u.mean()) < 1e-15);
    REQUIRE(std::abs(b11.variance() - u.variance()) < 1e-15);
    REQUIRE(std::abs(b11.second_moment() - u.second_moment()) < 1e-15);
    REQUIRE(std::abs(b11.fourth_moment() - u.fourth_moment()) < 1e-15);
}

TEST_CASE("theta moment identities hold across the beta family") {
    RandomStream rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = 0.2 + 5.0 * rng.uniform01();
        const double b = 0.2 + 5.0 * rng.uniform01();
        const auto d = ThetaDistribution::make_beta(a, b);
        REQUIRE(d.mean() >= 0.0);
        REQUIRE(d.mean() <= 1.0);
        REQUIRE(d.variance() >= 0.0);
        REQUIRE(std::abs(d.second_moment() - (d.variance() + d.mean() * d.mean())) < 1e-15);
        REQUIRE(d.fourth_moment() >= d.second_moment() * d.second_moment() - 1e-15);
    }
    REQUIRE_THROWS_AS(ThetaDistribution::make_beta(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ThetaDistribution::point_mass(1.5), std::invalid_argument);
}

TEST_CASE("uniform theta empirical mean converges") {
    RandomStream rng(42);
    const auto d = ThetaDistribution::uniform01();
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = opensis::sample_theta(d, rng);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        sum += v;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 3.0 * (1.0 / std::sqrt(12.0)) / 1000.0);
}

TEST_CASE("beta(2,3) sampling matches its analytic moments") {
    RandomStream rng(43);
    const auto d = ThetaDistribution::make_beta(2.0, 3.0);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = opensis::sample_theta(d, rng);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double m2 = sum2 / n;
    // mean 0.4 (sd of mean ~6.3e-4), second moment 0.2 (sd ~8e-4)
    REQUIRE(std::abs(mean - d.mean()) < 4.0 * 6.3e-4);
    REQUIRE(std::abs(m2 - d.second_moment()) < 4.0 * 8.2e-4);
    const double pm = opensis::sample_theta(ThetaDistribution::point_mass(0.25), rng);
    REQUIRE(pm == 0.25);
}

TEST_CASE("open events at n=1 are always arrivals") {
    RandomStream rng(44);
    EventRates rates{7.0, 7.0, 7.0};
    const auto theta = ThetaDistribution::uniform01();
    for (int i = 0; i < 1000; ++i) {
        const auto e = opensis::next_open_event(3.0, 1, rates, theta, rng);
        REQUIRE(e.has_value());
        REQUIRE(e->kind == EventKind::arrival);
        REQUIRE(e->t > 3.0);
        REQUIRE(e->theta >= 0.0);
        REQUIRE(e->theta <= 1.0);
    }
}

TEST_CASE("open events split evenly when rates match, with the merged rate") {
    RandomStream rng(45);
    EventRates rates{7.0, 7.0, 0.0};
    const auto theta = ThetaDistribution::uniform01();
    const int n_events = 100000;
    int arrivals = 0;
    double wait_sum = 0.0;
    for (int i = 0; i < n_events; ++i) {
        const auto e = opensis::next_open_event(10.0, 5, rates, theta, rng);
        REQUIRE(e.has_value());
        if (e->kind == EventKind::arrival) {
            ++arrivals;
        } else {
            REQUIRE(e->target_index >= 0);
            REQUIRE(e->target_index < 5);
        }
        wait_sum += e->t - 10.0;
    }
    // arrival share: Binomial(1e5, 1/2), sd of share ~1.6e-3
    REQUIRE(std::abs(arrivals / static_cast<double>(n_events) - 0.5) < 3.0 * 1.6e-3);
    // waiting time: Exp(14), sd of mean ~(1/14)/sqrt(1e5)
    REQUIRE(std::abs(wait_sum / n_events - 1.0 / 14.0) < 3.0 * (1.0 / 14.0) / std::sqrt(1e5));
}

TEST_CASE("dead open process yields no event") {
    RandomStream rng(46);
    const auto theta = ThetaDistribution::uniform01();
    REQUIRE(!opensis::next_open_event(0.0, 1, EventRates{0.0, 5.0, 0.0}, theta, rng).has_value());
    REQUIRE(!opensis::next_open_event(0.0, 4, EventRates{0.0, 0.0, 0.0}, theta, rng).has_value());
    REQUIRE(!opensis::next_replacement_event(0.0, EventRates{0.0, 0.0, 0.0}, 10, theta, rng).has_value());
}

TEST_CASE("replacement event counts are Poisson-consistent on a window") {
    RandomStream rng(47);
    EventRates rates{0.0, 0.0, 7.0};
    const auto theta = ThetaDistribution::uniform01();
    const int runs = 1000;
    const double horizon = 100.0;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < runs; ++r) {
        double t = 0.0;
        int count = 0;
        for (;;) {
            const auto e = opensis::next_replacement_event(t, rates, 50, theta, rng);
            if (e->t > horizon) break;
            t = e->t;
            ++count;
        }
        sum += count;
        sum2 += static_cast<double>(count) * count;
    }
    const double mean = sum / runs;
    const double var = (sum2 - runs * mean * mean) / (runs - 1);
    // Poisson(700): sd of mean ~0.837; sd of the sample variance ~31.3
    REQUIRE(std::abs(mean - 700.0) < 3.0 * 0.84);
    REQUIRE(std::abs(var - 700.0) < 4.0 * 31.5);
}

TEST_CASE("open event counts are Poisson-consistent at fixed size") {
    RandomStream rng(48);
    EventRates rates{3.0, 4.0, 0.0};
    const auto theta = ThetaDistribution::uniform01();
    const int runs = 1000;
    const double horizon = 10.0; // merged rate 7 -> Poisson(70)
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < runs; ++r) {
        double t = 0.0;
        int count = 0;
        for (;;) {
            const auto e = opensis::next_open_event(t, 6, rates, theta, rng);
            if (e->t > horizon) break;
            t = e->t;
            ++count;
        }
        sum += count;
        sum2 += static_cast<double>(count) * count;
    }
    const double mean = sum / runs;
    const double var = (sum2 - runs * mean * mean) / (runs - 1);
    // Poisson(70): sd of mean ~0.265, sd of the sample variance ~3.15
    REQUIRE(std::abs(mean - 70.0) < 4.0 * 0.27);
    REQUIRE(std::abs(var - 70.0) < 4.0 * 3.2);
}

TEST_CASE("replacement targets are uniform over the slots") {
    RandomStream rng(49);
    EventRates rates{0.0, 0.0, 7.0};
    const auto theta = ThetaDistribution::uniform01();
    const int n0 = 50, n_events = 100000;
    std::vector<int> hits(n0, 0);
    for (int i = 0; i < n_events; ++i) {
        const auto e = opensis::next_replacement_event(0.0, rates, n0, theta, rng);
        REQUIRE(e->theta >= 0.0);
        REQUIRE(e->theta <= 1.0);
        ++hits[static_cast<std::size_t>(e->target_index)];
    }
    // per-slot count: Binomial(1e5, 1/50), sd ~44.3
    for (int j = 0; j < n0; ++j)
        REQUIRE(std::abs(hits[static_cast<std::size_t>(j)] - 2000.0) < 3.0 * 44.3);
}

TEST_CASE("arrival grows the state and obeys the aggregate algebra") {
    RandomStream rng(50);
    auto s = uniform_state(1, 0.6);
    Event e;
    e.t = 1.0;
    e.kind = EventKind::arrival;
    e.theta = 0.3;
    const auto out = opensis::apply_arrival(s, e, 1.0, rng);
    REQUIRE(out.n() == 2);
    REQUIRE(out.x[0] == 0.6);
    REQUIRE(out.x[1] == 0.3);
    REQUIRE(out.adjacency.weights(0, 1) == 1.0);
    REQUIRE(out.node_ids.size() == 2);
    REQUIRE(out.node_ids[1] == 1);
    REQUIRE(out.next_node_id == 2);

    // V+ == (n V- + theta^2) / (n+1)
    RandomStream rng2(51);
    auto big = uniform_state(7, 0.0);
    for (int i = 0; i < 7; ++i) big.x[i] = rng2.uniform01();
    const double v_before = opensis::aggregate_v(big);
    Event e2;
    e2.kind = EventKind::arrival;
    e2.t = 2.0;
    e2.theta = 0.77;
    const auto out2 = opensis::apply_arrival(big, e2, 0.5, rng2);
    REQUIRE(std::abs(opensis::aggregate_v(out2) - (7.0 * v_before + 0.77 * 0.77) / 8.0) < 1e-15);

    // theta = 0 into the all-zero state keeps V at 0
    auto zero = uniform_state(4, 0.0);
    Event e3;
    e3.kind = EventKind::arrival;
    e3.t = 0.5;
    e3.theta = 0.0;
    REQUIRE(opensis::aggregate_v(opensis::apply_arrival(zero, e3, 0.5, rng2)) == 0.0);
}

TEST_CASE("departure shrinks the state and obeys the aggregate algebra") {
    // x_j = 0 leaving an n=2 system: V+ equals the survivor's square
    EpidemicState s = uniform_state(2, 0.0);
    s.x[0] = 0.9;
    Event e;
    e.kind = EventKind::departure;
    e.t = 1.0;
    e.target_index = 1;
    const auto out = opensis::apply_departure(s, e);
    REQUIRE(out.n() == 1);
    REQUIRE(std::abs(opensis::aggregate_v(out) - 0.81) < 1e-15);
    REQUIRE(out.node_ids[0] == 0);

    // V+ == (n V- - x_j^2) / (n-1)
    RandomStream rng(52);
    auto big = uniform_state(9, 0.0);
    for (int i = 0; i < 9; ++i) big.x[i] = rng.uniform01();
    const double v_before = opensis::aggregate_v(big);
    Event e2;
    e2.kind = EventKind::departure;
    e2.t = 2.0;
    e2.target_index = 4;
    const double xj = big.x[4];
    const auto out2 = opensis::apply_departure(big, e2);
    REQUIRE(std::abs(opensis::aggregate_v(out2) - (9.0 * v_before - xj * xj) / 8.0) < 1e-15);

    // departures from a uniform state leave V unchanged
    auto uni = uniform_state(6, 0.4);
    Event e3;
    e3.kind = EventKind::departure;
    e3.t = 3.0;
    e3.target_index = 2;
    REQUIRE(std::abs(opensis::aggregate_v(opensis::apply_departure(uni, e3)) - 0.16) < 1e-15);

    // the last agent cannot leave
    auto last = uniform_state(1, 0.5);
    Event e4;
    e4.kind = EventKind::departure;
    e4.t = 4.0;
    e4.target_index = 0;
    REQUIRE_THROWS_AS(opensis::apply_departure(last, e4), opensis::cannot_empty_error);
}

TEST_CASE("replacement rewrites one slot and obeys the jump identity") {
    RandomStream rng(53);
    auto s = uniform_state(10, 0.0);
    for (int i = 0; i < 10; ++i) s.x[i] = rng.uniform01();
    const double v_before = opensis::aggregate_v(s);

    Event e;
    e.kind = EventKind::replacement;
    e.t = 1.0;
    e.target_index = 3;
    e.theta = 0.55;
    const double xj = s.x[3];
    const auto out = opensis::apply_replacement(s, e);
    REQUIRE(out.n() == 10);
    REQUIRE(out.x[3] == 0.55);
    for (int i = 0; i < 10; ++i)
        if (i != 3) REQUIRE(out.x[i] == s.x[i]);
    REQUIRE(std::abs((opensis::aggregate_v(out) - v_before) - (0.55 * 0.55 - xj * xj) / 10.0) < 1e-15);
    REQUIRE(out.node_ids[3] == 10); // fresh identity
    REQUIRE(out.next_node_id == 11);

    // numerically identical rewrite: state unchanged
    Event same;
    same.kind = EventKind::replacement;
    same.t = 2.0;
    same.target_index = 5;
    same.theta = s.x[5];
    const auto unchanged = opensis::apply_replacement(s, same);
    REQUIRE(unchanged.x[5] == s.x[5]);
    REQUIRE(opensis::aggregate_v(unchanged) == opensis::aggregate_v(s));

    // all-zero state, theta = 1: V jumps to 1/n0
    auto zero = uniform_state(50, 0.0);
    Event one;
    one.kind = EventKind::replacement;
    one.t = 3.0;
    one.target_index = 7;
    one.theta = 1.0;
    REQUIRE(std::abs(opensis::aggregate_v(opensis::apply_replacement(zero, one)) - 0.02) < 1e-15);

    Event bad;
    bad.kind = EventKind::replacement;
    bad.t = 4.0;
    bad.target_index = 99;
    bad.theta = 0.5;
    REQUIRE_THROWS_AS(opensis::apply_replacement(s, bad), std::out_of_range);
}

TEST_CASE("replacement jump expectation matches the closed form") {
    RandomStream rng(54);
    const int n0 = 50;
    auto s = uniform_state(n0, 0.0);
    for (int i = 0; i < n0; ++i) s.x[i] = rng.uniform01();
    const double v_before = opensis::aggregate_v(s);
    const auto theta = ThetaDistribution::uniform01();
    EventRates rates{0.0, 0.0, 7.0};

    const int trials = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < trials; ++i) {
        const auto e = opensis::next_replacement_event(0.0, rates, n0, theta, rng);
        const double dv = opensis::aggregate_v(opensis::apply_replacement(s, *e)) - v_before;
        sum += dv;
        sum2 += dv * dv;
    }
    const double mean = sum / trials;
    const double sd = std::sqrt((sum2 - trials * mean * mean) / (trials - 1));
    const double expected = (theta.second_moment() - v_before) / n0;
    REQUIRE(std::abs(mean - expected) < 4.0 * sd / std::sqrt(trials));
}

TEST_CASE("squared-aggregate jumps respect the drift inequality") {
    RandomStream rng(55);
    const int n0 = 50;
    const auto theta = ThetaDistribution::uniform01();
    EventRates rates{0.0, 0.0, 7.0};
    const double m2 = theta.second_moment();
    const double m4 = theta.fourth_moment();

    std::vector<EpidemicState> pre_states;
    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) pre_states.push_back(uniform_state(n0, c));
    auto mixed = uniform_state(n0, 0.0);
    for (int i = 0; i < n0; ++i) mixed.x[i] = rng.uniform01();
    pre_states.push_back(mixed);

    for (const auto& s : pre_states) {
        const double v = opensis::aggregate_v(s);
        const double v2 = v * v;
        const int trials = 100000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < trials; ++i) {
            const auto e = opensis::next_replacement_event(0.0, rates, n0, theta, rng);
            const double v_post = opensis::aggregate_v(opensis::apply_replacement(s, *e));
            const double d = v_post * v_post - v2;
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / trials;
        const double se = std::sqrt(std::max(0.0, (sum2 - trials * mean * mean) / (trials - 1)) /
                                    trials);
        const double rhs = -(2.0 / n0) * v2 + m4 / (n0 * n0) +
                           (2.0 * m2 * (n0 - 1.0) + 1.0) / (n0 * n0) * v;
        REQUIRE(mean <= rhs + 4.0 * se);
    }
}
