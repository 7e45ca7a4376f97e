#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "opensis/errors.hpp"
#include "opensis/events.hpp"

namespace opensis {

enum class ProcessKind {
    open,            // arrivals and departures, beta scaled by live n
    replacement,     // fixed n0, replacement events, flow on a fixed graph
    pure_replacement // replacement events only, flow switched off
};

enum class TopologyMode {
    expected_abar,   // fixed expected contact matrix p*(J - I)
    sampled_er_fixed // one ER sample drawn at t = 0 and kept
};

enum class InitKind {
    iid_theta, // x_i(0) drawn iid from the theta distribution
    constant   // x_i(0) = init_value for all i
};

inline const char* to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::open: return "open";
        case ProcessKind::replacement: return "replacement";
        case ProcessKind::pure_replacement: return "pure";
    }
    return "?";
}

struct SimulationConfig {
    int n0 = 50;
    double p = 0.5;
    double beta_bar = 0.1;
    double delta_bar = 0.075;
    double mu_a = 7.0;
    double mu_d = 7.0;
    double mu = 7.0;
    ThetaDistribution theta;
    InitKind init = InitKind::iid_theta;
    double init_value = 0.0;
    double horizon = 100.0;
    double step = 0.01;
    double grid_spacing = 0.1;
    int realizations = 1000;
    std::uint64_t base_seed = 12345;
    std::vector<ProcessKind> kinds = {ProcessKind::open, ProcessKind::replacement};
    TopologyMode topology_mode = TopologyMode::expected_abar;
    double tail_fraction = 0.25;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        throw config_error(key, "key '" + key + "': cannot parse '" + value + "' as a number");
    }
    if (used != value.size())
        throw config_error(key, "key '" + key + "': trailing junk in '" + value + "'");
    return out;
}

inline long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw config_error(key, "key '" + key + "': cannot parse '" + value + "' as an integer");
    }
    if (used != value.size())
        throw config_error(key, "key '" + key + "': trailing junk in '" + value + "'");
    return out;
}

// accepts "name" or "name(a,b,...)", returns name and raw args
inline std::string split_call(const std::string& key, const std::string& value,
                              std::vector<double>& args) {
    args.clear();
    const auto open = value.find('(');
    if (open == std::string::npos) return trim(value);
    if (value.back() != ')')
        throw config_error(key, "key '" + key + "': missing ')' in '" + value + "'");
    const std::string name = trim(value.substr(0, open));
    std::string inner = value.substr(open + 1, value.size() - open - 2);
    std::stringstream ss(inner);
    std::string piece;
    while (std::getline(ss, piece, ','))
        args.push_back(parse_double(key, trim(piece)));
    return name;
}

} // namespace detail

inline ThetaDistribution parse_theta(const std::string& key, const std::string& value) {
    std::vector<double> args;
    const std::string name = detail::split_call(key, value, args);
    try {
        if (name == "uniform01" && args.empty()) return ThetaDistribution::uniform01();
        if (name == "beta" && args.size() == 2) return ThetaDistribution::make_beta(args[0], args[1]);
        if (name == "point_mass" && args.size() == 1) return ThetaDistribution::point_mass(args[0]);
    } catch (const std::invalid_argument& ex) {
        throw config_error(key, "key '" + key + "': " + ex.what());
    }
    throw config_error(key, "key '" + key + "': expected uniform01, beta(a,b) or point_mass(c), got '" +
                                value + "'");
}

inline ProcessKind parse_kind(const std::string& key, const std::string& value) {
    if (value == "open") return ProcessKind::open;
    if (value == "replacement") return ProcessKind::replacement;
    if (value == "pure") return ProcessKind::pure_replacement;
    throw config_error(key, "key '" + key + "': unknown process kind '" + value + "'");
}

// key = value per line, '#' starts a comment, blank lines ignored,
// unknown keys are errors. Later assignments win.
inline SimulationConfig parse_config(std::istream& in) {
    SimulationConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(line, "expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw config_error(key, "empty key in '" + line + "'");

        if (key == "n0") cfg.n0 = static_cast<int>(detail::parse_int(key, value));
        else if (key == "p") cfg.p = detail::parse_double(key, value);
        else if (key == "beta_bar") cfg.beta_bar = detail::parse_double(key, value);
        else if (key == "delta_bar") cfg.delta_bar = detail::parse_double(key, value);
        else if (key == "mu_a") cfg.mu_a = detail::parse_double(key, value);
        else if (key == "mu_d") cfg.mu_d = detail::parse_double(key, value);
        else if (key == "mu") cfg.mu = detail::parse_double(key, value);
        else if (key == "theta") cfg.theta = parse_theta(key, value);
        else if (key == "init") {
            std::vector<double> args;
            const std::string name = detail::split_call(key, value, args);
            if (name == "iid_theta" && args.empty()) cfg.init = InitKind::iid_theta;
            else if (name == "constant" && args.size() == 1) {
                cfg.init = InitKind::constant;
                cfg.init_value = args[0];
            } else
                throw config_error(key, "key 'init': expected iid_theta or constant(c), got '" + value + "'");
        }
        else if (key == "horizon") cfg.horizon = detail::parse_double(key, value);
        else if (key == "step") cfg.step = detail::parse_double(key, value);
        else if (key == "grid" || key == "grid_spacing") cfg.grid_spacing = detail::parse_double(key, value);
        else if (key == "realizations") cfg.realizations = static_cast<int>(detail::parse_int(key, value));
        else if (key == "base_seed" || key == "seed")
            cfg.base_seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
        else if (key == "kinds") {
            cfg.kinds.clear();
            std::stringstream ss(value);
            std::string piece;
            while (std::getline(ss, piece, ','))
                cfg.kinds.push_back(parse_kind(key, detail::trim(piece)));
            if (cfg.kinds.empty()) throw config_error(key, "key 'kinds': empty list");
        }
        else if (key == "topology_mode" || key == "topology") {
            if (value == "expected") cfg.topology_mode = TopologyMode::expected_abar;
            else if (value == "sampled") cfg.topology_mode = TopologyMode::sampled_er_fixed;
            else throw config_error(key, "key '" + key + "': expected 'expected' or 'sampled', got '" +
                                             value + "'");
        }
        else if (key == "tail_fraction") cfg.tail_fraction = detail::parse_double(key, value);
        else throw config_error(key, "unknown key '" + key + "'");
    }
    return cfg;
}

// Throws config_error on hard mistakes; returns human-readable warnings for
// legal-but-suspicious settings.
inline std::vector<std::string> validate_config(const SimulationConfig& cfg) {
    if (cfg.n0 < 1) throw config_error("n0", "n0 must be >= 1");
    if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw config_error("p", "p must lie in [0,1]");
    if (!(cfg.beta_bar >= 0.0)) throw config_error("beta_bar", "beta_bar must be >= 0");
    if (!(cfg.delta_bar >= 0.0)) throw config_error("delta_bar", "delta_bar must be >= 0");
    if (!(cfg.mu_a >= 0.0)) throw config_error("mu_a", "mu_a must be >= 0");
    if (!(cfg.mu_d >= 0.0)) throw config_error("mu_d", "mu_d must be >= 0");
    if (!(cfg.mu >= 0.0)) throw config_error("mu", "mu must be >= 0");
    if (cfg.init == InitKind::constant && !(cfg.init_value >= 0.0 && cfg.init_value <= 1.0))
        throw config_error("init", "constant initial level must lie in [0,1]");
    if (!(cfg.horizon > 0.0)) throw config_error("horizon", "horizon must be positive");
    if (!(cfg.step > 0.0)) throw config_error("step", "step must be positive");
    if (!(cfg.grid_spacing > 0.0)) throw config_error("grid", "grid spacing must be positive");
    if (!(cfg.step < cfg.grid_spacing))
        throw config_error("step", "step must be smaller than the recording grid spacing");
    if (cfg.realizations < 1) throw config_error("realizations", "realizations must be >= 1");
    if (cfg.kinds.empty()) throw config_error("kinds", "at least one process kind is required");
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction < 1.0))
        throw config_error("tail_fraction", "tail_fraction must lie in (0,1)");

    std::vector<std::string> warnings;
    if (cfg.mu_a != cfg.mu_d)
        warnings.push_back("mu_a != mu_d: open population size will drift from n0");
    if (cfg.mu != cfg.mu_a)
        warnings.push_back("mu != mu_a: replacement surrogate turns over at a different rate "
                           "than the open process it stands in for");
    return warnings;
}

inline SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open config file '" + path + "'");
    SimulationConfig cfg = parse_config(in);
    validate_config(cfg);
    return cfg;
}

} // namespace opensis
