#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "opensis/analysis.hpp"
#include "opensis/sim.hpp"

namespace opensis {
namespace csv {

// %.12g: deterministic, locale-free, round-trips everything we emit
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// NaN fields are emitted empty
inline std::string opt_num(double x) {
    return std::isnan(x) ? std::string{} : num(x);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // \n line endings everywhere
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::arrival: return "arrival";
        case EventKind::departure: return "departure";
        case EventKind::replacement: return "replacement";
    }
    return "?";
}

inline void write_trajectory_rows(std::ofstream& out, const Trajectory& traj,
                                  const std::string& prefix) {
    for (const auto& s : traj.samples) {
        out << prefix << num(s.t) << ',' << num(s.v) << ',' << s.n << ',' << s.event_flag;
        if (s.event_index >= 0) {
            const auto& e = traj.events[static_cast<std::size_t>(s.event_index)];
            out << ',' << event_kind_name(e.kind) << ',' << e.agent_id << ','
                << opt_num(e.theta);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

// Single-realization trajectory: t,V,n,event_flag,event_kind,agent_id,theta.
// Grid samples leave the event columns empty; the pre/post rows around an
// event both carry the event's attributes.
inline void write_trajectory(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t,V,n,event_flag,event_kind,agent_id,theta\n";
    write_trajectory_rows(out, traj, "");
}

// Long format with a leading realization column.
inline void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
    auto out = open_out(path);
    out << "realization,t,V,n,event_flag,event_kind,agent_id,theta\n";
    for (std::size_t r = 0; r < trajs.size(); ++r)
        write_trajectory_rows(out, trajs[r], std::to_string(r) + ",");
}

// Ensemble moments against their bounds:
// t,ev,ev_se,ev2,ev2_se,var,var_se,bound_ev,bound_ev2,violation_ev,violation_ev2.
// Bound columns are empty where no bound exists.
inline void write_moments(const std::string& path, const MomentEstimates& est,
                          const BoundComparison& cmp) {
    auto out = open_out(path);
    out << "t,ev,ev_se,ev2,ev2_se,var,var_se,bound_ev,bound_ev2,violation_ev,violation_ev2\n";
    for (std::size_t k = 0; k < est.grid.size(); ++k) {
        out << num(est.grid[k]) << ',' << num(est.ev[k]) << ',' << num(est.ev_se[k]) << ','
            << num(est.ev2[k]) << ',' << num(est.ev2_se[k]) << ',' << num(est.var[k]) << ','
            << num(est.var_se[k]) << ',';
        out << (cmp.ev[k].bound_available ? num(cmp.ev[k].bound) : std::string{}) << ',';
        out << (cmp.ev2[k].bound_available ? num(cmp.ev2[k].bound) : std::string{}) << ',';
        out << (cmp.ev[k].violation ? 1 : 0) << ',' << (cmp.ev2[k].violation ? 1 : 0) << '\n';
    }
}

// Cross-kind concatenation of the comparison rows, one row per (kind,
// quantity, grid point).
inline void write_comparison(std::ofstream& out, const std::string& kind,
                             const BoundComparison& cmp) {
    const struct {
        const char* name;
        const std::vector<ComparisonRow>* rows;
    } blocks[] = {{"ev", &cmp.ev}, {"ev2", &cmp.ev2}, {"var", &cmp.var}};
    for (const auto& block : blocks) {
        for (const auto& row : *block.rows) {
            out << kind << ',' << block.name << ',' << num(row.t) << ',' << num(row.estimate)
                << ',' << num(row.se) << ',';
            if (row.bound_available)
                out << num(row.bound) << ',' << num(row.margin);
            else
                out << ',';
            out << ',' << (row.violation ? 1 : 0) << '\n';
        }
    }
}

inline const char* comparison_header() {
    return "kind,quantity,t,estimate,se,bound,margin,violation\n";
}

} // namespace csv
} // namespace opensis
