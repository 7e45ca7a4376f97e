#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "opensis/analysis.hpp"
#include "opensis/config.hpp"
#include "opensis/csv.hpp"
#include "opensis/sim.hpp"
#include "opensis/svg.hpp"

namespace opensis {

struct ExperimentOptions {
    bool plots = false;             // also emit SVG charts
    bool dump_trajectories = false; // write every realization, not just the exemplar
    int threads = 0;                // 0: hardware concurrency
};

namespace detail {

inline std::string bound_field(const std::optional<double>& v) {
    return v ? csv::num(*v) : std::string{};
}

} // namespace detail

// key = value rendering of a bound report, shared by bounds.txt and the
// bounds subcommand.
inline std::string format_bound_report(const SimulationConfig& cfg, const BoundReport& rep) {
    std::string out;
    out += "reproduction_ratio = " + csv::num(rep.reproduction_ratio) + '\n';
    out += std::string("stable = ") + (rep.stable ? "true" : "false") + '\n';
    out += "pure_replacement_asymptote = " + csv::num(rep.pure_replacement_asymptote) + '\n';
    out += "ev_limsup_bound = " + detail::bound_field(rep.ev_limsup) + '\n';
    out += "ev_transient_offset = " +
           (rep.ev_transient ? csv::num(rep.ev_transient->offset) : std::string{}) + '\n';
    out += "ev_transient_level = " +
           (rep.ev_transient ? csv::num(rep.ev_transient->level) : std::string{}) + '\n';
    out += "ev_transient_exponent = " +
           (rep.ev_transient ? csv::num(rep.ev_transient->exponent) : std::string{}) + '\n';
    out += "ev2_limsup_bound = " + detail::bound_field(rep.ev2_limsup) + '\n';
    out += "var_limsup_bound = " + detail::bound_field(rep.var_limsup) + '\n';
    out += "tail_window_start = " + csv::num(cfg.horizon * (1.0 - cfg.tail_fraction)) + '\n';
    return out;
}

namespace detail {

inline void write_bounds_txt(const std::string& path, const SimulationConfig& cfg,
                             const BoundReport& rep) {
    auto out = csv::open_out(path);
    out << format_bound_report(cfg, rep);
}

inline svg::Series grid_series(std::string label, std::string color, std::string dash,
                               const std::vector<double>& x, const std::vector<double>& y) {
    return {std::move(label), std::move(color), std::move(dash), x, y};
}

inline std::string kind_color(ProcessKind k) {
    switch (k) {
        case ProcessKind::open: return "#1f77b4";
        case ProcessKind::replacement: return "#d62728";
        case ProcessKind::pure_replacement: return "#2ca02c";
    }
    return "#000000";
}

inline std::string kind_dash(ProcessKind k) {
    return k == ProcessKind::replacement ? "6 4" : "";
}

inline void write_trajectory_plot(const std::string& path, ProcessKind kind,
                                  const Trajectory& traj) {
    std::vector<double> t, v, tn, nn;
    for (const auto& s : traj.samples) {
        t.push_back(s.t);
        v.push_back(s.v);
        tn.push_back(s.t);
        nn.push_back(static_cast<double>(s.n));
    }
    svg::Chart top{std::string("aggregate infection level, ") + to_string(kind),
                   "t", "V(t)",
                   {grid_series("V", kind_color(kind), kind_dash(kind), t, v)}};
    svg::Chart bottom{"population size", "t", "n(t)",
                      {grid_series("n", "#555555", "", tn, nn)}};
    svg::write(path, {top, bottom});
}

} // namespace detail

// Per-kind results kept for plotting and the aggregate exit status.
struct KindResult {
    ProcessKind kind;
    std::optional<MomentEstimates> estimates;
    std::optional<BoundComparison> comparison;
};

// Run every configured process kind, write trajectory/moment/bound files
// into out_dir, return 0 if no bound was violated and 2 otherwise.
inline int run_experiment(const SimulationConfig& cfg, const std::string& out_dir,
                          const ExperimentOptions& opt = {}) {
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    const BoundReport rep = make_bound_report(cfg);
    detail::write_bounds_txt(path("bounds.txt"), cfg, rep);

    const std::vector<double> grid = uniform_grid(cfg.horizon, cfg.grid_spacing);
    std::vector<KindResult> results;

    for (ProcessKind kind : cfg.kinds) {
        KindResult res{kind, std::nullopt, std::nullopt};
        const std::string kind_name = to_string(kind);
        {
            std::vector<Trajectory> ensemble =
                run_ensemble(kind, cfg, cfg.realizations, cfg.base_seed, opt.threads);

            if (opt.dump_trajectories)
                csv::write_trajectories(path("trajectory_" + kind_name + ".csv"), ensemble);
            else
                csv::write_trajectory(path("trajectory_" + kind_name + ".csv"), ensemble.front());

            if (opt.plots)
                detail::write_trajectory_plot(path("trajectory_" + kind_name + ".svg"), kind,
                                              ensemble.front());

            if (cfg.realizations >= 2) {
                res.estimates = estimate_moments(ensemble, grid);
                // ensemble freed here; only the grid moments are kept
            }
        }
        if (res.estimates) {
            if (kind == ProcessKind::pure_replacement)
                res.comparison = compare_pure(*res.estimates, initial_v_mean(cfg), cfg.mu,
                                              cfg.n0, cfg.theta, cfg.tail_fraction);
            else
                res.comparison = compare_bounds(*res.estimates, rep, cfg.tail_fraction);
            csv::write_moments(path("moments_" + kind_name + ".csv"), *res.estimates,
                               *res.comparison);
        }
        results.push_back(std::move(res));
    }

    {
        auto out = csv::open_out(path("comparison.csv"));
        out << csv::comparison_header();
        for (const auto& res : results)
            if (res.comparison) csv::write_comparison(out, to_string(res.kind), *res.comparison);
    }

    if (opt.plots) {
        const struct {
            const char* file;
            const char* title;
            const char* ylabel;
            std::vector<ComparisonRow> BoundComparison::*rows;
            const std::vector<double>& (*estimate)(const MomentEstimates&);
        } panels[] = {
            {"moments_ev.svg", "ensemble mean of V", "E[V(t)]", &BoundComparison::ev,
             [](const MomentEstimates& e) -> const std::vector<double>& { return e.ev; }},
            {"moments_ev2.svg", "ensemble second moment of V", "E[V^2(t)]", &BoundComparison::ev2,
             [](const MomentEstimates& e) -> const std::vector<double>& { return e.ev2; }},
            {"moments_var.svg", "ensemble variance of V", "Var(V(t))", &BoundComparison::var,
             [](const MomentEstimates& e) -> const std::vector<double>& { return e.var; }},
        };
        for (const auto& panel : panels) {
            svg::Chart chart{panel.title, "t", panel.ylabel, {}};
            bool bound_added = false;
            for (const auto& res : results) {
                if (!res.estimates) continue;
                chart.series.push_back(detail::grid_series(to_string(res.kind),
                                                           detail::kind_color(res.kind),
                                                           detail::kind_dash(res.kind),
                                                           res.estimates->grid,
                                                           panel.estimate(*res.estimates)));
                if (!bound_added && res.comparison) {
                    const auto& rows = (*res.comparison).*(panel.rows);
                    std::vector<double> bx, by;
                    for (const auto& row : rows) {
                        if (!row.bound_available) continue;
                        bx.push_back(row.t);
                        by.push_back(row.bound);
                    }
                    if (!bx.empty()) {
                        chart.series.push_back(
                            detail::grid_series("bound", "#e6b800", "8 4 2 4", bx, by));
                        bound_added = true;
                    }
                }
            }
            if (!chart.series.empty()) svg::write(path(panel.file), {chart});
        }
    }

    for (const auto& res : results)
        if (res.comparison && res.comparison->any_violation()) return 2;
    return 0;
}

} // namespace opensis
