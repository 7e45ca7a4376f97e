#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "opensis/analysis.hpp"
#include "opensis/config.hpp"
#include "opensis/experiment.hpp"

namespace {

constexpr const char* version_string = "opensis 0.1.0";

std::vector<opensis::ProcessKind> parse_kinds_csv(const std::string& csv) {
    std::vector<opensis::ProcessKind> kinds;
    std::stringstream ss(csv);
    std::string piece;
    while (std::getline(ss, piece, ','))
        kinds.push_back(opensis::parse_kind("kinds", piece));
    if (kinds.empty()) throw opensis::config_error("kinds", "--kinds: empty list");
    return kinds;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-driven simulator and bound checker for epidemics on open networks"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(0, 1);

    std::string run_config, out_dir, kinds_csv;
    std::uint64_t seed = 0;
    int realizations = 0;
    int threads = 0;
    bool plots = false, dump = false;

    auto* run = app.add_subcommand("run", "simulate the configured process kinds and write CSVs");
    run->add_option("config", run_config, "config file, 'key = value' lines")->required();
    run->add_option("--out", out_dir, "output directory (created if missing)")->required();
    run->add_option("--kinds", kinds_csv, "comma-separated subset of open,replacement,pure");
    auto* seed_opt = run->add_option("--seed", seed, "override the base seed");
    auto* real_opt = run->add_option("--realizations", realizations, "override the realization count");
    run->add_flag("--plots", plots, "also write SVG charts");
    run->add_flag("--dump-trajectories", dump, "write every realization in long format");
    run->add_option("--threads", threads, "worker threads, 0 = hardware concurrency");

    std::string bounds_config;
    auto* bounds = app.add_subcommand("bounds", "print the closed-form bound report for a config");
    bounds->add_option("config", bounds_config, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) {
            opensis::SimulationConfig cfg = opensis::load_config(run_config);
            if (*seed_opt) cfg.base_seed = seed;
            if (*real_opt) cfg.realizations = realizations;
            if (!kinds_csv.empty()) cfg.kinds = parse_kinds_csv(kinds_csv);
            for (const auto& warning : opensis::validate_config(cfg))
                std::cerr << "warning: " << warning << '\n';

            opensis::ExperimentOptions opt;
            opt.plots = plots;
            opt.dump_trajectories = dump;
            opt.threads = threads;
            return opensis::run_experiment(cfg, out_dir, opt);
        }
        if (bounds->parsed()) {
            const opensis::SimulationConfig cfg = opensis::load_config(bounds_config);
            const opensis::BoundReport rep = opensis::make_bound_report(cfg);
            std::cout << opensis::format_bound_report(cfg, rep);
            return 0;
        }
        std::cout << app.help();
        return 0;
    } catch (const opensis::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
