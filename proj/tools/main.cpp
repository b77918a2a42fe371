// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "grbf/experiments.hpp"
#include "grbf/linksim.hpp"
#include "grbf/pipeline.hpp"
#include "grbf/scenario.hpp"

namespace {

bool parse_range(const std::string& text, double& lo, double& hi, double& step) {
    return std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) == 3;
}

int cmd_solve(const std::string& scenario_path, const std::string& out_path,
              int n_rand, std::uint64_t seed, int simulate_blocks) {
    const grbf::Scenario sc = grbf::load_scenario(scenario_path);
    grbf::PipelineOptions opts;
    opts.n_rand = n_rand;
    opts.seed = seed;
    const grbf::PipelineOutcome res = grbf::solve_downlink(sc, opts);
    if (res.status == grbf::PipelineStatus::Infeasible) {
        std::cerr << "infeasible: the SDR problem has no solution\n";
        return 3;
    }
    if (res.status == grbf::PipelineStatus::RandomizationFailed) {
        std::cerr << "infeasible: every randomization candidate failed power control\n";
        return 3;
    }
    grbf::save_solution(res.solution, out_path);
    std::cout << "status: ok (" << (res.solution.exact ? "exact" : "randomized")
              << ")\ncode dimension K: " << res.solution.code_dim
              << "\ntotal power per slot: " << res.solution.total_power
              << "\nsdr objective: " << res.solution.sdr_objective << "\nranks:";
    for (int r : res.solution.reduced_ranks) std::cout << " " << r;
    std::cout << "\nsolution written to " << out_path << "\n";

    if (simulate_blocks > 0) {
        grbf::LinkRunConfig cfg;
        cfg.blocks = simulate_blocks;
        cfg.seed = seed;
        const auto stats = grbf::run_link(cfg, res.solution.W, sc);
        const std::string link_path =
            (std::filesystem::path(out_path).parent_path() / "link.csv").string();
        grbf::write_link_csv(stats, link_path.empty() ? "link.csv" : link_path);
        std::cout << "link-level results written to "
                  << (link_path.empty() ? "link.csv" : link_path) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"general-rank downlink beamforming with real-valued OSTBC"};
    app.require_subcommand(1);

    // solve
    std::string scenario_path, solution_out = "solution.json";
    int n_rand = 300, simulate_blocks = 0;
    std::uint64_t seed = 1;
    CLI::App* solve = app.add_subcommand("solve", "solve one scenario file");
    solve->add_option("scenario", scenario_path, "scenario JSON file")->required();
    solve->add_option("--out", solution_out, "solution output path");
    solve->add_option("--rand", n_rand, "randomization instances");
    solve->add_option("--seed", seed, "random seed");
    solve->add_option("--simulate", simulate_blocks,
                      "also run a link simulation with this many blocks");

    // experiment
    grbf::ExperimentConfig cfg;
    std::string sweep_text;
    CLI::App* exp = app.add_subcommand("experiment", "run a canned experiment");
    exp->add_option("id", cfg.id, "example1|example2|example3|example4|custom")
        ->required();
    exp->add_option("--runs", cfg.runs, "Monte-Carlo runs per sweep point");
    exp->add_option("--rand", cfg.n_rand, "randomization instances");
    exp->add_option("--sinr-db", sweep_text, "sweep lo:hi:step in dB");
    exp->add_option("--seed", cfg.seed, "master seed");
    exp->add_option("--out", cfg.out_dir, "output directory");
    exp->add_option("--scenario", cfg.scenario_path, "scenario file (custom)");
    exp->add_option("--workers", cfg.workers, "worker threads (or GRBF_WORKERS)");

    // beampattern
    std::string bp_solution, bp_grid_text = "-90:90:0.25", bp_out = "beampattern.csv";
    CLI::App* bp = app.add_subcommand("beampattern", "sample beam patterns of a solution");
    bp->add_option("solution", bp_solution, "solution JSON file")->required();
    bp->add_option("--grid", bp_grid_text, "angle grid lo:hi:step in degrees");
    bp->add_option("--out", bp_out, "output CSV path");

    // plotscript
    std::string plot_dir = ".";
    CLI::App* plot = app.add_subcommand("plotscript", "emit a gnuplot script for a report directory");
    plot->add_option("dir", plot_dir, "directory holding the CSV reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve) return cmd_solve(scenario_path, solution_out, n_rand, seed,
                                     simulate_blocks);
        if (*exp) {
            if (!sweep_text.empty()) {
                if (!parse_range(sweep_text, cfg.sinr_lo_db, cfg.sinr_hi_db,
                                 cfg.sinr_step_db)) {
                    std::cerr << "bad --sinr-db range: " << sweep_text << "\n";
                    return 2;
                }
                cfg.sweep_given = true;
            }
            const auto files = grbf::run_experiment(cfg);
            for (const std::string& f : files) std::cout << "wrote " << f << "\n";
            return 0;
        }
        if (*bp) {
            double lo, hi, step;
            if (!parse_range(bp_grid_text, lo, hi, step) || step <= 0.0) {
                std::cerr << "bad --grid range: " << bp_grid_text << "\n";
                return 2;
            }
            const grbf::BeamformingSolution sol = grbf::load_solution(bp_solution);
            std::vector<double> grid;
            for (double t = lo; t <= hi + 1e-9; t += step) grid.push_back(t);
            const grbf::BeampatternTable table = grbf::beampattern(sol.W, grid);
            std::ofstream out(bp_out);
            if (!out) throw std::runtime_error("cannot write " + bp_out);
            out << std::setprecision(10) << "theta_deg";
            for (int m = 0; m < table.per_user.cols(); ++m) out << ",user_" << (m + 1);
            out << ",sum\n";
            for (size_t g = 0; g < grid.size(); ++g) {
                out << table.theta_deg[g];
                for (int m = 0; m < table.per_user.cols(); ++m)
                    out << "," << table.per_user(g, m);
                out << "," << table.sum[g] << "\n";
            }
            std::cout << "wrote " << bp_out << "\n";
            return 0;
        }
        if (*plot) {
            std::cout << "wrote " << grbf::write_plot_script(plot_dir) << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
