// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_EXPERIMENTS_HPP
#define GRBF_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grbf/pipeline.hpp"
#include "grbf/scenario.hpp"
#include "grbf/types.hpp"

namespace grbf {

struct ExperimentConfig {
    std::string id = "example1";  // example1..example4 | custom
    int runs = 300;
    int n_rand = 300;
    double sinr_lo_db = 0.0;
    double sinr_hi_db = 10.0;
    double sinr_step_db = 1.0;
    bool sweep_given = false;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string scenario_path;  // custom only
    int workers = 0;            // 0: take GRBF_WORKERS or 1
};

/// Nominal (unperturbed) scenario builders for the four applications.
Scenario example1_scenario(double sinr_db);
Scenario example2_scenario(double sinr_db = 10.0);
Scenario example4_scenario(double sinr_db = 10.0);
const std::vector<double>& example1_user_angles();
const std::vector<double>& example1_terminal_angles();
const std::vector<double>& example2_cochannel_angles();
const std::vector<double>& example4_user_angles();

/// Per-direction received power ||W_m^H h(theta)||^2 and the sum over
/// users, sampled on a grid of angles in degrees.
struct BeampatternTable {
    std::vector<double> theta_deg;
    Mat per_user;  // grid x M
    Vec sum;
};
BeampatternTable beampattern(const std::vector<CMat>& W,
                             const std::vector<double>& grid_deg);

/// One Monte-Carlo run evaluated under the general-rank approach and the
/// rank-one / rank-two baselines (shared SDR solve and rank reduction).
struct ApproachResult {
    bool feasible = false;
    bool exact = false;
    double power = 0.0;
};
struct RunOutcome {
    bool sdr_feasible = false;
    bool solver_trouble = false;
    std::vector<int> initial_ranks;
    std::vector<int> reduced_ranks;
    ApproachResult general, rank2, rank1;
};
RunOutcome evaluate_run(const Scenario& scenario, int n_rand,
                        std::uint64_t rand_seed);

/// Runs the configured experiment and writes its CSV report files (and
/// solution files where applicable) into config.out_dir. Returns the list
/// of files written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

/// Writes a gnuplot script that renders the CSV files present in dir.
std::string write_plot_script(const std::string& dir);

}  // namespace grbf

#endif
