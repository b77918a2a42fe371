// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_PIPELINE_HPP
#define GRBF_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "grbf/rankred.hpp"
#include "grbf/scenario.hpp"
#include "grbf/sdr.hpp"
#include "grbf/types.hpp"

namespace grbf {

struct PipelineOptions {
    SolveTolerances sdr_tol;
    RankReductionOptions rank_reduction;
    int max_code_dim = 8;   // cap for baseline emulation: 1, 2, 4 or 8
    int n_rand = 300;       // randomization instances
    std::uint64_t seed = 1; // randomization stream
};

struct BeamformingSolution {
    std::vector<CMat> W;
    int code_dim = 0;
    double total_power = 0.0;
    bool exact = false;  // rank path (true) vs randomization path

    // diagnostics
    std::vector<int> initial_ranks;
    std::vector<int> reduced_ranks;
    int sdr_iterations = 0;
    int reduction_iterations = 0;
    double sdr_objective = 0.0;
    KktReport kkt;
    std::vector<double> sinr;  // achieved post-detection SINR per user
};

enum class PipelineStatus { Ok, Infeasible, RandomizationFailed };

struct PipelineOutcome {
    PipelineStatus status = PipelineStatus::Infeasible;
    BeamformingSolution solution;
};

/// Smallest K in {1,2,4,8} with K >= max(ranks); throws when the largest
/// rank exceeds 8 ("randomization required").
int select_code_dimension(const std::vector<int>& ranks);

/// Largest number of shaping constraints with a guaranteed exact design
/// at code dimension K: (K+1)^2 - 2.
int max_constraints_for(int K);

/// W_i = [Q_i, 0] zero-padded to K columns, with X_i = Q_i Q_i^H.
std::vector<CMat> extract_beamformers(const std::vector<CMat>& X, int K,
                                      double rank_threshold = 1e-4);

/// Per-column unit-modulus rotation making each W_i^H h_i real and
/// entrywise nonnegative; leaves W_i W_i^H unchanged.
std::vector<CMat> phase_rotate(std::vector<CMat> W,
                               const std::vector<CVec>& channels);

/// End-to-end design: SDR solve, rank reduction, code selection and
/// extraction (or randomization fallback), phase rotation.
PipelineOutcome solve_downlink(const Scenario& scenario,
                               const PipelineOptions& options = {});

// Solution file round trip (matrices as row-major re/im pairs plus
// key-value diagnostics).
void save_solution(const BeamformingSolution& solution, const std::string& path);
BeamformingSolution load_solution(const std::string& path);

}  // namespace grbf

#endif
