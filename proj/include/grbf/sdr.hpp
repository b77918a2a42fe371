// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_SDR_HPP
#define GRBF_SDR_HPP

#include <vector>

#include "grbf/conic.hpp"
#include "grbf/scenario.hpp"
#include "grbf/types.hpp"

namespace grbf {

/// Relaxed separable SDP: minimize sum_i Tr(X_i) over Hermitian PSD
/// N x N blocks X_1..X_M subject to M + L linear trace rows. The first
/// M rows are the QoS rows, the remaining L the shaping rows, in input
/// order.
struct SdpProblem {
    int antennas = 0;
    int num_blocks = 0;
    std::vector<ShapingConstraint> rows;

    int num_rows() const { return static_cast<int>(rows.size()); }
};

struct SolveTolerances {
    double feasibility = 1e-8;  // scaled by max(1,|b_l|) per row
    double gap = 1e-7;          // relative duality gap
    double psd = 1e-9;          // tolerated PSD violation
    int max_iterations = 200;
};

struct SdrSolution {
    std::vector<CMat> X;
    double objective = 0.0;
};

struct DualSolution {
    Vec eta;              // one multiplier per row, paper sign convention
    std::vector<CMat> Z;  // dual slack I - sum_l eta_l A_li per block
};

struct KktReport {
    double max_primal_residual = 0.0;    // per-row violation / max(1,|b_l|)
    double max_dual_psd_violation = 0.0; // most negative Z eigenvalue, as >= 0
    double min_primal_eigenvalue = 0.0;  // most negative X eigenvalue
    double duality_gap = 0.0;            // |p - d| / max(1,|p|)
    Vec complementarity;                 // per-row |eta_l * slack_l|
};

enum class SdrStatus { Optimal, Infeasible, Unbounded, MaxIterations };

struct SdrOutcome {
    SdrStatus status = SdrStatus::MaxIterations;
    SdrSolution primal;
    DualSolution dual;
    KktReport kkt;
    int iterations = 0;
};

/// Builds the SDP from a scenario: QoS rows first, then shaping rows.
SdpProblem assemble(const Scenario& scenario);

/// Solves the SDP and its dual with a dense interior-point method on the
/// real symmetric embedding of the Hermitian blocks.
SdrOutcome solve(const SdpProblem& problem, const SolveTolerances& tol = {});

/// Residual record for a primal/dual pair.
KktReport kkt_report(const SdpProblem& problem, const SdrSolution& primal,
                     const DualSolution& dual);

/// Value of constraint row l at the given blocks.
double row_value(const SdpProblem& problem, int l, const std::vector<CMat>& X);

/// Rank under the relative eigenvalue rule: the number of eigenvalues
/// (descending) that are at least rel_threshold times the trace.
int numerical_rank(const CMat& X, double rel_threshold = 1e-4);

// Hermitian <-> real symmetric embedding helpers (exposed for tests).
Mat herm_to_real(const CMat& H);
CMat real_to_herm(const Mat& S);

}  // namespace grbf

#endif
