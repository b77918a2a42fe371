// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_RANKRED_HPP
#define GRBF_RANKRED_HPP

#include <optional>
#include <vector>

#include "grbf/scenario.hpp"
#include "grbf/types.hpp"

namespace grbf {

/// Current matrices and their low-rank factors X_i = Q_i Q_i^H with
/// K_i = numerical_rank(X_i) columns each.
struct RankReductionState {
    std::vector<CMat> X;
    std::vector<CMat> Q;
    int iteration = 0;

    std::vector<int> ranks() const {
        std::vector<int> r;
        r.reserve(Q.size());
        for (const CMat& q : Q) r.push_back(static_cast<int>(q.cols()));
        return r;
    }
    int total_rank() const {
        int t = 0;
        for (const CMat& q : Q) t += static_cast<int>(q.cols());
        return t;
    }
};

/// Hermitian step directions, one K_i x K_i block per user, not all zero.
struct DeltaSet {
    std::vector<CMat> delta;
};

struct RankReductionOptions {
    double rank_threshold = 1e-4;  // relative eigenvalue cutoff for factors
    double null_threshold = 1e-9;  // singular values below this*sigma_max are null
    double objective_guard = 1e-7; // tolerated relative objective drift per step
};

struct RankReductionTraceRecord {
    int iteration = 0;
    std::vector<int> ranks;
    double delta_max = 0.0;
    double objective = 0.0;
    double max_row_drift = 0.0;
};

/// Eigenvalue factorization keeping components above the relative cutoff.
RankReductionState factorize(const std::vector<CMat>& X, double rank_threshold = 1e-4);

/// Real matrix of the homogeneous system: one row per constraint, one
/// column per real parameter of the Hermitian blocks (K_m^2 per block;
/// orthonormal basis: sqrt(2)-scaled real/imag off-diagonal pairs plus
/// diagonal entries).
Mat assemble_system(const RankReductionState& state,
                    const std::vector<ShapingConstraint>& constraints);

/// Unit-norm null-space element reconstructed into Hermitian blocks, or
/// nullopt when only the trivial solution exists. Sign is normalized so
/// the first nonzero parameter is positive.
std::optional<DeltaSet> find_nontrivial_delta(const Mat& system,
                                              const RankReductionState& state,
                                              double null_threshold = 1e-9);

/// One update X_i <- Q_i (I - Delta_i / delta_max) Q_i^H with delta_max
/// the signed eigenvalue of largest magnitude over all blocks.
/// Throws "no rank drop" when that eigenvalue is numerically zero.
RankReductionState reduction_step(const RankReductionState& state,
                                  const DeltaSet& delta_set,
                                  double rank_threshold = 1e-4);

/// Full procedure: factor, solve the homogeneous system, step; stops when
/// sum_i rank^2 <= #rows, when no nontrivial direction exists, or after
/// sum_i rank(X_i) - M iterations.
std::vector<CMat> rank_reduce(const std::vector<CMat>& X,
                              const std::vector<ShapingConstraint>& constraints,
                              const RankReductionOptions& opts = {},
                              std::vector<RankReductionTraceRecord>* trace = nullptr);

}  // namespace grbf

#endif
