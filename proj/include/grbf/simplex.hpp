// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_SIMPLEX_HPP
#define GRBF_SIMPLEX_HPP

#include <vector>

#include "grbf/types.hpp"

namespace grbf {

/// Dense LP in the form  min c'x  s.t.  a_l' x  sense_l  b_l,  x >= 0.
struct LpProblem {
    Mat A;
    Vec b;
    std::vector<Sense> senses;
    Vec c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec x;
    double objective = 0.0;
};

/// Two-phase tableau simplex with Bland's rule (anti-cycling; the
/// problems here are tiny, so exactness beats speed).
LpResult solve_lp(const LpProblem& problem);

}  // namespace grbf

#endif
