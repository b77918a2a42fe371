// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_RANDOMIZE_HPP
#define GRBF_RANDOMIZE_HPP

#include <optional>
#include <vector>

#include "grbf/rng.hpp"
#include "grbf/scenario.hpp"
#include "grbf/types.hpp"

namespace grbf {

/// One randomization draw: fixed-shape candidates, per-user power scales
/// from the control LP, and the resulting per-slot transmit power.
struct RandomCandidate {
    std::vector<CMat> W_bar;
    Vec p;
    double total_power = 0.0;
};

/// Gaussian candidates W_bar_i = U_i Sigma_i^{1/2} Lambda_i with Lambda_i
/// of shape N x columns and i.i.d. unit-variance complex entries, so that
/// E[W_bar W_bar^H] = columns * X_i.
std::vector<CMat> draw_candidate(const std::vector<CMat>& X, Rng& rng,
                                 int columns = 8);

/// Power control: min sum_m p_m Tr(W_m W_m^H) over p >= 0 subject to all
/// constraint rows evaluated at sqrt(p_m) W_m. Returns nullopt when the
/// LP is infeasible.
std::optional<Vec> power_control(const std::vector<CMat>& candidates,
                                 const std::vector<ShapingConstraint>& rows);

/// Best-of-n randomization (fixed candidate shape, default 8 beams per
/// user): returns the scaled candidate of least per-slot power, or
/// nullopt when every draw has an infeasible power control problem.
std::optional<RandomCandidate> randomization_search(
    const std::vector<CMat>& X, const std::vector<ShapingConstraint>& rows,
    int n_rand, Rng& rng, int columns = 8);

}  // namespace grbf

#endif
