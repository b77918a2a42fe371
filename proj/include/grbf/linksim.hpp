// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_LINKSIM_HPP
#define GRBF_LINKSIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "grbf/ostbc.hpp"
#include "grbf/rng.hpp"
#include "grbf/scenario.hpp"
#include "grbf/types.hpp"

namespace grbf {

struct LinkRunConfig {
    int blocks = 100000;
    std::uint64_t seed = 1;
};

/// Per-user result of a link run. Powers are per symbol slot; the symbol
/// alphabet is 4-QAM with unit average energy.
struct UserLinkStats {
    int user = 0;
    int blocks = 0;
    double theoretical_sinr = 0.0;  // linear
    double empirical_sinr = 0.0;    // linear; inf when no error power
    bool no_interference = false;   // flagged when I+N power is ~0
    Vec slot_error_power;           // mean |shat_k - s_k|^2 per slot
    Vec slot_error_power_se;        // standard error of the above
    Vec slot_noise_power;           // equalized-noise diagonal per slot
    Vec slot_interference_power;    // equalized-interference diagonal per slot
    CMat noise_covariance;          // sample covariance of equalized noise
    CMat interference_covariance;
    double power_analytic = 0.0;    // Tr(W_i W_i^H)
    double power_empirical = 0.0;   // mean over blocks and slots
    Vec slot_power_empirical;       // per-slot transmit power estimate
    Vec slot_power_se;
    double ser = 0.0;               // nearest-neighbor symbol error rate
};

/// Received K-vector y_i = sum_m X(s_m) W_m^H h_i + n_i for one block.
/// `symbols` holds one row per user (M x K).
CVec transmit_block(const OstbcCode& code, const std::vector<CMat>& W,
                    const CMat& symbols, const CVec& h_i, const CVec& noise_i);

/// Sign-adjusted receive vector [y_1, -y_2, ..., -y_K].
CVec sign_adjust(const CVec& y);

/// Post-detection SINR ||W_i^H h_i||^2 / (sum_{m!=i} ||W_m^H h_i||^2 + s2).
double theoretical_sinr(const std::vector<CMat>& W, int i, const CVec& h_i,
                        double noise_power);

/// Unit-energy 4-QAM alphabet helpers.
Complex draw_qam4(Rng& rng);
Complex nearest_qam4(Complex z);

/// Full Monte-Carlo run over all users of the scenario with the given
/// (rotated) beamformers.
std::vector<UserLinkStats> run_link(const LinkRunConfig& config,
                                    const std::vector<CMat>& W,
                                    const Scenario& scenario);

/// Empirical per-slot transmit power of user i beams under random blocks;
/// returns (overall mean, per-slot means, per-slot standard errors).
struct SlotPowerEstimate {
    double mean = 0.0;
    Vec per_slot;
    Vec per_slot_se;
};
SlotPowerEstimate per_slot_power(const OstbcCode& code, const CMat& W_i,
                                 Rng& rng, int blocks);

/// CSV: user, blocks, empirical_sinr_db, theoretical_sinr_db,
/// power_analytic, power_empirical, ser.
void write_link_csv(const std::vector<UserLinkStats>& stats,
                    const std::string& path);

}  // namespace grbf

#endif
