// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_SCENARIO_HPP
#define GRBF_SCENARIO_HPP

#include <string>
#include <vector>

#include "grbf/rng.hpp"
#include "grbf/types.hpp"

namespace grbf {

/// One downlink user: channel, minimum-SINR target and noise power,
/// all in linear units.
struct User {
    CVec channel;
    double sinr_target = 1.0;
    double noise_power = 0.1;
};

/// One quadratic shaping row: sum_m Tr(A[m] X_m) sense b.
/// The per-user matrices must be Hermitian but need not be definite.
struct ShapingConstraint {
    std::vector<CMat> A;
    double b = 0.0;
    Sense sense = Sense::Geq;
};

/// Complete problem instance: N antennas, M users, L shaping rows.
struct Scenario {
    int antennas = 0;
    std::vector<User> users;
    std::vector<ShapingConstraint> shaping;

    int num_users() const { return static_cast<int>(users.size()); }
    int num_shaping() const { return static_cast<int>(shaping.size()); }

    /// Throws std::invalid_argument when dimensions or invariants are off.
    void validate() const;
};

/// ULA spatial signature [1, e^{j pi sin t}, ..., e^{j pi (N-1) sin t}]
/// for an angle in degrees relative to broadside.
CVec steering_vector(double theta_deg, int N);

// Radian-domain signature and its first two derivatives w.r.t. the angle.
CVec steering_vector_rad(double theta_rad, int N);
CVec steering_derivative_rad(double theta_rad, int N);
CVec steering_second_derivative_rad(double theta_rad, int N);

/// The M QoS rows Tr(h_i h_i^H X_i) - gamma_i sum_{m != i} Tr(h_i h_i^H X_m)
/// >= gamma_i sigma_i^2, one per user.
std::vector<ShapingConstraint> qos_constraints(const Scenario& scenario);

/// Minimum received power b_min (linear) at each charging terminal.
std::vector<ShapingConstraint> charging_constraints(
    const std::vector<double>& terminal_angles_deg, double b_min, int N, int M);

/// Sidelobe control at J co-channel directions: J interference caps,
/// 2J first-derivative band rows and J curvature rows (4J total, in that
/// order).
std::vector<ShapingConstraint> sidelobe_constraints(
    const std::vector<double>& cochannel_angles_deg, double cap, double eps_a,
    int N, int M);

/// Relaxed nulling: per (user, direction) one indefinite row
/// Tr((beta ||h||^2 I - h h^H) X_i) >= 0, user-major order.
std::vector<ShapingConstraint> relaxed_nulling_constraints(
    const std::vector<double>& cochannel_angles_deg, double beta, int N, int M);

/// Each angle drawn uniformly from [nominal - half_width, nominal + half_width].
std::vector<double> perturb_angles(const std::vector<double>& nominal_deg,
                                   Rng& rng, double half_width_deg);

// JSON config round trip. Schema:
//   {"N": n,
//    "users": [{"angle_deg": a | "channel": [re,im,...], "sinr_db": g,
//               "noise_power": s2}],
//    "shaping": [{"type": "charging", "angles_deg": [...], "min_power_db": b},
//                {"type": "sidelobe", "angles_deg": [...], "cap": c,
//                 "eps_a": e},
//                {"type": "nulling", "angles_deg": [...], "beta": b},
//                {"type": "custom-matrix", "b": b, "sense": ">=",
//                 "matrices": [[re,im,...] per user, row-major]}]}
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

}  // namespace grbf

#endif
