// SPDX-License-Identifier: Apache-2.0
#include "grbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace grbf {

using nlohmann::json;

void Scenario::validate() const {
    if (antennas < 1) throw std::invalid_argument("scenario: antennas must be >= 1");
    if (users.empty()) throw std::invalid_argument("scenario: at least one user required");
    for (size_t i = 0; i < users.size(); ++i) {
        const User& u = users[i];
        if (u.channel.size() != antennas)
            throw std::invalid_argument("scenario: user channel length != antennas");
        if (!(u.sinr_target > 0.0))
            throw std::invalid_argument("scenario: SINR target must be positive");
        if (!(u.noise_power > 0.0))
            throw std::invalid_argument("scenario: noise power must be positive");
        if (u.channel.norm() == 0.0)
            throw std::invalid_argument("scenario: zero channel vector");
    }
    const int M = num_users();
    for (const ShapingConstraint& c : shaping) {
        if (static_cast<int>(c.A.size()) != M)
            throw std::invalid_argument("scenario: shaping row must carry one matrix per user");
        for (const CMat& a : c.A) {
            if (a.rows() != antennas || a.cols() != antennas)
                throw std::invalid_argument("scenario: shaping matrix is not N x N");
            if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
                throw std::invalid_argument("scenario: shaping matrix is not Hermitian");
        }
    }
}

CVec steering_vector_rad(double theta_rad, int N) {
    CVec h(N);
    const double s = std::sin(theta_rad);
    for (int k = 0; k < N; ++k) {
        const double phase = kPi * k * s;
        h[k] = Complex(std::cos(phase), std::sin(phase));
    }
    return h;
}

CVec steering_vector(double theta_deg, int N) {
    if (N < 1) throw std::invalid_argument("steering_vector: N must be >= 1");
    return steering_vector_rad(deg2rad(theta_deg), N);
}

CVec steering_derivative_rad(double theta_rad, int N) {
    CVec h = steering_vector_rad(theta_rad, N);
    const double c = std::cos(theta_rad);
    for (int k = 0; k < N; ++k) h[k] *= Complex(0.0, kPi * k * c);
    return h;
}

CVec steering_second_derivative_rad(double theta_rad, int N) {
    CVec h = steering_vector_rad(theta_rad, N);
    const double c = std::cos(theta_rad);
    const double s = std::sin(theta_rad);
    for (int k = 0; k < N; ++k) {
        const Complex jk(0.0, kPi * k);
        h[k] *= jk * jk * c * c - jk * s;
    }
    return h;
}

std::vector<ShapingConstraint> qos_constraints(const Scenario& scenario) {
    scenario.validate();
    const int M = scenario.num_users();
    const int N = scenario.antennas;
    std::vector<ShapingConstraint> rows;
    rows.reserve(M);
    for (int i = 0; i < M; ++i) {
        const User& u = scenario.users[i];
        const CMat outer = u.channel * u.channel.adjoint();
        ShapingConstraint row;
        row.A.assign(M, CMat::Zero(N, N));
        for (int m = 0; m < M; ++m)
            row.A[m] = (m == i) ? outer : CMat(-u.sinr_target * outer);
        row.b = u.sinr_target * u.noise_power;
        row.sense = Sense::Geq;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ShapingConstraint> charging_constraints(
    const std::vector<double>& terminal_angles_deg, double b_min, int N, int M) {
    if (!(b_min > 0.0))
        throw std::invalid_argument("charging_constraints: threshold must be positive");
    std::vector<ShapingConstraint> rows;
    rows.reserve(terminal_angles_deg.size());
    for (double angle : terminal_angles_deg) {
        const CVec h = steering_vector(angle, N);
        ShapingConstraint row;
        row.A.assign(M, h * h.adjoint());
        row.b = b_min;
        row.sense = Sense::Geq;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ShapingConstraint> sidelobe_constraints(
    const std::vector<double>& cochannel_angles_deg, double cap, double eps_a,
    int N, int M) {
    if (!(cap > 0.0)) throw std::invalid_argument("sidelobe_constraints: cap must be positive");
    if (!(eps_a > 0.0)) throw std::invalid_argument("sidelobe_constraints: eps_a must be positive");

    const size_t J = cochannel_angles_deg.size();
    std::vector<CMat> power(J), deriv(J), curv(J);
    for (size_t j = 0; j < J; ++j) {
        const double mu = deg2rad(cochannel_angles_deg[j]);
        const CVec h = steering_vector_rad(mu, N);
        const CVec dh = steering_derivative_rad(mu, N);
        const CVec d2h = steering_second_derivative_rad(mu, N);
        power[j] = h * h.adjoint();
        deriv[j] = dh * h.adjoint() + h * dh.adjoint();
        curv[j] = h * d2h.adjoint() + d2h * h.adjoint() + 2.0 * (dh * dh.adjoint());
    }

    std::vector<ShapingConstraint> rows;
    rows.reserve(4 * J);
    auto push = [&](const CMat& A, double b, Sense sense) {
        ShapingConstraint row;
        row.A.assign(M, A);
        row.b = b;
        row.sense = sense;
        rows.push_back(std::move(row));
    };
    for (size_t j = 0; j < J; ++j) push(power[j], cap, Sense::Leq);
    for (size_t j = 0; j < J; ++j) push(deriv[j], eps_a, Sense::Leq);
    for (size_t j = 0; j < J; ++j) push(deriv[j], -eps_a, Sense::Geq);
    for (size_t j = 0; j < J; ++j) push(curv[j], 0.0, Sense::Geq);
    return rows;
}

std::vector<ShapingConstraint> relaxed_nulling_constraints(
    const std::vector<double>& cochannel_angles_deg, double beta, int N, int M) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("relaxed_nulling_constraints: beta must be in (0, 1)");
    std::vector<ShapingConstraint> rows;
    rows.reserve(cochannel_angles_deg.size() * M);
    for (int i = 0; i < M; ++i) {
        for (double angle : cochannel_angles_deg) {
            const CVec h = steering_vector(angle, N);
            ShapingConstraint row;
            row.A.assign(M, CMat::Zero(N, N));
            row.A[i] = beta * h.squaredNorm() * CMat::Identity(N, N) - h * h.adjoint();
            row.b = 0.0;
            row.sense = Sense::Geq;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<double> perturb_angles(const std::vector<double>& nominal_deg,
                                   Rng& rng, double half_width_deg) {
    if (half_width_deg < 0.0)
        throw std::invalid_argument("perturb_angles: half width must be >= 0");
    std::vector<double> out;
    out.reserve(nominal_deg.size());
    for (double a : nominal_deg)
        out.push_back(a + rng.uniform(-half_width_deg, half_width_deg));
    return out;
}

namespace {

CVec cvec_from_interleaved(const json& arr, int expected) {
    if (!arr.is_array() || arr.size() != static_cast<size_t>(2 * expected))
        throw std::invalid_argument("config: complex array must hold 2*N values (re,im interleaved)");
    CVec v(expected);
    for (int k = 0; k < expected; ++k)
        v[k] = Complex(arr[2 * k].get<double>(), arr[2 * k + 1].get<double>());
    return v;
}

json cvec_to_interleaved(const CVec& v) {
    json arr = json::array();
    for (int k = 0; k < v.size(); ++k) {
        arr.push_back(v[k].real());
        arr.push_back(v[k].imag());
    }
    return arr;
}

CMat cmat_from_interleaved(const json& arr, int n) {
    if (!arr.is_array() || arr.size() != static_cast<size_t>(2 * n * n))
        throw std::invalid_argument("config: matrix must hold 2*N*N values (row-major re,im interleaved)");
    CMat m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const size_t k = 2 * (static_cast<size_t>(r) * n + c);
            m(r, c) = Complex(arr[k].get<double>(), arr[k + 1].get<double>());
        }
    return m;
}

json cmat_to_interleaved(const CMat& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            arr.push_back(m(r, c).real());
            arr.push_back(m(r, c).imag());
        }
    return arr;
}

Sense sense_from_string(const std::string& s) {
    if (s == ">=") return Sense::Geq;
    if (s == "<=") return Sense::Leq;
    if (s == "=" || s == "==") return Sense::Eq;
    throw std::invalid_argument("config: unknown sense '" + s + "'");
}

std::vector<double> angles_field(const json& block) {
    std::vector<double> angles;
    for (const auto& a : block.at("angles_deg")) angles.push_back(a.get<double>());
    return angles;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json root = json::parse(text);
    Scenario sc;
    sc.antennas = root.at("N").get<int>();
    for (const auto& ju : root.at("users")) {
        User u;
        if (ju.contains("channel"))
            u.channel = cvec_from_interleaved(ju.at("channel"), sc.antennas);
        else
            u.channel = steering_vector(ju.at("angle_deg").get<double>(), sc.antennas);
        u.sinr_target = db2lin(ju.at("sinr_db").get<double>());
        u.noise_power = ju.at("noise_power").get<double>();
        sc.users.push_back(std::move(u));
    }
    const int M = sc.num_users();
    if (root.contains("shaping")) {
        for (const auto& block : root.at("shaping")) {
            const std::string type = block.at("type").get<std::string>();
            std::vector<ShapingConstraint> rows;
            if (type == "charging") {
                rows = charging_constraints(angles_field(block),
                                            db2lin(block.at("min_power_db").get<double>()),
                                            sc.antennas, M);
            } else if (type == "sidelobe") {
                rows = sidelobe_constraints(angles_field(block),
                                            block.at("cap").get<double>(),
                                            block.at("eps_a").get<double>(),
                                            sc.antennas, M);
            } else if (type == "nulling") {
                rows = relaxed_nulling_constraints(angles_field(block),
                                                   block.at("beta").get<double>(),
                                                   sc.antennas, M);
            } else if (type == "custom-matrix") {
                ShapingConstraint row;
                const auto& mats = block.at("matrices");
                if (mats.size() != static_cast<size_t>(M))
                    throw std::invalid_argument("config: custom-matrix needs one matrix per user");
                for (const auto& jm : mats)
                    row.A.push_back(cmat_from_interleaved(jm, sc.antennas));
                row.b = block.at("b").get<double>();
                row.sense = sense_from_string(block.at("sense").get<std::string>());
                rows.push_back(std::move(row));
            } else {
                throw std::invalid_argument("config: unknown shaping type '" + type + "'");
            }
            for (auto& r : rows) sc.shaping.push_back(std::move(r));
        }
    }
    sc.validate();
    return sc;
}

std::string scenario_to_json_text(const Scenario& scenario) {
    json root;
    root["N"] = scenario.antennas;
    root["users"] = json::array();
    for (const User& u : scenario.users) {
        json ju;
        ju["channel"] = cvec_to_interleaved(u.channel);
        ju["sinr_db"] = lin2db(u.sinr_target);
        ju["noise_power"] = u.noise_power;
        root["users"].push_back(std::move(ju));
    }
    root["shaping"] = json::array();
    for (const ShapingConstraint& c : scenario.shaping) {
        json block;
        block["type"] = "custom-matrix";
        block["b"] = c.b;
        block["sense"] = to_string(c.sense);
        block["matrices"] = json::array();
        for (const CMat& a : c.A) block["matrices"].push_back(cmat_to_interleaved(a));
        root["shaping"].push_back(std::move(block));
    }
    return root.dump(2);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scenario_from_json_text(text);
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json_text(scenario) << "\n";
}

}  // namespace grbf
