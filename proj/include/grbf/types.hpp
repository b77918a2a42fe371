// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_TYPES_HPP
#define GRBF_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace grbf {

using Real = double;
using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Relation sign of a constraint row.
enum class Sense { Geq, Leq, Eq };

inline const char* to_string(Sense s) {
    switch (s) {
        case Sense::Geq: return ">=";
        case Sense::Leq: return "<=";
        default: return "=";
    }
}

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }
inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace grbf

#endif
