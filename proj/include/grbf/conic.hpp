// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_CONIC_HPP
#define GRBF_CONIC_HPP

#include <functional>
#include <vector>

#include "grbf/types.hpp"

namespace grbf {

/// Product cone: dense real symmetric PSD blocks followed by a
/// nonnegative orthant. Vectors use the scaled svec layout (column-major
/// upper triangle, off-diagonals times sqrt(2)) so that dot products in
/// coordinates equal trace inner products.
struct ConeSpec {
    std::vector<int> sym_dims;
    int nonneg = 0;

    int svec_dim() const {
        int n = nonneg;
        for (int d : sym_dims) n += d * (d + 1) / 2;
        return n;
    }
    /// Barrier degree: number of eigenvalue slots.
    int degree() const {
        int nu = nonneg;
        for (int d : sym_dims) nu += d;
        return nu;
    }
};

/// Standard conic form: min c'x  s.t.  A x = b,  x in K.
struct ConicProblem {
    Mat A;
    Vec b;
    Vec c;
    ConeSpec cone;
};

enum class ConicStatus {
    Optimal,
    PrimalInfeasible,   // certificate: A'y + s = 0, s in K, b'y = 1
    DualInfeasible,     // certificate: A x = 0, x in K, c'x = -1
    IterationLimit,
    NumericalLimit,
};

struct ConicOptions {
    double feas_tol = 1e-9;
    double gap_tol = 1e-9;
    double infeas_tol = 1e-9;
    int max_iterations = 200;
    double step_scale = 0.99;
    /// Invoked once per iteration with de-homogenized progress figures.
    std::function<void(int iter, double pcost, double dcost, double pres,
                       double dres, double relgap)>
        trace;
};

struct ConicResult {
    ConicStatus status = ConicStatus::NumericalLimit;
    Vec x, y, s;  // on the optimal path already divided by tau
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // max_l |row_l - b_l| / max(1,|b_l|)
    double dual_residual = 0.0;    // ||A'y + s - c||_inf / max(1,||c||_inf)
    double duality_gap = 0.0;      // x's / max(1,|c'x|)
    int iterations = 0;
};

ConicResult solve_conic(const ConicProblem& problem, const ConicOptions& opts = {});

// svec round trip for symmetric matrices
Vec sym_to_svec(const Mat& S);
Mat svec_to_sym(const Vec& v, int d);

}  // namespace grbf

#endif
