// SPDX-License-Identifier: Apache-2.0
#include "grbf/sdr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace grbf {

Mat herm_to_real(const CMat& H) {
    const int n = static_cast<int>(H.rows());
    Mat T(2 * n, 2 * n);
    const Mat re = H.real();
    const Mat im = H.imag();
    T.topLeftCorner(n, n) = re;
    T.bottomRightCorner(n, n) = re;
    T.topRightCorner(n, n) = -im;
    T.bottomLeftCorner(n, n) = im;
    return T;
}

CMat real_to_herm(const Mat& S) {
    const int n = static_cast<int>(S.rows()) / 2;
    const Mat P = S.topLeftCorner(n, n);
    const Mat Q = S.topRightCorner(n, n);
    const Mat Qt = S.bottomLeftCorner(n, n);
    const Mat R = S.bottomRightCorner(n, n);
    CMat H(n, n);
    H.real() = 0.5 * (P + R);
    H.imag() = 0.5 * (Qt - Q);
    // symmetrize against rounding
    H = 0.5 * (H + H.adjoint()).eval();
    return H;
}

SdpProblem assemble(const Scenario& scenario) {
    scenario.validate();
    SdpProblem p;
    p.antennas = scenario.antennas;
    p.num_blocks = scenario.num_users();
    p.rows = qos_constraints(scenario);
    for (const ShapingConstraint& c : scenario.shaping) p.rows.push_back(c);
    return p;
}

double row_value(const SdpProblem& problem, int l, const std::vector<CMat>& X) {
    const ShapingConstraint& row = problem.rows.at(l);
    double v = 0.0;
    for (int m = 0; m < problem.num_blocks; ++m)
        v += (row.A[m].cwiseProduct(X[m].conjugate())).sum().real();
    return v;
}

namespace {

double sense_violation(Sense sense, double value, double b) {
    switch (sense) {
        case Sense::Geq: return std::max(0.0, b - value);
        case Sense::Leq: return std::max(0.0, value - b);
        default: return std::abs(value - b);
    }
}

double min_herm_eigenvalue(const CMat& H) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(H, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

}  // namespace

KktReport kkt_report(const SdpProblem& problem, const SdrSolution& primal,
                     const DualSolution& dual) {
    const int m = problem.num_rows();
    const int M = problem.num_blocks;
    const int N = problem.antennas;
    KktReport rep;
    rep.complementarity = Vec::Zero(m);

    double dual_obj = 0.0;
    for (int l = 0; l < m; ++l) {
        const double v = row_value(problem, l, primal.X);
        const double b = problem.rows[l].b;
        rep.max_primal_residual =
            std::max(rep.max_primal_residual,
                     sense_violation(problem.rows[l].sense, v, b) / std::max(1.0, std::abs(b)));
        rep.complementarity[l] = std::abs(dual.eta[l] * (v - b));
        dual_obj += dual.eta[l] * b;
    }
    rep.duality_gap = std::abs(primal.objective - dual_obj) /
                      std::max(1.0, std::abs(primal.objective));

    rep.min_primal_eigenvalue = 0.0;
    for (int i = 0; i < M; ++i)
        rep.min_primal_eigenvalue =
            std::min(rep.min_primal_eigenvalue, min_herm_eigenvalue(primal.X[i]));

    for (int i = 0; i < M; ++i) {
        CMat Z = CMat::Identity(N, N);
        if (!dual.Z.empty()) {
            Z = dual.Z[i];
        } else {
            for (int l = 0; l < m; ++l) Z -= dual.eta[l] * problem.rows[l].A[i];
        }
        rep.max_dual_psd_violation =
            std::max(rep.max_dual_psd_violation, std::max(0.0, -min_herm_eigenvalue(Z)));
    }
    return rep;
}

SdrOutcome solve(const SdpProblem& problem, const SolveTolerances& tol) {
    const int N = problem.antennas;
    const int M = problem.num_blocks;
    const int m = problem.num_rows();
    if (N < 1 || N > 64 || m < 1 || m > 256)
        throw std::invalid_argument("sdr: problem dimensions outside dense solver limits");
    for (const ShapingConstraint& row : problem.rows)
        if (static_cast<int>(row.A.size()) != M)
            throw std::invalid_argument("sdr: row block count mismatch");

    const int d = 2 * N;              // real embedding dimension
    const int sv = d * (d + 1) / 2;   // svec length per block
    int nonneg = 0;
    for (const ShapingConstraint& row : problem.rows)
        if (row.sense != Sense::Eq) ++nonneg;

    ConicProblem cp;
    cp.cone.sym_dims.assign(M, d);
    cp.cone.nonneg = nonneg;
    const int n = M * sv + nonneg;
    cp.A = Mat::Zero(m, n);
    cp.b = Vec::Zero(m);
    cp.c = Vec::Zero(n);

    // objective: Tr(X_i) == Tr(I/2 * embed(X_i))
    {
        const Vec half_id = sym_to_svec(Mat::Identity(d, d) * 0.5);
        for (int i = 0; i < M; ++i) cp.c.segment(i * sv, sv) = half_id;
    }

    // row scaling keeps the normal matrix well conditioned when shaping
    // rows differ in magnitude by several orders
    Vec row_scale(m);
    int slack = 0;
    for (int l = 0; l < m; ++l) {
        const ShapingConstraint& row = problem.rows[l];
        double mag = std::abs(row.b);
        for (int i = 0; i < M; ++i) mag = std::max(mag, row.A[i].norm());
        row_scale[l] = std::max(1.0, mag);
        for (int i = 0; i < M; ++i) {
            const Vec seg = sym_to_svec(herm_to_real(row.A[i]) * 0.5) / row_scale[l];
            cp.A.row(l).segment(i * sv, sv) = seg;
        }
        cp.b[l] = row.b / row_scale[l];
        if (row.sense == Sense::Geq)
            cp.A(l, M * sv + slack++) = -1.0;
        else if (row.sense == Sense::Leq)
            cp.A(l, M * sv + slack++) = 1.0;
    }

    ConicOptions copts;
    copts.feas_tol = std::min(1e-10, tol.feasibility);
    copts.gap_tol = std::min(1e-10, tol.gap);
    copts.max_iterations = tol.max_iterations;

    const ConicResult cres = solve_conic(cp, copts);

    SdrOutcome out;
    out.iterations = cres.iterations;
    if (cres.status == ConicStatus::PrimalInfeasible) {
        out.status = SdrStatus::Infeasible;
        out.dual.eta = Vec(m);
        for (int l = 0; l < m; ++l) out.dual.eta[l] = cres.y[l] / row_scale[l];
        return out;
    }
    if (cres.status == ConicStatus::DualInfeasible) {
        out.status = SdrStatus::Unbounded;
        return out;
    }

    out.primal.X.resize(M);
    for (int i = 0; i < M; ++i)
        out.primal.X[i] = real_to_herm(svec_to_sym(cres.x.segment(i * sv, sv), d));
    out.primal.objective = 0.0;
    for (int i = 0; i < M; ++i) out.primal.objective += out.primal.X[i].trace().real();

    out.dual.eta = Vec(m);
    for (int l = 0; l < m; ++l) out.dual.eta[l] = cres.y[l] / row_scale[l];
    out.dual.Z.resize(M);
    for (int i = 0; i < M; ++i) {
        CMat Z = CMat::Identity(N, N);
        for (int l = 0; l < m; ++l) Z -= out.dual.eta[l] * problem.rows[l].A[i];
        out.dual.Z[i] = Z;
    }

    out.kkt = kkt_report(problem, out.primal, out.dual);
    const bool good = out.kkt.max_primal_residual <= tol.feasibility &&
                      out.kkt.duality_gap <= tol.gap &&
                      out.kkt.max_dual_psd_violation <= tol.psd &&
                      out.kkt.min_primal_eigenvalue >= -tol.psd;
    out.status = good ? SdrStatus::Optimal : SdrStatus::MaxIterations;
    return out;
}

int numerical_rank(const CMat& X, double rel_threshold) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(X, Eigen::EigenvaluesOnly);
    const Vec ev = eig.eigenvalues();
    const double total = ev.sum();
    if (total <= 0.0) return 0;
    int rank = 0;
    for (int k = 0; k < ev.size(); ++k)
        if (ev[k] >= rel_threshold * total) ++rank;
    return rank;
}

}  // namespace grbf
