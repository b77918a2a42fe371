// SPDX-License-Identifier: Apache-2.0
#include "grbf/randomize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "grbf/simplex.hpp"

namespace grbf {

std::vector<CMat> draw_candidate(const std::vector<CMat>& X, Rng& rng,
                                 int columns) {
    if (columns < 1) throw std::invalid_argument("draw_candidate: columns must be >= 1");
    std::vector<CMat> out;
    out.reserve(X.size());
    for (const CMat& x : X) {
        const int n = static_cast<int>(x.rows());
        Eigen::SelfAdjointEigenSolver<CMat> eig(x);
        Vec ev = eig.eigenvalues().cwiseMax(0.0);
        CMat root = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();
        CMat lambda(n, columns);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < columns; ++c) lambda(r, c) = rng.cgauss();
        out.push_back(root * lambda);
    }
    return out;
}

std::optional<Vec> power_control(const std::vector<CMat>& candidates,
                                 const std::vector<ShapingConstraint>& rows) {
    const int M = static_cast<int>(candidates.size());
    const int L = static_cast<int>(rows.size());

    std::vector<CMat> gram(M);
    for (int m = 0; m < M; ++m) gram[m] = candidates[m] * candidates[m].adjoint();

    LpProblem lp;
    lp.A = Mat(L, M);
    lp.b = Vec(L);
    lp.senses.resize(L);
    lp.c = Vec(M);
    for (int m = 0; m < M; ++m) lp.c[m] = gram[m].trace().real();
    for (int l = 0; l < L; ++l) {
        for (int m = 0; m < M; ++m)
            lp.A(l, m) = (rows[l].A[m].cwiseProduct(gram[m].conjugate())).sum().real();
        lp.b[l] = rows[l].b;
        lp.senses[l] = rows[l].sense;
    }

    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) return std::nullopt;
    return res.x;
}

std::optional<RandomCandidate> randomization_search(
    const std::vector<CMat>& X, const std::vector<ShapingConstraint>& rows,
    int n_rand, Rng& rng, int columns) {
    if (n_rand < 1) throw std::invalid_argument("randomization_search: n_rand must be >= 1");
    std::optional<RandomCandidate> best;
    for (int k = 0; k < n_rand; ++k) {
        std::vector<CMat> cand = draw_candidate(X, rng, columns);
        const auto p = power_control(cand, rows);
        if (!p) continue;
        double power = 0.0;
        for (size_t m = 0; m < cand.size(); ++m)
            power += (*p)[m] * (cand[m] * cand[m].adjoint()).trace().real();
        if (!best || power < best->total_power) {
            RandomCandidate rc;
            rc.p = *p;
            rc.total_power = power;
            rc.W_bar = std::move(cand);
            best = std::move(rc);
        }
    }
    return best;
}

}  // namespace grbf
