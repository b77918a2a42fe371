// SPDX-License-Identifier: Apache-2.0
#include "grbf/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace grbf {

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct BlockLayout {
    int dim;     // matrix dimension
    int offset;  // svec offset
    int len;     // svec length
};

struct Layout {
    std::vector<BlockLayout> blocks;
    int lin_offset = 0;
    int lin_len = 0;
    int n = 0;
};

Layout make_layout(const ConeSpec& cone) {
    Layout lay;
    int off = 0;
    for (int d : cone.sym_dims) {
        lay.blocks.push_back({d, off, d * (d + 1) / 2});
        off += d * (d + 1) / 2;
    }
    lay.lin_offset = off;
    lay.lin_len = cone.nonneg;
    lay.n = off + cone.nonneg;
    return lay;
}

void svec_into(const Mat& S, Eigen::Ref<Vec> out) {
    const int d = static_cast<int>(S.rows());
    int k = 0;
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < c; ++r) out[k++] = kSqrt2 * S(r, c);
        out[k++] = S(c, c);
    }
}

void sym_into(const Eigen::Ref<const Vec>& v, Mat& S) {
    const int d = static_cast<int>(S.rows());
    int k = 0;
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < c; ++r) {
            const double val = v[k++] / kSqrt2;
            S(r, c) = val;
            S(c, r) = val;
        }
        S(c, c) = v[k++];
    }
}

/// Nesterov-Todd scaling for the product cone at the current iterate.
struct Scaling {
    struct SymScale {
        Mat R, Rinv;
        Vec lambda;  // scaled-point eigenvalues
    };
    std::vector<SymScale> sym;
    Vec w_lin, lambda_lin;
    bool ok = false;
};

class Solver {
  public:
    Solver(const ConicProblem& p, const ConicOptions& o)
        : prob_(p), opts_(o), lay_(make_layout(p.cone)) {
        m_ = static_cast<int>(p.A.rows());
        n_ = lay_.n;
        if (p.A.cols() != n_ || p.b.size() != m_ || p.c.size() != n_)
            throw std::invalid_argument("conic: inconsistent problem dimensions");
        // cache each row (and c) as per-block symmetric matrices
        row_mats_.resize(m_);
        for (int l = 0; l < m_; ++l) row_mats_[l] = split_mats(p.A.row(l).transpose());
        c_mats_ = split_mats(p.c);
        bnorm_scale_ = Vec(m_);
        for (int l = 0; l < m_; ++l) bnorm_scale_[l] = std::max(1.0, std::abs(p.b[l]));
        cnorm_ = std::max(1.0, p.c.lpNorm<Eigen::Infinity>());
    }

    ConicResult run();

  private:
    std::vector<Mat> split_mats(const Vec& v) const {
        std::vector<Mat> mats;
        mats.reserve(lay_.blocks.size());
        for (const BlockLayout& b : lay_.blocks) {
            Mat S(b.dim, b.dim);
            sym_into(v.segment(b.offset, b.len), S);
            mats.push_back(std::move(S));
        }
        return mats;
    }

    bool compute_scaling(const Vec& x, const Vec& s, Scaling& sc) const;

    // scaled-space maps; all operate on full-length svec vectors
    Vec apply_W(const Scaling& sc, const Vec& u) const;      // svec(R' U R), w.*u
    Vec apply_WT(const Scaling& sc, const Vec& u) const;     // svec(R U R'), w.*u
    Vec apply_WinvT(const Scaling& sc, const Vec& u) const;  // svec(Rinv U Rinv'), u./w

    Vec jordan_div_lambda(const Scaling& sc, const Vec& u) const;

    double max_step(const Scaling& sc, const Vec& scaled_dir) const;

    struct Direction {
        Vec dx, dy, ds;
        double dtau = 0.0, dkappa = 0.0;
    };

    // Solves the Newton system for given right-hand sides; the Cholesky
    // factor of A*H*A' and the vector u = G^{-1}(A H c + b) are reused
    // between predictor and corrector.
    Direction solve_newton(const Scaling& sc, const Eigen::LLT<Mat>& G_llt,
                           const Vec& u_gc, const Vec& Wc, const Mat& B,
                           double tau, double kappa, const Vec& r1,
                           const Vec& r2, double r3, const Vec& ds_rhs,
                           double dkappa_rhs) const;

    const ConicProblem& prob_;
    const ConicOptions& opts_;
    Layout lay_;
    int m_ = 0, n_ = 0;
    std::vector<std::vector<Mat>> row_mats_;
    std::vector<Mat> c_mats_;
    Vec bnorm_scale_;
    double cnorm_ = 1.0;
};

bool Solver::compute_scaling(const Vec& x, const Vec& s, Scaling& sc) const {
    sc.sym.clear();
    sc.sym.reserve(lay_.blocks.size());
    for (const BlockLayout& b : lay_.blocks) {
        Mat X(b.dim, b.dim), S(b.dim, b.dim);
        sym_into(x.segment(b.offset, b.len), X);
        sym_into(s.segment(b.offset, b.len), S);
        Eigen::LLT<Mat> lx(X), ls(S);
        if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
        Mat L1 = lx.matrixL();
        Mat L2 = ls.matrixL();
        Eigen::JacobiSVD<Mat> svd(L2.transpose() * L1,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
        Vec sv = svd.singularValues();
        if (sv.minCoeff() <= 0.0) return false;
        Vec inv_sqrt = sv.cwiseSqrt().cwiseInverse();
        Scaling::SymScale ss;
        ss.R = L1 * svd.matrixV() * inv_sqrt.asDiagonal();
        ss.Rinv = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * L2.transpose();
        ss.lambda = sv;
        sc.sym.push_back(std::move(ss));
    }
    if (lay_.lin_len > 0) {
        Vec xl = x.segment(lay_.lin_offset, lay_.lin_len);
        Vec sl = s.segment(lay_.lin_offset, lay_.lin_len);
        if (xl.minCoeff() <= 0.0 || sl.minCoeff() <= 0.0) return false;
        sc.w_lin = (xl.cwiseQuotient(sl)).cwiseSqrt();
        sc.lambda_lin = (xl.cwiseProduct(sl)).cwiseSqrt();
    } else {
        sc.w_lin.resize(0);
        sc.lambda_lin.resize(0);
    }
    sc.ok = true;
    return true;
}

Vec Solver::apply_W(const Scaling& sc, const Vec& u) const {
    Vec out(n_);
    for (size_t i = 0; i < lay_.blocks.size(); ++i) {
        const BlockLayout& b = lay_.blocks[i];
        Mat U(b.dim, b.dim);
        sym_into(u.segment(b.offset, b.len), U);
        Mat V = sc.sym[i].R.transpose() * U * sc.sym[i].R;
        svec_into(V, out.segment(b.offset, b.len));
    }
    if (lay_.lin_len > 0)
        out.segment(lay_.lin_offset, lay_.lin_len) =
            sc.w_lin.cwiseProduct(u.segment(lay_.lin_offset, lay_.lin_len));
    return out;
}

Vec Solver::apply_WT(const Scaling& sc, const Vec& u) const {
    Vec out(n_);
    for (size_t i = 0; i < lay_.blocks.size(); ++i) {
        const BlockLayout& b = lay_.blocks[i];
        Mat U(b.dim, b.dim);
        sym_into(u.segment(b.offset, b.len), U);
        Mat V = sc.sym[i].R * U * sc.sym[i].R.transpose();
        svec_into(V, out.segment(b.offset, b.len));
    }
    if (lay_.lin_len > 0)
        out.segment(lay_.lin_offset, lay_.lin_len) =
            sc.w_lin.cwiseProduct(u.segment(lay_.lin_offset, lay_.lin_len));
    return out;
}

Vec Solver::apply_WinvT(const Scaling& sc, const Vec& u) const {
    Vec out(n_);
    for (size_t i = 0; i < lay_.blocks.size(); ++i) {
        const BlockLayout& b = lay_.blocks[i];
        Mat U(b.dim, b.dim);
        sym_into(u.segment(b.offset, b.len), U);
        Mat V = sc.sym[i].Rinv * U * sc.sym[i].Rinv.transpose();
        svec_into(V, out.segment(b.offset, b.len));
    }
    if (lay_.lin_len > 0)
        out.segment(lay_.lin_offset, lay_.lin_len) =
            u.segment(lay_.lin_offset, lay_.lin_len).cwiseQuotient(sc.w_lin);
    return out;
}

Vec Solver::jordan_div_lambda(const Scaling& sc, const Vec& u) const {
    Vec out(n_);
    for (size_t i = 0; i < lay_.blocks.size(); ++i) {
        const BlockLayout& b = lay_.blocks[i];
        Mat U(b.dim, b.dim);
        sym_into(u.segment(b.offset, b.len), U);
        const Vec& lam = sc.sym[i].lambda;
        for (int r = 0; r < b.dim; ++r)
            for (int c = 0; c < b.dim; ++c) U(r, c) = 2.0 * U(r, c) / (lam[r] + lam[c]);
        svec_into(U, out.segment(b.offset, b.len));
    }
    if (lay_.lin_len > 0)
        out.segment(lay_.lin_offset, lay_.lin_len) =
            u.segment(lay_.lin_offset, lay_.lin_len).cwiseQuotient(sc.lambda_lin);
    return out;
}

// Largest step a in [0, inf) with lambda + a*dir staying in the cone,
// for a direction already expressed in the scaled space.
double Solver::max_step(const Scaling& sc, const Vec& scaled_dir) const {
    double limit = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < lay_.blocks.size(); ++i) {
        const BlockLayout& b = lay_.blocks[i];
        Mat D(b.dim, b.dim);
        sym_into(scaled_dir.segment(b.offset, b.len), D);
        const Vec inv_sqrt = sc.sym[i].lambda.cwiseSqrt().cwiseInverse();
        Mat Dn = inv_sqrt.asDiagonal() * D * inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Mat> eig(Dn, Eigen::EigenvaluesOnly);
        const double rho = eig.eigenvalues().minCoeff();
        if (rho < 0.0) limit = std::min(limit, -1.0 / rho);
    }
    for (int k = 0; k < lay_.lin_len; ++k) {
        const double d = scaled_dir[lay_.lin_offset + k];
        if (d < 0.0) limit = std::min(limit, -sc.lambda_lin[k] / d);
    }
    return limit;
}

Solver::Direction Solver::solve_newton(const Scaling& sc,
                                       const Eigen::LLT<Mat>& G_llt,
                                       const Vec& u_gc, const Vec& Wc,
                                       const Mat& B, double tau, double kappa,
                                       const Vec& r1, const Vec& r2, double r3,
                                       const Vec& ds_rhs,
                                       double dkappa_rhs) const {
    const Vec dtilde = jordan_div_lambda(sc, ds_rhs);
    const Vec Wr2 = apply_W(sc, r2);

    const Vec v = G_llt.solve(r1 - B * (dtilde + Wr2));
    // tau step from the gap row; the denominator is strictly negative
    const double cWTd = Wc.dot(dtilde + Wr2);
    const double cHATu = (B * Wc).dot(u_gc);
    const double den = cHATu - Wc.squaredNorm() - prob_.b.dot(u_gc) - kappa / tau;
    const double cHATv = (B * Wc).dot(v);
    const double numer = r3 + prob_.b.dot(v) - dkappa_rhs / tau - cWTd - cHATv;

    Direction dir;
    dir.dtau = numer / den;
    dir.dy = v + dir.dtau * u_gc;
    const Vec inner = prob_.A.transpose() * dir.dy - dir.dtau * prob_.c + r2;
    dir.dx = apply_WT(sc, dtilde + apply_W(sc, inner));
    dir.ds = -inner;
    dir.dkappa = (dkappa_rhs - kappa * dir.dtau) / tau;
    return dir;
}

ConicResult Solver::run() {
    ConicResult res;
    const int deg = prob_.cone.degree();

    // unit initialization: identity blocks, ones on the orthant
    Vec x = Vec::Zero(n_), s = Vec::Zero(n_);
    for (const BlockLayout& b : lay_.blocks) {
        Mat I = Mat::Identity(b.dim, b.dim);
        svec_into(I, x.segment(b.offset, b.len));
        svec_into(I, s.segment(b.offset, b.len));
    }
    if (lay_.lin_len > 0) {
        x.segment(lay_.lin_offset, lay_.lin_len).setOnes();
        s.segment(lay_.lin_offset, lay_.lin_len).setOnes();
    }
    Vec y = Vec::Zero(m_);
    double tau = 1.0, kappa = 1.0;

    Vec e = x;  // cone identity

    double best_score = std::numeric_limits<double>::infinity();
    Vec bx = x, bs = s, by = y;
    double btau = tau;
    int small_steps = 0;

    auto metrics = [&](double& pres, double& dres, double& relgap, double& pcost,
                       double& dcost) {
        const Vec rp = prob_.A * x - prob_.b * tau;
        pres = 0.0;
        for (int l = 0; l < m_; ++l)
            pres = std::max(pres, std::abs(rp[l]) / (tau * bnorm_scale_[l]));
        const Vec rd = prob_.A.transpose() * y + s - prob_.c * tau;
        dres = rd.lpNorm<Eigen::Infinity>() / (tau * cnorm_);
        pcost = prob_.c.dot(x) / tau;
        dcost = prob_.b.dot(y) / tau;
        relgap = x.dot(s) / (tau * tau) / std::max(1.0, std::abs(pcost));
    };

    for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
        res.iterations = iter;

        double pres, dres, relgap, pcost, dcost;
        metrics(pres, dres, relgap, pcost, dcost);
        if (opts_.trace) opts_.trace(iter, pcost, dcost, pres, dres, relgap);

        const double score = std::max({pres, dres, relgap});
        if (score < best_score) {
            best_score = score;
            bx = x; bs = s; by = y; btau = tau;
        }

        if (pres <= opts_.feas_tol && dres <= opts_.feas_tol && relgap <= opts_.gap_tol) {
            res.status = ConicStatus::Optimal;
            res.x = x / tau; res.y = y / tau; res.s = s / tau;
            res.primal_objective = pcost;
            res.dual_objective = dcost;
            res.primal_residual = pres;
            res.dual_residual = dres;
            res.duality_gap = relgap;
            return res;
        }

        // infeasibility certificates
        const double by_val = prob_.b.dot(y);
        if (by_val > 0.0) {
            const double hom_dres = (prob_.A.transpose() * y + s).lpNorm<Eigen::Infinity>();
            if (hom_dres / by_val <= opts_.infeas_tol) {
                res.status = ConicStatus::PrimalInfeasible;
                res.y = y / by_val;
                res.s = s / by_val;
                res.x = Vec::Zero(n_);
                return res;
            }
        }
        const double cx_val = prob_.c.dot(x);
        if (cx_val < 0.0) {
            const double hom_pres = (prob_.A * x).lpNorm<Eigen::Infinity>();
            if (hom_pres / (-cx_val) <= opts_.infeas_tol) {
                res.status = ConicStatus::DualInfeasible;
                res.x = x / (-cx_val);
                res.y = Vec::Zero(m_);
                res.s = Vec::Zero(n_);
                return res;
            }
        }

        if (iter == opts_.max_iterations) break;

        Scaling sc;
        if (!compute_scaling(x, s, sc)) break;

        // scaled constraint matrix B = A W^T and normal matrix G = B B'
        Mat B(m_, n_);
        for (int l = 0; l < m_; ++l) {
            for (size_t i = 0; i < lay_.blocks.size(); ++i) {
                const BlockLayout& blk = lay_.blocks[i];
                Mat V = sc.sym[i].R.transpose() * row_mats_[l][i] * sc.sym[i].R;
                Vec seg(blk.len);
                svec_into(V, seg);
                B.row(l).segment(blk.offset, blk.len) = seg;
            }
            if (lay_.lin_len > 0)
                B.row(l).segment(lay_.lin_offset, lay_.lin_len) =
                    prob_.A.row(l)
                        .segment(lay_.lin_offset, lay_.lin_len)
                        .cwiseProduct(sc.w_lin.transpose());
        }
        Mat G = Mat::Zero(m_, m_);
        G.selfadjointView<Eigen::Lower>().rankUpdate(B);
        G = G.selfadjointView<Eigen::Lower>();
        Eigen::LLT<Mat> G_llt(G);
        if (G_llt.info() != Eigen::Success) {
            // tiny diagonal lift for redundant rows
            double shift = 1e-14 * (G.trace() / m_ + 1.0);
            bool ok = false;
            for (int t = 0; t < 6 && !ok; ++t, shift *= 100.0) {
                G_llt.compute(G + shift * Mat::Identity(m_, m_));
                ok = G_llt.info() == Eigen::Success;
            }
            if (!ok) break;
        }

        const Vec Wc = apply_W(sc, prob_.c);
        const Vec u_gc = G_llt.solve(B * Wc + prob_.b);

        const Vec rp = prob_.A * x - prob_.b * tau;
        const Vec rd = -(prob_.A.transpose() * y) + prob_.c * tau - s;
        const double rg = kappa + prob_.c.dot(x) - prob_.b.dot(y);
        const double mu = (x.dot(s) + tau * kappa) / (deg + 1);

        // predictor: full residual reduction, affine complementarity target
        Vec lam_sq(n_);
        {
            int k = 0;
            for (size_t i = 0; i < lay_.blocks.size(); ++i) {
                const BlockLayout& blk = lay_.blocks[i];
                Mat D = Mat::Zero(blk.dim, blk.dim);
                D.diagonal() = sc.sym[i].lambda.cwiseProduct(sc.sym[i].lambda);
                svec_into(D, lam_sq.segment(blk.offset, blk.len));
                k += blk.len;
            }
            if (lay_.lin_len > 0)
                lam_sq.segment(lay_.lin_offset, lay_.lin_len) =
                    sc.lambda_lin.cwiseProduct(sc.lambda_lin);
        }

        Direction aff = solve_newton(sc, G_llt, u_gc, Wc, B, tau, kappa, -rp, -rd,
                                     -rg, -lam_sq, -tau * kappa);

        const Vec aff_dx_scaled = apply_WinvT(sc, aff.dx);
        const Vec aff_ds_scaled = apply_W(sc, aff.ds);
        double alpha_aff = std::min(
            {1.0, max_step(sc, aff_dx_scaled), max_step(sc, aff_ds_scaled)});
        if (aff.dtau < 0.0) alpha_aff = std::min(alpha_aff, -tau / aff.dtau);
        if (aff.dkappa < 0.0) alpha_aff = std::min(alpha_aff, -kappa / aff.dkappa);

        const double sigma = std::pow(1.0 - alpha_aff, 3);

        // corrector: centering plus Mehrotra second-order term
        Vec ds_rhs(n_);
        for (size_t i = 0; i < lay_.blocks.size(); ++i) {
            const BlockLayout& blk = lay_.blocks[i];
            Mat U(blk.dim, blk.dim), V(blk.dim, blk.dim);
            sym_into(aff_dx_scaled.segment(blk.offset, blk.len), U);
            sym_into(aff_ds_scaled.segment(blk.offset, blk.len), V);
            Mat corr = 0.5 * (U * V + V * U);
            Mat D = -corr;
            D.diagonal().array() +=
                sigma * mu -
                sc.sym[i].lambda.cwiseProduct(sc.sym[i].lambda).array();
            svec_into(D, ds_rhs.segment(blk.offset, blk.len));
        }
        if (lay_.lin_len > 0) {
            ds_rhs.segment(lay_.lin_offset, lay_.lin_len) =
                (-sc.lambda_lin.cwiseProduct(sc.lambda_lin) -
                 aff_dx_scaled.segment(lay_.lin_offset, lay_.lin_len)
                     .cwiseProduct(aff_ds_scaled.segment(lay_.lin_offset, lay_.lin_len)))
                    .array() +
                sigma * mu;
        }
        const double dkappa_rhs = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const double eta = 1.0 - sigma;

        Direction dir = solve_newton(sc, G_llt, u_gc, Wc, B, tau, kappa,
                                     -eta * rp, -eta * rd, -eta * rg, ds_rhs,
                                     dkappa_rhs);

        const Vec dx_scaled = apply_WinvT(sc, dir.dx);
        const Vec ds_scaled = apply_W(sc, dir.ds);
        double alpha = std::min(
            {1.0 / opts_.step_scale, max_step(sc, dx_scaled), max_step(sc, ds_scaled)});
        if (dir.dtau < 0.0) alpha = std::min(alpha, -tau / dir.dtau);
        if (dir.dkappa < 0.0) alpha = std::min(alpha, -kappa / dir.dkappa);
        alpha *= opts_.step_scale;

        if (alpha < 1e-8) {
            if (++small_steps >= 3) break;
        } else {
            small_steps = 0;
        }

        x += alpha * dir.dx;
        y += alpha * dir.dy;
        s += alpha * dir.ds;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }

    // no certificate reached: report the best iterate seen
    x = bx; s = bs; y = by; tau = btau;
    double pres, dres, relgap, pcost, dcost;
    metrics(pres, dres, relgap, pcost, dcost);
    res.status = res.iterations >= opts_.max_iterations
                     ? ConicStatus::IterationLimit
                     : ConicStatus::NumericalLimit;
    res.x = x / tau; res.y = y / tau; res.s = s / tau;
    res.primal_objective = pcost;
    res.dual_objective = dcost;
    res.primal_residual = pres;
    res.dual_residual = dres;
    res.duality_gap = relgap;
    return res;
}

}  // namespace

Vec sym_to_svec(const Mat& S) {
    Vec v(S.rows() * (S.rows() + 1) / 2);
    svec_into(S, v);
    return v;
}

Mat svec_to_sym(const Vec& v, int d) {
    Mat S(d, d);
    sym_into(v, S);
    return S;
}

ConicResult solve_conic(const ConicProblem& problem, const ConicOptions& opts) {
    Solver solver(problem, opts);
    return solver.run();
}

}  // namespace grbf
