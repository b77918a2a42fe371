// SPDX-License-Identifier: Apache-2.0
#include "grbf/rankred.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace grbf {

namespace {

const double kSqrt2 = std::sqrt(2.0);

int param_count(const RankReductionState& state) {
    int n = 0;
    for (const CMat& q : state.Q) {
        const int k = static_cast<int>(q.cols());
        n += k * k;
    }
    return n;
}

// Column layout per block: scan columns c = 0..K-1; for each r < c a
// sqrt(2) Re pair and a sqrt(2) Im pair, then the diagonal entry (c,c).
CMat unpack_block(const Eigen::Ref<const Vec>& v, int k) {
    CMat d = CMat::Zero(k, k);
    int p = 0;
    for (int c = 0; c < k; ++c) {
        for (int r = 0; r < c; ++r) {
            const double re = v[p++] / kSqrt2;
            const double im = v[p++] / kSqrt2;
            d(r, c) = Complex(re, im);
            d(c, r) = Complex(re, -im);
        }
        d(c, c) = v[p++];
    }
    return d;
}

Vec pack_block_coeffs(const CMat& b) {
    const int k = static_cast<int>(b.rows());
    Vec out(k * k);
    int p = 0;
    for (int c = 0; c < k; ++c) {
        for (int r = 0; r < c; ++r) {
            out[p++] = kSqrt2 * b(r, c).real();
            out[p++] = kSqrt2 * b(r, c).imag();
        }
        out[p++] = b(c, c).real();
    }
    return out;
}

}  // namespace

RankReductionState factorize(const std::vector<CMat>& X, double rank_threshold) {
    RankReductionState state;
    state.X = X;
    state.Q.reserve(X.size());
    for (const CMat& x : X) {
        Eigen::SelfAdjointEigenSolver<CMat> eig(x);
        const Vec ev = eig.eigenvalues();  // ascending
        const double total = ev.sum();
        const int n = static_cast<int>(ev.size());
        int rank = 0;
        for (int i = 0; i < n; ++i)
            if (ev[i] >= rank_threshold * total && ev[i] > 0.0) ++rank;
        CMat q(x.rows(), rank);
        for (int j = 0; j < rank; ++j) {
            const int src = n - 1 - j;  // descending order
            q.col(j) = eig.eigenvectors().col(src) * std::sqrt(ev[src]);
        }
        state.Q.push_back(std::move(q));
    }
    return state;
}

Mat assemble_system(const RankReductionState& state,
                    const std::vector<ShapingConstraint>& constraints) {
    const int rows = static_cast<int>(constraints.size());
    const int cols = param_count(state);
    const int M = static_cast<int>(state.Q.size());
    Mat sys(rows, cols);
    for (int l = 0; l < rows; ++l) {
        int off = 0;
        for (int m = 0; m < M; ++m) {
            const CMat& q = state.Q[m];
            const int k = static_cast<int>(q.cols());
            if (k == 0) continue;
            const CMat b = q.adjoint() * constraints[l].A[m] * q;
            sys.row(l).segment(off, k * k) = pack_block_coeffs(b).transpose();
            off += k * k;
        }
    }
    return sys;
}

std::optional<DeltaSet> find_nontrivial_delta(const Mat& system,
                                              const RankReductionState& state,
                                              double null_threshold) {
    const int rows = static_cast<int>(system.rows());
    const int cols = static_cast<int>(system.cols());
    if (cols == 0) return std::nullopt;

    Vec null_vec;
    Eigen::JacobiSVD<Mat> svd(system, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    if (cols > rows || smax == 0.0) {
        // fat system (or all-zero): the trailing right singular vectors
        // span an honest null space
        null_vec = svd.matrixV().col(cols - 1);
    } else if (sv[sv.size() - 1] < null_threshold * smax) {
        null_vec = svd.matrixV().col(cols - 1);
    } else {
        return std::nullopt;
    }

    // deterministic sign: first component of nonnegligible size positive
    for (int i = 0; i < null_vec.size(); ++i) {
        if (std::abs(null_vec[i]) > 1e-12) {
            if (null_vec[i] < 0.0) null_vec = -null_vec;
            break;
        }
    }

    DeltaSet ds;
    int off = 0;
    for (const CMat& q : state.Q) {
        const int k = static_cast<int>(q.cols());
        ds.delta.push_back(unpack_block(null_vec.segment(off, k * k), k));
        off += k * k;
    }
    return ds;
}

RankReductionState reduction_step(const RankReductionState& state,
                                  const DeltaSet& delta_set,
                                  double rank_threshold) {
    const int M = static_cast<int>(state.Q.size());
    double delta_max = 0.0;
    for (int m = 0; m < M; ++m) {
        if (delta_set.delta[m].rows() == 0) continue;
        Eigen::SelfAdjointEigenSolver<CMat> eig(delta_set.delta[m],
                                                Eigen::EigenvaluesOnly);
        for (double v : eig.eigenvalues())
            if (std::abs(v) > std::abs(delta_max)) delta_max = v;
    }
    if (std::abs(delta_max) < 1e-14)
        throw std::runtime_error("no rank drop: extremal eigenvalue is numerically zero");

    std::vector<CMat> updated(M);
    for (int m = 0; m < M; ++m) {
        const CMat& q = state.Q[m];
        const int k = static_cast<int>(q.cols());
        CMat core = CMat::Identity(k, k) - delta_set.delta[m] / delta_max;
        CMat x = q * core * q.adjoint();
        updated[m] = 0.5 * (x + x.adjoint());
    }
    RankReductionState next = factorize(updated, rank_threshold);
    next.iteration = state.iteration + 1;
    return next;
}

std::vector<CMat> rank_reduce(const std::vector<CMat>& X,
                              const std::vector<ShapingConstraint>& constraints,
                              const RankReductionOptions& opts,
                              std::vector<RankReductionTraceRecord>* trace) {
    const int M = static_cast<int>(X.size());
    const int rows = static_cast<int>(constraints.size());

    RankReductionState state = factorize(X, opts.rank_threshold);
    const int max_iter = std::max(0, state.total_rank() - M);

    double objective0 = 0.0;
    for (const CMat& x : X) objective0 += x.trace().real();
    Vec rows0(rows);
    for (int l = 0; l < rows; ++l) {
        double v = 0.0;
        for (int m = 0; m < M; ++m)
            v += (constraints[l].A[m].cwiseProduct(state.X[m].conjugate())).sum().real();
        rows0[l] = v;
    }

    for (int iter = 0; iter < max_iter; ++iter) {
        int sum_rank_sq = 0;
        for (int k : state.ranks()) sum_rank_sq += k * k;
        if (sum_rank_sq <= rows) break;  // counting bound already met

        const Mat sys = assemble_system(state, constraints);
        const auto delta = find_nontrivial_delta(sys, state, opts.null_threshold);
        if (!delta) break;

        RankReductionState next;
        try {
            next = reduction_step(state, *delta, opts.rank_threshold);
        } catch (const std::runtime_error&) {
            break;
        }

        double objective = 0.0;
        for (const CMat& x : next.X) objective += x.trace().real();
        if (std::abs(objective - objective0) > opts.objective_guard * (1.0 + objective0))
            break;  // direction left the optimal face; keep the last safe point

        double max_drift = 0.0;
        for (int l = 0; l < rows; ++l) {
            double v = 0.0;
            for (int m = 0; m < M; ++m)
                v += (constraints[l].A[m].cwiseProduct(next.X[m].conjugate())).sum().real();
            max_drift = std::max(max_drift,
                                 std::abs(v - rows0[l]) / std::max(1.0, std::abs(constraints[l].b)));
        }

        if (trace) {
            RankReductionTraceRecord rec;
            rec.iteration = next.iteration;
            rec.ranks = next.ranks();
            rec.objective = objective;
            rec.max_row_drift = max_drift;
            double dm = 0.0;
            for (const CMat& d : delta->delta) {
                if (d.rows() == 0) continue;
                Eigen::SelfAdjointEigenSolver<CMat> e(d, Eigen::EigenvaluesOnly);
                for (double v : e.eigenvalues())
                    if (std::abs(v) > std::abs(dm)) dm = v;
            }
            rec.delta_max = dm;
            trace->push_back(std::move(rec));
        }

        state = std::move(next);
    }
    return state.X;
}

}  // namespace grbf
