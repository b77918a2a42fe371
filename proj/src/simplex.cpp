// SPDX-License-Identifier: Apache-2.0
#include "grbf/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace grbf {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
    Mat t;                   // rows x (cols + 1), last column is rhs
    Vec obj;                 // reduced-cost row, size cols + 1
    std::vector<int> basis;  // basic column per row
    int rows = 0, cols = 0;

    double& rhs(int i) { return t(i, cols); }

    void pivot(int pr, int pc) {
        t.row(pr) /= t(pr, pc);
        for (int i = 0; i < rows; ++i) {
            if (i == pr) continue;
            const double f = t(i, pc);
            if (f != 0.0) t.row(i) -= f * t.row(pr);
        }
        const double f = obj[pc];
        if (f != 0.0) obj -= f * t.row(pr).transpose();
        basis[pr] = pc;
    }

    // Bland: entering = smallest index with negative reduced cost;
    // leaving = smallest ratio, ties broken by smallest basic index.
    // Returns 0 on optimal, 1 on unbounded.
    int iterate(const std::vector<bool>& allowed) {
        while (true) {
            int enter = -1;
            for (int j = 0; j < cols; ++j) {
                if (!allowed[j]) continue;
                if (obj[j] < -kEps) { enter = j; break; }
            }
            if (enter < 0) return 0;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < rows; ++i) {
                if (t(i, enter) > kEps) {
                    const double ratio = rhs(i) / t(i, enter);
                    if (leave < 0 || ratio < best - kEps ||
                        (std::abs(ratio - best) <= kEps && basis[i] < basis[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return 1;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
    const int m = static_cast<int>(problem.A.rows());
    const int n = static_cast<int>(problem.A.cols());
    if (problem.b.size() != m || static_cast<int>(problem.senses.size()) != m ||
        problem.c.size() != n)
        throw std::invalid_argument("lp: inconsistent dimensions");

    // normalize rows so the pivot tolerance is meaningful across scales
    Mat A = problem.A;
    Vec b = problem.b;
    std::vector<Sense> senses = problem.senses;
    for (int i = 0; i < m; ++i) {
        const double s = std::max({1.0, A.row(i).cwiseAbs().maxCoeff(), std::abs(b[i])});
        A.row(i) /= s;
        b[i] /= s;
        if (b[i] < 0.0) {
            A.row(i) = -A.row(i);
            b[i] = -b[i];
            if (senses[i] == Sense::Geq) senses[i] = Sense::Leq;
            else if (senses[i] == Sense::Leq) senses[i] = Sense::Geq;
        }
    }

    int n_slack = 0;
    for (Sense s : senses)
        if (s != Sense::Eq) ++n_slack;

    // artificials for >= and = rows (their slack, if any, enters negatively)
    int n_art = 0;
    for (Sense s : senses)
        if (s != Sense::Leq) ++n_art;

    Tableau tab;
    tab.rows = m;
    tab.cols = n + n_slack + n_art;
    tab.t = Mat::Zero(m, tab.cols + 1);
    tab.basis.assign(m, -1);

    int slack_at = n, art_at = n + n_slack;
    for (int i = 0; i < m; ++i) {
        tab.t.row(i).head(n) = A.row(i);
        tab.rhs(i) = b[i];
        if (senses[i] == Sense::Leq) {
            tab.t(i, slack_at) = 1.0;
            tab.basis[i] = slack_at++;
        } else if (senses[i] == Sense::Geq) {
            tab.t(i, slack_at++) = -1.0;
            tab.t(i, art_at) = 1.0;
            tab.basis[i] = art_at++;
        } else {
            tab.t(i, art_at) = 1.0;
            tab.basis[i] = art_at++;
        }
    }

    LpResult res;

    // phase 1: minimize the artificial sum
    tab.obj = Vec::Zero(tab.cols + 1);
    for (int j = n + n_slack; j < tab.cols; ++j) tab.obj[j] = 1.0;
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] >= n + n_slack) tab.obj -= tab.t.row(i).transpose();

    std::vector<bool> allowed(tab.cols, true);
    if (tab.iterate(allowed) != 0)
        throw std::runtime_error("lp: phase 1 unbounded (internal error)");
    if (-tab.obj[tab.cols] > 1e-7) {
        res.status = LpStatus::Infeasible;
        return res;
    }

    // pivot remaining artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n + n_slack) continue;
        int enter = -1;
        for (int j = 0; j < n + n_slack; ++j)
            if (std::abs(tab.t(i, j)) > kEps) { enter = j; break; }
        if (enter >= 0) tab.pivot(i, enter);
        // else: redundant row; the artificial stays basic at level zero
    }

    // phase 2 with the true costs; artificial columns are barred
    for (int j = n + n_slack; j < tab.cols; ++j) allowed[j] = false;
    tab.obj = Vec::Zero(tab.cols + 1);
    tab.obj.head(n) = problem.c;
    for (int i = 0; i < m; ++i) {
        const int j = tab.basis[i];
        if (j < tab.cols && tab.obj[j] != 0.0)
            tab.obj -= tab.obj[j] * tab.t.row(i).transpose();
    }
    if (tab.iterate(allowed) != 0) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    res.x = Vec::Zero(n);
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.rhs(i);
    for (int i = 0; i < n; ++i) res.x[i] = std::max(0.0, res.x[i]);
    res.objective = problem.c.dot(res.x);
    res.status = LpStatus::Optimal;
    return res;
}

}  // namespace grbf
