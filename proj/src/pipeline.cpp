// SPDX-License-Identifier: Apache-2.0
#include "grbf/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "grbf/randomize.hpp"

namespace grbf {

using nlohmann::json;

int select_code_dimension(const std::vector<int>& ranks) {
    int max_rank = 1;
    for (int r : ranks) max_rank = std::max(max_rank, r);
    for (int k : {1, 2, 4, 8})
        if (k >= max_rank) return k;
    throw std::domain_error("randomization required: rank exceeds 8");
}

int max_constraints_for(int K) {
    if (K != 1 && K != 2 && K != 4 && K != 8)
        throw std::invalid_argument("invalid code dimension");
    return (K + 1) * (K + 1) - 2;
}

std::vector<CMat> extract_beamformers(const std::vector<CMat>& X, int K,
                                      double rank_threshold) {
    RankReductionState st = factorize(X, rank_threshold);
    std::vector<CMat> W;
    W.reserve(X.size());
    for (const CMat& q : st.Q) {
        if (q.cols() > K)
            throw std::invalid_argument("extract_beamformers: rank exceeds code dimension");
        CMat w = CMat::Zero(q.rows(), K);
        w.leftCols(q.cols()) = q;
        W.push_back(std::move(w));
    }
    return W;
}

std::vector<CMat> phase_rotate(std::vector<CMat> W,
                               const std::vector<CVec>& channels) {
    if (W.size() != channels.size())
        throw std::invalid_argument("phase_rotate: dimension mismatch");
    for (size_t i = 0; i < W.size(); ++i) {
        const CVec g = W[i].adjoint() * channels[i];
        for (int k = 0; k < W[i].cols(); ++k) {
            const double phi = std::arg(g[k]);
            W[i].col(k) *= Complex(std::cos(phi), std::sin(phi));
        }
    }
    return W;
}

PipelineOutcome solve_downlink(const Scenario& scenario,
                               const PipelineOptions& options) {
    scenario.validate();
    if (options.max_code_dim != 1 && options.max_code_dim != 2 &&
        options.max_code_dim != 4 && options.max_code_dim != 8)
        throw std::invalid_argument("solve_downlink: max_code_dim must be 1, 2, 4 or 8");

    PipelineOutcome out;
    const SdpProblem problem = assemble(scenario);
    const SdrOutcome sdr = solve(problem, options.sdr_tol);
    out.solution.sdr_iterations = sdr.iterations;

    if (sdr.status == SdrStatus::Infeasible) {
        out.status = PipelineStatus::Infeasible;
        return out;
    }
    if (sdr.status == SdrStatus::Unbounded)
        throw std::runtime_error("solve_downlink: SDR reported unbounded (invalid problem data)");
    if (sdr.status == SdrStatus::MaxIterations) {
        // accept mildly unconverged solutions, refuse garbage
        if (sdr.kkt.max_primal_residual > 1e-6 || sdr.kkt.duality_gap > 1e-5)
            throw std::runtime_error("solve_downlink: SDR solver did not converge");
    }

    const double rank_threshold = options.rank_reduction.rank_threshold;
    std::vector<CMat> X = sdr.primal.X;
    for (const CMat& x : X)
        out.solution.initial_ranks.push_back(numerical_rank(x, rank_threshold));

    bool any_high = false;
    for (int r : out.solution.initial_ranks) any_high = any_high || r > 1;
    if (any_high) {
        std::vector<RankReductionTraceRecord> trace;
        X = rank_reduce(X, problem.rows, options.rank_reduction, &trace);
        out.solution.reduction_iterations = static_cast<int>(trace.size());
    }
    for (const CMat& x : X)
        out.solution.reduced_ranks.push_back(numerical_rank(x, rank_threshold));

    int max_rank = 1;
    for (int r : out.solution.reduced_ranks) max_rank = std::max(max_rank, r);

    if (max_rank <= options.max_code_dim) {
        int K = select_code_dimension(out.solution.reduced_ranks);
        K = std::min(K, options.max_code_dim);
        out.solution.W = extract_beamformers(X, K, rank_threshold);
        out.solution.code_dim = K;
        out.solution.exact = true;
    } else {
        Rng rng(options.seed);
        const auto cand = randomization_search(X, problem.rows, options.n_rand,
                                               rng, options.max_code_dim);
        if (!cand) {
            out.status = PipelineStatus::RandomizationFailed;
            return out;
        }
        out.solution.W.clear();
        for (size_t m = 0; m < cand->W_bar.size(); ++m)
            out.solution.W.push_back(std::sqrt(cand->p[m]) * cand->W_bar[m]);
        out.solution.code_dim = options.max_code_dim;
        out.solution.exact = false;
    }

    std::vector<CVec> channels;
    for (const User& u : scenario.users) channels.push_back(u.channel);
    out.solution.W = phase_rotate(std::move(out.solution.W), channels);

    out.solution.total_power = 0.0;
    for (const CMat& w : out.solution.W)
        out.solution.total_power += (w * w.adjoint()).trace().real();
    out.solution.sdr_objective = sdr.primal.objective;
    out.solution.kkt = sdr.kkt;

    const int M = scenario.num_users();
    out.solution.sinr.resize(M);
    for (int i = 0; i < M; ++i) {
        const CVec& h = scenario.users[i].channel;
        double interference = 0.0;
        for (int m = 0; m < M; ++m)
            if (m != i) interference += (out.solution.W[m].adjoint() * h).squaredNorm();
        out.solution.sinr[i] = (out.solution.W[i].adjoint() * h).squaredNorm() /
                               (interference + scenario.users[i].noise_power);
    }

    out.status = PipelineStatus::Ok;
    return out;
}

namespace {

json cmat_to_json(const CMat& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            arr.push_back(m(r, c).real());
            arr.push_back(m(r, c).imag());
        }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(arr)}};
}

CMat cmat_from_json(const json& j) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto& data = j.at("data");
    if (data.size() != static_cast<size_t>(2 * rows * cols))
        throw std::invalid_argument("solution file: matrix payload size mismatch");
    CMat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const size_t k = 2 * (static_cast<size_t>(r) * cols + c);
            m(r, c) = Complex(data[k].get<double>(), data[k + 1].get<double>());
        }
    return m;
}

}  // namespace

void save_solution(const BeamformingSolution& solution, const std::string& path) {
    json root;
    root["code_dim"] = solution.code_dim;
    root["total_power"] = solution.total_power;
    root["exact"] = solution.exact;
    root["W"] = json::array();
    for (const CMat& w : solution.W) root["W"].push_back(cmat_to_json(w));
    root["diagnostics"] = {
        {"initial_ranks", solution.initial_ranks},
        {"reduced_ranks", solution.reduced_ranks},
        {"sdr_iterations", solution.sdr_iterations},
        {"reduction_iterations", solution.reduction_iterations},
        {"sdr_objective", solution.sdr_objective},
        {"max_primal_residual", solution.kkt.max_primal_residual},
        {"duality_gap", solution.kkt.duality_gap},
        {"sinr", solution.sinr},
    };
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write solution file: " + path);
    out << root.dump(2) << "\n";
}

BeamformingSolution load_solution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open solution file: " + path);
    json root = json::parse(in);
    BeamformingSolution s;
    s.code_dim = root.at("code_dim").get<int>();
    s.total_power = root.at("total_power").get<double>();
    s.exact = root.at("exact").get<bool>();
    for (const auto& jw : root.at("W")) s.W.push_back(cmat_from_json(jw));
    if (root.contains("diagnostics")) {
        const auto& d = root["diagnostics"];
        if (d.contains("initial_ranks"))
            s.initial_ranks = d["initial_ranks"].get<std::vector<int>>();
        if (d.contains("reduced_ranks"))
            s.reduced_ranks = d["reduced_ranks"].get<std::vector<int>>();
        if (d.contains("sdr_iterations")) s.sdr_iterations = d["sdr_iterations"].get<int>();
        if (d.contains("reduction_iterations"))
            s.reduction_iterations = d["reduction_iterations"].get<int>();
        if (d.contains("sdr_objective")) s.sdr_objective = d["sdr_objective"].get<double>();
        if (d.contains("sinr")) s.sinr = d["sinr"].get<std::vector<double>>();
    }
    return s;
}

}  // namespace grbf
