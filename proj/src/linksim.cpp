// SPDX-License-Identifier: Apache-2.0
#include "grbf/linksim.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace grbf {

CVec transmit_block(const OstbcCode& code, const std::vector<CMat>& W,
                    const CMat& symbols, const CVec& h_i, const CVec& noise_i) {
    const int K = code.dimension();
    const int M = static_cast<int>(W.size());
    if (symbols.rows() != M || symbols.cols() != K)
        throw std::invalid_argument("transmit_block: symbols must be M x K");
    if (noise_i.size() != K)
        throw std::invalid_argument("transmit_block: noise must have K entries");
    CVec y = noise_i;
    for (int m = 0; m < M; ++m) {
        if (W[m].cols() != K)
            throw std::invalid_argument("transmit_block: beamformer column mismatch");
        const CVec g = W[m].adjoint() * h_i;
        y += code.encode(symbols.row(m).transpose()) * g;
    }
    return y;
}

CVec sign_adjust(const CVec& y) {
    CVec t = -y;
    t[0] = y[0];
    return t;
}

double theoretical_sinr(const std::vector<CMat>& W, int i, const CVec& h_i,
                        double noise_power) {
    double interference = 0.0;
    for (size_t m = 0; m < W.size(); ++m)
        if (static_cast<int>(m) != i) interference += (W[m].adjoint() * h_i).squaredNorm();
    return (W[i].adjoint() * h_i).squaredNorm() / (interference + noise_power);
}

Complex draw_qam4(Rng& rng) {
    const double s = 1.0 / std::sqrt(2.0);
    const double re = rng.uniform() < 0.5 ? -s : s;
    const double im = rng.uniform() < 0.5 ? -s : s;
    return Complex(re, im);
}

Complex nearest_qam4(Complex z) {
    const double s = 1.0 / std::sqrt(2.0);
    return Complex(z.real() >= 0.0 ? s : -s, z.imag() >= 0.0 ? s : -s);
}

std::vector<UserLinkStats> run_link(const LinkRunConfig& config,
                                    const std::vector<CMat>& W,
                                    const Scenario& scenario) {
    scenario.validate();
    const int M = scenario.num_users();
    if (static_cast<int>(W.size()) != M)
        throw std::invalid_argument("run_link: one beamformer per user required");
    const int K = static_cast<int>(W[0].cols());
    const OstbcCode code = build_code(K);
    const int B = config.blocks;

    std::vector<UserLinkStats> stats(M);
    for (int i = 0; i < M; ++i) {
        const CVec& h = scenario.users[i].channel;
        const double s2 = scenario.users[i].noise_power;

        const CVec g_c = W[i].adjoint() * h;
        const double gnorm = g_c.norm();
        if (gnorm == 0.0) throw std::invalid_argument("run_link: zero virtual channel");
        if (g_c.imag().cwiseAbs().maxCoeff() > 1e-9 * gnorm)
            throw std::invalid_argument("run_link: virtual channel is not real; rotate first");
        const Vec g = g_c.real();

        // cross channels (complex in general)
        std::vector<CVec> cross(M);
        for (int m = 0; m < M; ++m) cross[m] = W[m].adjoint() * h;

        Rng rng = Rng(config.seed).fork(static_cast<std::uint64_t>(i));

        Vec err_sum = Vec::Zero(K), err_sq = Vec::Zero(K);
        CMat noise_cov = CMat::Zero(K, K), intf_cov = CMat::Zero(K, K);
        Vec power_sum = Vec::Zero(K), power_sq = Vec::Zero(K);
        long symbol_errors = 0;
        const double noise_scale = std::sqrt(s2);

        for (int blk = 0; blk < B; ++blk) {
            CMat symbols(M, K);
            for (int m = 0; m < M; ++m)
                for (int k = 0; k < K; ++k) symbols(m, k) = draw_qam4(rng);
            CVec noise(K);
            for (int k = 0; k < K; ++k) noise[k] = noise_scale * rng.cgauss();

            // desired + interference + noise, then the sign adjustment
            const CVec s_i = symbols.row(i).transpose();
            CVec intf = CVec::Zero(K);
            for (int m = 0; m < M; ++m)
                if (m != i) intf += code.encode(symbols.row(m).transpose()) * cross[m];
            const CVec y = code.encode(s_i) * g_c + intf + noise;

            const CVec s_hat = code.equalize(g, sign_adjust(y));
            const CVec err = s_hat - s_i;

            const Mat xg_t = code.encode_real(g).transpose();
            const CVec e_noise = (xg_t * sign_adjust(noise)) / g.squaredNorm();
            const CVec e_intf = (xg_t * sign_adjust(intf)) / g.squaredNorm();

            for (int k = 0; k < K; ++k) {
                const double e2 = std::norm(err[k]);
                err_sum[k] += e2;
                err_sq[k] += e2 * e2;
                if (nearest_qam4(s_hat[k]) != s_i[k]) ++symbol_errors;
            }
            noise_cov += e_noise * e_noise.adjoint();
            intf_cov += e_intf * e_intf.adjoint();

            // per-slot transmitted power toward this user
            const CMat blk_i = code.encode(s_i);
            for (int k = 0; k < K; ++k) {
                const double p = (W[i] * blk_i.row(k).adjoint()).squaredNorm();
                power_sum[k] += p;
                power_sq[k] += p * p;
            }
        }

        UserLinkStats& st = stats[i];
        st.user = i;
        st.blocks = B;
        st.theoretical_sinr = theoretical_sinr(W, i, h, s2);
        st.slot_error_power = err_sum / B;
        st.slot_error_power_se = Vec(K);
        for (int k = 0; k < K; ++k) {
            const double mean = st.slot_error_power[k];
            const double var = std::max(0.0, err_sq[k] / B - mean * mean);
            st.slot_error_power_se[k] = std::sqrt(var / B);
        }
        const double mean_err = st.slot_error_power.mean();
        st.no_interference = mean_err < 1e-12;
        st.empirical_sinr = st.no_interference
                                ? std::numeric_limits<double>::infinity()
                                : 1.0 / mean_err;
        st.noise_covariance = noise_cov / B;
        st.interference_covariance = intf_cov / B;
        st.slot_noise_power = st.noise_covariance.diagonal().real();
        st.slot_interference_power = st.interference_covariance.diagonal().real();
        st.power_analytic = (W[i] * W[i].adjoint()).trace().real();
        st.slot_power_empirical = power_sum / B;
        st.slot_power_se = Vec(K);
        for (int k = 0; k < K; ++k) {
            const double mean = st.slot_power_empirical[k];
            const double var = std::max(0.0, power_sq[k] / B - mean * mean);
            st.slot_power_se[k] = std::sqrt(var / B);
        }
        st.power_empirical = st.slot_power_empirical.mean();
        st.ser = static_cast<double>(symbol_errors) / (static_cast<double>(B) * K);
    }
    return stats;
}

SlotPowerEstimate per_slot_power(const OstbcCode& code, const CMat& W_i,
                                 Rng& rng, int blocks) {
    const int K = code.dimension();
    if (W_i.cols() != K)
        throw std::invalid_argument("per_slot_power: beamformer column mismatch");
    Vec sum = Vec::Zero(K), sq = Vec::Zero(K);
    for (int b = 0; b < blocks; ++b) {
        CVec s(K);
        for (int k = 0; k < K; ++k) s[k] = draw_qam4(rng);
        const CMat blk = code.encode(s);
        for (int k = 0; k < K; ++k) {
            const double p = (W_i * blk.row(k).adjoint()).squaredNorm();
            sum[k] += p;
            sq[k] += p * p;
        }
    }
    SlotPowerEstimate est;
    est.per_slot = sum / blocks;
    est.per_slot_se = Vec(K);
    for (int k = 0; k < K; ++k) {
        const double mean = est.per_slot[k];
        const double var = std::max(0.0, sq[k] / blocks - mean * mean);
        est.per_slot_se[k] = std::sqrt(var / blocks);
    }
    est.mean = est.per_slot.mean();
    return est;
}

void write_link_csv(const std::vector<UserLinkStats>& stats,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write link csv: " + path);
    out << "user,blocks,empirical_sinr_db,theoretical_sinr_db,"
           "power_analytic,power_empirical,ser\n";
    out.precision(10);
    for (const UserLinkStats& st : stats) {
        out << st.user << "," << st.blocks << "," << lin2db(st.empirical_sinr)
            << "," << lin2db(st.theoretical_sinr) << "," << st.power_analytic
            << "," << st.power_empirical << "," << st.ser << "\n";
    }
}

}  // namespace grbf
