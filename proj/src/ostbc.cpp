// SPDX-License-Identifier: Apache-2.0
#include "grbf/ostbc.hpp"

#include <stdexcept>
#include <string>

namespace grbf {

namespace {

// Signed-permutation tables of the printed code matrices. Entry (r,c)
// holds 1-based symbol index, negative when the symbol enters with a
// minus sign. Row r of X(u) is then [sgn * u_{|v|-1}].
constexpr int kTable2[2][2] = {
    {+1, +2},
    {-2, +1},
};

constexpr int kTable4[4][4] = {
    {+1, +2, +3, +4},
    {-2, +1, -4, +3},
    {-3, +4, +1, -2},
    {-4, -3, +2, +1},
};

constexpr int kTable8[8][8] = {
    {+1, +2, +3, +4, +5, +6, +7, +8},
    {-2, +1, +4, -3, +6, -5, -8, +7},
    {-3, -4, +1, +2, +7, +8, -5, -6},
    {-4, +3, -2, +1, +8, -7, +6, -5},
    {-5, -6, -7, -8, +1, +2, +3, +4},
    {-6, +5, -8, +7, -2, +1, -4, +3},
    {-7, +8, +5, -6, -3, +4, +1, -2},
    {-8, -7, +6, +5, -4, -3, +2, +1},
};

const int* table_row(int K, int r) {
    switch (K) {
        case 2: return kTable2[r];
        case 4: return kTable4[r];
        case 8: return kTable8[r];
        default: return nullptr;
    }
}

}  // namespace

OstbcCode::OstbcCode(int K, std::vector<Mat> coeffs, std::vector<int> idx,
                     std::vector<double> sign)
    : K_(K), coeffs_(std::move(coeffs)), idx_(std::move(idx)),
      sign_(std::move(sign)) {}

OstbcCode OstbcCode::build(int K) {
    if (K != 1 && K != 2 && K != 4 && K != 8) {
        throw std::invalid_argument("unsupported code dimension " +
                                    std::to_string(K) +
                                    " (must be 1, 2, 4 or 8)");
    }

    std::vector<int> idx(static_cast<size_t>(K) * K, 0);
    std::vector<double> sign(static_cast<size_t>(K) * K, 1.0);
    if (K == 1) {
        idx[0] = 0;
        sign[0] = 1.0;
    } else {
        for (int r = 0; r < K; ++r) {
            const int* row = table_row(K, r);
            for (int c = 0; c < K; ++c) {
                idx[r * K + c] = std::abs(row[c]) - 1;
                sign[r * K + c] = row[c] > 0 ? 1.0 : -1.0;
            }
        }
    }

    std::vector<Mat> coeffs(K, Mat::Zero(K, K));
    for (int r = 0; r < K; ++r)
        for (int c = 0; c < K; ++c)
            coeffs[idx[r * K + c]](r, c) = sign[r * K + c];

    return OstbcCode(K, std::move(coeffs), std::move(idx), std::move(sign));
}

CMat OstbcCode::encode(const CVec& u) const {
    if (u.size() != K_)
        throw std::invalid_argument("symbol vector length does not match code dimension");
    CMat block(K_, K_);
    for (int r = 0; r < K_; ++r)
        for (int c = 0; c < K_; ++c)
            block(r, c) = sign_[r * K_ + c] * u[idx_[r * K_ + c]];
    return block;
}

Mat OstbcCode::encode_real(const Vec& u) const {
    if (u.size() != K_)
        throw std::invalid_argument("symbol vector length does not match code dimension");
    Mat block(K_, K_);
    for (int r = 0; r < K_; ++r)
        for (int c = 0; c < K_; ++c)
            block(r, c) = sign_[r * K_ + c] * u[idx_[r * K_ + c]];
    return block;
}

CVec OstbcCode::equalize(const Vec& g, const CVec& y_tilde) const {
    if (g.size() != K_ || y_tilde.size() != K_)
        throw std::invalid_argument("equalize: dimension mismatch");
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) throw std::invalid_argument("zero virtual channel");
    // X(g) is real, so X^H = X^T
    return (encode_real(g).transpose() * y_tilde) / g2;
}

OstbcCode build_code(int K) { return OstbcCode::build(K); }

CMat encode(const OstbcCode& code, const CVec& u) { return code.encode(u); }

CVec equalize(const OstbcCode& code, const Vec& g, const CVec& y_tilde) {
    return code.equalize(g, y_tilde);
}

}  // namespace grbf
