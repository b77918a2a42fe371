// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_OSTBC_HPP
#define GRBF_OSTBC_HPP

#include <vector>

#include "grbf/types.hpp"

namespace grbf {

/// Full-rate real-valued orthogonal space-time block code of dimension
/// K in {1,2,4,8}. The code block for a symbol vector u is
///   X(u) = sum_k u_k C_k
/// where each coefficient matrix C_k is a signed permutation matrix and
/// X'(u) X(u) = ||u||^2 I for every real u.
class OstbcCode {
  public:
    /// Builds the code of dimension K; rejects K not in {1,2,4,8}.
    static OstbcCode build(int K);

    int dimension() const { return K_; }

    /// Coefficient matrices C_1..C_K.
    const std::vector<Mat>& coeffs() const { return coeffs_; }

    /// Code block X(u) for a complex symbol vector of length K.
    CMat encode(const CVec& u) const;

    /// Real-argument specialization of encode().
    Mat encode_real(const Vec& u) const;

    /// Symbol estimate (1/||g||^2) X^H(g) y_tilde for a real nonzero
    /// virtual channel g and the sign-adjusted receive vector y_tilde.
    CVec equalize(const Vec& g, const CVec& y_tilde) const;

  private:
    OstbcCode(int K, std::vector<Mat> coeffs, std::vector<int> idx,
              std::vector<double> sign);

    int K_ = 0;
    std::vector<Mat> coeffs_;
    // entry (r,c) of X(u) is sign_[r*K+c] * u[idx_[r*K+c]]
    std::vector<int> idx_;
    std::vector<double> sign_;
};

OstbcCode build_code(int K);
CMat encode(const OstbcCode& code, const CVec& u);
CVec equalize(const OstbcCode& code, const Vec& g, const CVec& y_tilde);

}  // namespace grbf

#endif
