// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <span>
#include <vector>

#include <Eigen/SVD>

#include "wice/types.hpp"

namespace wice {

/// Rows of the K-point DFT matrix at the given subcarriers, first L columns:
/// F(r, n) = exp(-j 2 pi s_r n / K).
inline CMatrix dft_slice(std::span<const int> subcarriers, int K, int L)
{
    CMatrix F(static_cast<Eigen::Index>(subcarriers.size()), L);
    for (std::size_t r = 0; r < subcarriers.size(); ++r) {
        for (int n = 0; n < L; ++n) {
            F(static_cast<Eigen::Index>(r), n) = std::polar(1.0, -2.0 * pi * subcarriers[r] * n / K);
        }
    }
    return F;
}

/// (F^H F)^{-1} F^H for a full-column-rank F.
inline CMatrix pseudo_inverse(const CMatrix& F)
{
    const CMatrix gram = F.adjoint() * F;
    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw Error("DFT slice is rank deficient");
    }
    return llt.solve(F.adjoint());
}

inline double condition_number(const CMatrix& A)
{
    Eigen::JacobiSVD<CMatrix> svd(A);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / s(s.size() - 1);
}

inline constexpr double max_lp_condition = 1e8;

/// Truncated-DFT operators for the L-tap subspace of the active band.
struct DftMatrices {
    int K = 64;
    int L = 12;
    CMatrix F_on;      // K_on x L
    CMatrix F_on_pinv; // L x K_on
    CMatrix W_als;     // K_on x K_on, F_on F_on^+
    std::vector<int> lp_positions;
    CMatrix F_p;      // L_p x L, empty unless LP positions were given
    CMatrix F_p_pinv; // L x L_p
    CMatrix W_dft;    // K_on x L_p, F_on F_p^+
    double F_p_condition = 0.0;

    /// tr(W W^H) of the ALS and LP interpolators.
    [[nodiscard]] double als_trace() const { return W_als.squaredNorm(); }
    [[nodiscard]] double dft_trace() const { return W_dft.squaredNorm(); }
};

/// `subcarriers` are the active subcarrier numbers in band order;
/// `lp_positions` index into that band and may be empty.
inline DftMatrices make_dft_matrices(std::span<const int> subcarriers, int K, int L,
                                     std::span<const int> lp_positions = {})
{
    if (L < 1 || L > static_cast<int>(subcarriers.size())) {
        throw Error("tap count L must be in 1..K_on");
    }
    DftMatrices d;
    d.K = K;
    d.L = L;
    d.F_on = dft_slice(subcarriers, K, L);
    d.F_on_pinv = pseudo_inverse(d.F_on);
    d.W_als = d.F_on * d.F_on_pinv;
    if (!lp_positions.empty()) {
        d.lp_positions.assign(lp_positions.begin(), lp_positions.end());
        std::vector<int> rows;
        for (int pos : lp_positions) {
            rows.push_back(subcarriers[static_cast<std::size_t>(pos)]);
        }
        d.F_p = dft_slice(rows, K, L);
        d.F_p_condition = condition_number(d.F_p);
        if (!(d.F_p_condition <= max_lp_condition)) {
            throw Error("LP pilot placement gives an ill-conditioned DFT slice");
        }
        d.F_p_pinv = pseudo_inverse(d.F_p);
        d.W_dft = d.F_on * d.F_p_pinv;
    }
    return d;
}

} // namespace wice
