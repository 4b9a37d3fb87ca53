// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "wice/channel.hpp"
#include "wice/constellation.hpp"
#include "wice/dft.hpp"
#include "wice/frame.hpp"
#include "wice/types.hpp"

namespace wice {

/// Preamble LS: (y1 + y2) / (2 p). Averaging the two LTS halves the noise.
inline CVector ls_preamble(const CVector& y_lts1, const CVector& y_lts2, const RVector& pilots)
{
    if (y_lts1.size() != y_lts2.size() || y_lts1.size() != pilots.size()) {
        throw DimensionError("preamble and pilot sequence lengths differ");
    }
    CVector h(pilots.size());
    for (Eigen::Index k = 0; k < pilots.size(); ++k) {
        if (pilots(k) == 0.0) {
            throw Error("zero preamble value");
        }
        h(k) = (y_lts1(k) + y_lts2(k)) / (2.0 * pilots(k));
    }
    return h;
}

inline CVector ls_preamble(const FrameGrid& rx)
{
    return ls_preamble(rx.preamble.col(0), rx.preamble.col(1), rx.layout->pilot_values);
}

/// LS at every pilot cell of the data region, in FrameLayout::pilot_cells() order.
inline CVector pilot_ls(const FrameGrid& rx)
{
    const auto cells = rx.layout->pilot_cells();
    CVector h(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t n = 0; n < cells.size(); ++n) {
        const auto [k, i] = cells[n];
        h(static_cast<Eigen::Index>(n)) = rx.symbols(k, i) / rx.layout->pilot_values(k);
    }
    return h;
}

/// Preamble LS held over the whole frame.
inline EstimateGrid ls_hold(const FrameGrid& rx)
{
    const CVector h = ls_preamble(rx);
    return {h.replicate(1, rx.spec().I), "ls", {}};
}

// ---------------------------------------------------------------------------
// 2D LMMSE

/// Windowed 2D LMMSE with the exact channel statistics:
/// H = R_hp (R_pp + sigma^2 I)^{-1} h_LS over each window of symbols.
/// Weight matrices are built once per distinct window pilot pattern.
class LmmseInterpolator {
public:
    LmmseInterpolator(const ChannelCorrelation& corr, std::vector<int> subcarriers, int num_symbols,
                      std::vector<Cell> pilots, double sigma2, int window)
        : K_on_(static_cast<int>(subcarriers.size())), I_(num_symbols)
    {
        if (window < 1) {
            throw Error("LMMSE window must be positive");
        }
        std::map<std::vector<Cell>, std::size_t> pattern_index;
        for (int start = 0; start < num_symbols; start += window) {
            Block b;
            b.start = start;
            b.len = std::min(window, num_symbols - start);
            std::vector<Cell> pattern;
            for (std::size_t n = 0; n < pilots.size(); ++n) {
                if (pilots[n].i >= start && pilots[n].i < start + b.len) {
                    b.pilot_index.push_back(static_cast<Eigen::Index>(n));
                    pattern.push_back({pilots[n].k, pilots[n].i - start});
                }
            }
            if (pattern.empty()) {
                throw Error("LMMSE window without pilots");
            }
            auto [it, inserted] = pattern_index.try_emplace(pattern, weights_.size());
            if (inserted) {
                weights_.push_back(build(corr, subcarriers, b.len, pattern, sigma2));
            }
            b.matrix = it->second;
            blocks_.push_back(std::move(b));
        }
    }

    /// `h_ls` holds the pilot LS values in the order of the constructor's pilot list.
    [[nodiscard]] CMatrix estimate(const CVector& h_ls) const
    {
        CMatrix H(K_on_, I_);
        for (const auto& b : blocks_) {
            CVector local(static_cast<Eigen::Index>(b.pilot_index.size()));
            for (std::size_t n = 0; n < b.pilot_index.size(); ++n) {
                local(static_cast<Eigen::Index>(n)) = h_ls(b.pilot_index[n]);
            }
            const CVector est = weights_[b.matrix] * local;
            H.middleCols(b.start, b.len) = est.reshaped(K_on_, b.len);
        }
        return H;
    }

    /// True when a factorization needed diagonal jitter.
    [[nodiscard]] bool jitter_applied() const { return jitter_; }

    [[nodiscard]] const CMatrix& weight_matrix(std::size_t n = 0) const { return weights_.at(n); }

private:
    struct Block {
        int start = 0;
        int len = 0;
        std::vector<Eigen::Index> pilot_index;
        std::size_t matrix = 0;
    };

    CMatrix build(const ChannelCorrelation& corr, const std::vector<int>& sc, int len,
                  const std::vector<Cell>& pattern, double sigma2)
    {
        const auto np = static_cast<Eigen::Index>(pattern.size());
        const Eigen::Index nt = static_cast<Eigen::Index>(K_on_) * len;
        // lag tables: subcarrier numbers span at most 2 K_on, symbols at most len
        const int span = sc.back() - sc.front();
        std::vector<cplx> rf(static_cast<std::size_t>(2 * span + 1));
        for (int d = -span; d <= span; ++d) {
            rf[static_cast<std::size_t>(d + span)] = corr.frequency(d);
        }
        std::vector<double> rt(static_cast<std::size_t>(2 * len - 1));
        for (int d = -(len - 1); d < len; ++d) {
            rt[static_cast<std::size_t>(d + len - 1)] = corr.time(d);
        }
        auto freq = [&](int ka, int kb) {
            return rf[static_cast<std::size_t>(sc[static_cast<std::size_t>(ka)] - sc[static_cast<std::size_t>(kb)] + span)];
        };
        auto time = [&](int d) { return rt[static_cast<std::size_t>(d + len - 1)]; };
        CMatrix Rpp(np, np);
        for (Eigen::Index a = 0; a < np; ++a) {
            for (Eigen::Index b = 0; b < np; ++b) {
                const auto& pa = pattern[static_cast<std::size_t>(a)];
                const auto& pb = pattern[static_cast<std::size_t>(b)];
                Rpp(a, b) = time(pa.i - pb.i) * freq(pa.k, pb.k);
            }
        }
        CMatrix Rhp(nt, np);
        for (int i = 0; i < len; ++i) {
            for (int k = 0; k < K_on_; ++k) {
                for (Eigen::Index b = 0; b < np; ++b) {
                    const auto& pb = pattern[static_cast<std::size_t>(b)];
                    Rhp(k + static_cast<Eigen::Index>(i) * K_on_, b) = time(i - pb.i) * freq(k, pb.k);
                }
            }
        }
        CMatrix A = Rpp;
        A.diagonal().array() += sigma2;
        Eigen::LLT<CMatrix> llt(A);
        if (llt.info() != Eigen::Success) {
            jitter_ = true;
            A.diagonal().array() += 1e-12;
            llt.compute(A);
            if (llt.info() != Eigen::Success) {
                throw Error("LMMSE pilot correlation matrix is singular");
            }
        }
        // W = Rhp A^{-1}  <=>  W^H = A^{-1} Rhp^H for Hermitian A
        return llt.solve(Rhp.adjoint()).adjoint();
    }

    int K_on_;
    int I_;
    bool jitter_ = false;
    std::vector<Block> blocks_;
    std::vector<CMatrix> weights_;
};

inline EstimateGrid lmmse_2d(const FrameGrid& rx, const LmmseInterpolator& lmmse)
{
    return {lmmse.estimate(pilot_ls(rx)), "lmmse", {}};
}

inline EstimateGrid lmmse_2d(const FrameGrid& rx, const ChannelCorrelation& corr, int window)
{
    const LmmseInterpolator lmmse(corr, rx.layout->subcarriers, rx.spec().I, rx.layout->pilot_cells(),
                                  rx.noise_variance, window);
    return lmmse_2d(rx, lmmse);
}

// ---------------------------------------------------------------------------
// 2D RBF

/// Gaussian radial basis exp(-(x + y)^2 / r0).
inline double rbf_kernel(double x, double y, double r0)
{
    const double s = x + y;
    return std::exp(-s * s / r0);
}

// picked by a coarse validation-NMSE scan on VTV-SDWW-500 (see README)
inline constexpr double default_rbf_r0 = 1024.0;

/// Exact-fit RBF interpolation through the pilot LS values. The kernel matrix
/// uses pairwise pilot distances, A(a,b) = Phi(|kf_a - kf_b|, |kt_a - kt_b|),
/// so the interpolant reproduces every pilot value.
class RbfInterpolator {
public:
    RbfInterpolator(std::vector<Cell> pilots, int K_on, int num_symbols, double r0)
        : pilots_(std::move(pilots)), K_on_(K_on), I_(num_symbols), r0_(r0)
    {
        if (!(r0 > 0.0)) {
            throw Error("RBF scale factor must be positive");
        }
        const auto np = static_cast<Eigen::Index>(pilots_.size());
        A_.resize(np, np);
        for (Eigen::Index a = 0; a < np; ++a) {
            for (Eigen::Index b = 0; b < np; ++b) {
                A_(a, b) = kernel(pilots_[static_cast<std::size_t>(a)], pilots_[static_cast<std::size_t>(b)]);
            }
        }
        lu_.compute(A_);
        rcond_ = lu_.rcond();

        eval_.resize(static_cast<Eigen::Index>(K_on_) * I_, np);
        for (int i = 0; i < I_; ++i) {
            for (int k = 0; k < K_on_; ++k) {
                for (Eigen::Index b = 0; b < np; ++b) {
                    eval_(k + static_cast<Eigen::Index>(i) * K_on_, b) =
                        kernel({k, i}, pilots_[static_cast<std::size_t>(b)]);
                }
            }
        }
    }

    [[nodiscard]] CVector weights(const CVector& h_ls) const
    {
        if (h_ls.size() != A_.rows()) {
            throw DimensionError("RBF right-hand side does not match pilot count");
        }
        CVector w(h_ls.size());
        w.real() = lu_.solve(RVector(h_ls.real()));
        w.imag() = lu_.solve(RVector(h_ls.imag()));
        return w;
    }

    [[nodiscard]] CMatrix interpolate(const CVector& w) const
    {
        CVector v(eval_.rows());
        v.real() = eval_ * w.real();
        v.imag() = eval_ * w.imag();
        return v.reshaped(K_on_, I_);
    }

    [[nodiscard]] CMatrix estimate(const CVector& h_ls) const { return interpolate(weights(h_ls)); }

    [[nodiscard]] const RMatrix& interpolation_matrix() const { return A_; }
    /// Reciprocal condition estimate of the kernel matrix.
    [[nodiscard]] double rcond() const { return rcond_; }
    [[nodiscard]] double r0() const { return r0_; }

private:
    [[nodiscard]] double kernel(Cell a, Cell b) const
    {
        return rbf_kernel(std::abs(a.k - b.k), std::abs(a.i - b.i), r0_);
    }

    std::vector<Cell> pilots_;
    int K_on_;
    int I_;
    double r0_;
    RMatrix A_;
    Eigen::PartialPivLU<RMatrix> lu_;
    double rcond_ = 0.0;
    RMatrix eval_;
};

inline EstimateGrid rbf_interpolate(const FrameGrid& rx, const RbfInterpolator& rbf)
{
    return {rbf.estimate(pilot_ls(rx)), "rbf", {}};
}

// ---------------------------------------------------------------------------
// ADD-TT

struct AddTtParams {
    double alpha = 0.5; // time-averaging weight, (0, 1]
    int beta = 2;       // frequency window half-width
    int L = 12;         // retained taps

    void validate() const
    {
        if (!(alpha > 0.0 && alpha <= 1.0)) {
            throw Error("ADD-TT alpha must lie in (0, 1]");
        }
        if (beta < 0) {
            throw Error("ADD-TT beta must be nonnegative");
        }
        if (L < 1) {
            throw Error("ADD-TT tap count must be positive");
        }
    }
};

/// Uniform (2 beta + 1)-tap moving average; the window is clipped at the band
/// edges and renormalized over the cells it still covers.
inline CVector frequency_average(const CVector& h, int beta)
{
    const auto n = h.size();
    CVector out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, k - beta);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + beta);
        out(k) = h.segment(lo, hi - lo + 1).mean();
    }
    return out;
}

/// Decision-directed tracking with time-domain truncation and
/// frequency/time averaging. `dft` must be built with the same L as params.
inline EstimateGrid add_tt(const FrameGrid& rx, const CVector& h_lts, const AddTtParams& params,
                           const DftMatrices& dft)
{
    params.validate();
    const FrameSpec& spec = rx.spec();
    const FrameLayout& layout = *rx.layout;
    if (h_lts.size() != spec.K_on || dft.F_on.rows() != spec.K_on || dft.L != params.L) {
        throw DimensionError("ADD-TT inputs do not match the frame");
    }
    CMatrix H(spec.K_on, spec.I);
    CVector prev = h_lts;
    CVector d(spec.K_on);
    for (int i = 0; i < spec.I; ++i) {
        const auto col = rx.symbols.col(i);
        for (int k : layout.pilot_positions[static_cast<std::size_t>(i)]) {
            d(k) = layout.pilot_values(k);
        }
        for (int k : layout.data_positions[static_cast<std::size_t>(i)]) {
            d(k) = demap_hard(col(k) / prev(k), spec.M).point;
        }
        const CVector h_dd = col.cwiseQuotient(d);
        const CVector h_tt = dft.F_on * (dft.F_on_pinv * h_dd);
        const CVector h_ftt = frequency_average(h_tt, params.beta);
        prev = (1.0 - params.alpha) * prev + params.alpha * h_ftt;
        H.col(i) = prev;
    }
    return {std::move(H), "addtt", {}};
}

} // namespace wice
