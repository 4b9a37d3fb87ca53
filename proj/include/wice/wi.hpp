// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wice/baseline.hpp"
#include "wice/dft.hpp"
#include "wice/frame.hpp"
#include "wice/random.hpp"
#include "wice/types.hpp"

namespace wice {

enum class WiScheme { fp_sls, fp_als, lp };

inline std::string to_string(WiScheme s)
{
    switch (s) {
    case WiScheme::fp_sls:
        return "fp-sls";
    case WiScheme::fp_als:
        return "fp-als";
    case WiScheme::lp:
        return "lp";
    }
    return "?";
}

inline WiScheme parse_wi_scheme(const std::string& s)
{
    if (s == "fp-sls") {
        return WiScheme::fp_sls;
    }
    if (s == "fp-als") {
        return WiScheme::fp_als;
    }
    if (s == "lp") {
        return WiScheme::lp;
    }
    throw Error("unknown WI scheme '" + s + "' (expected fp-sls, fp-als or lp)");
}

inline PilotScheme pilot_scheme_of(WiScheme s)
{
    return s == WiScheme::lp ? PilotScheme::lp : PilotScheme::fp;
}

// ---------------------------------------------------------------------------
// Pilot-symbol estimators

/// Per-subcarrier LS on a full pilot symbol.
inline CVector sls_pilot(const CVector& y, const RVector& pilots)
{
    if (y.size() != pilots.size()) {
        throw DimensionError("pilot symbol and pilot sequence lengths differ");
    }
    return y.cwiseQuotient(pilots.cast<cplx>());
}

/// LS projected onto the L-tap DFT subspace: W_ALS h_SLS.
inline CVector als_pilot(const CVector& h_sls, const DftMatrices& dft)
{
    if (h_sls.size() != dft.W_als.cols()) {
        throw DimensionError("ALS input length does not match the DFT basis");
    }
    return dft.W_als * h_sls;
}

/// DFT interpolation from L pilots: F_on F_p^+ (y_p / p_p).
inline CVector lp_pilot(const CVector& y_pilots, const RVector& p_pilots, const DftMatrices& dft)
{
    if (dft.W_dft.size() == 0) {
        throw Error("DFT matrices were built without LP pilot positions");
    }
    if (y_pilots.size() != dft.W_dft.cols() || p_pilots.size() != y_pilots.size()) {
        throw DimensionError("LP pilot vector length does not match the pilot layout");
    }
    return dft.W_dft * y_pilots.cwiseQuotient(p_pilots.cast<cplx>());
}

/// Pairs consecutive anchors: [h_{q-1}, h_q] for q = 1..P. anchors[0] is the
/// preamble estimate.
inline std::vector<CMatrix> group_pilots(std::span<const CVector> anchors)
{
    if (anchors.size() < 2) {
        throw Error("grouping needs the preamble anchor and at least one pilot symbol");
    }
    std::vector<CMatrix> groups;
    for (std::size_t q = 1; q < anchors.size(); ++q) {
        if (anchors[q].size() != anchors[0].size()) {
            throw DimensionError("anchor estimates differ in length");
        }
        CMatrix g(anchors[0].size(), 2);
        g.col(0) = anchors[q - 1];
        g.col(1) = anchors[q];
        groups.push_back(std::move(g));
    }
    return groups;
}

// ---------------------------------------------------------------------------
// Interpolation weights

inline constexpr double singular_det_threshold = 1e-12;
inline constexpr double weight_jitter = 1e-9;

struct WiWeights {
    RMatrix C; // 2 x I_f
    bool regularized = false;
};

/// MMSE two-anchor time interpolation weights. Data position f (1..I_f) sits
/// (f-1) symbols after the leading anchor and (I_f+1-f) before the trailing
/// one; the anchors are I_f symbols apart with noise powers E_q and E_{q+1}.
inline WiWeights wi_weights(double doppler_hz, double T_s, int I_f, double E_q, double E_q1)
{
    if (I_f < 1) {
        throw Error("subframe must contain at least one data symbol");
    }
    if (E_q < 0.0 || E_q1 < 0.0) {
        throw Error("anchor noise terms must be nonnegative");
    }
    auto j0 = [&](double lag) { return bessel_j0(2.0 * pi * doppler_hz * lag * T_s); };
    const double rho = j0(I_f);
    double a = 1.0 + E_q;
    double d = 1.0 + E_q1;
    WiWeights w;
    double det = a * d - rho * rho;
    if (std::abs(det) < singular_det_threshold) {
        a += weight_jitter;
        d += weight_jitter;
        det = a * d - rho * rho;
        w.regularized = true;
    }
    w.C.resize(2, I_f);
    for (int f = 1; f <= I_f; ++f) {
        const double r0 = j0(f - 1);
        const double r1 = j0(I_f + 1 - f);
        w.C(0, f - 1) = (d * r0 - rho * r1) / det;
        w.C(1, f - 1) = (a * r1 - rho * r0) / det;
    }
    return w;
}

/// H_WI = [h_q, h_{q+1}] C.
inline CMatrix wi_estimate(const CMatrix& anchors, const RMatrix& C)
{
    if (anchors.cols() != 2 || C.rows() != 2) {
        throw DimensionError("weighted interpolation needs K_on x 2 anchors and 2 x I_f weights");
    }
    return anchors * C.cast<cplx>();
}

/// tr(W W^H) / K_on: per-subcarrier noise gain of the pilot-symbol estimator.
inline double noise_gain(WiScheme scheme, const DftMatrices& dft)
{
    switch (scheme) {
    case WiScheme::fp_sls:
        return 1.0;
    case WiScheme::fp_als:
        return dft.als_trace() / static_cast<double>(dft.W_als.rows());
    case WiScheme::lp:
        return dft.dft_trace() / static_cast<double>(dft.W_dft.rows());
    }
    return 1.0;
}

/// Estimation-noise power at a pilot-symbol anchor.
inline double noise_term(WiScheme scheme, double sigma2, const DftMatrices& dft)
{
    return sigma2 * noise_gain(scheme, dft);
}

/// Precomputed weight matrices keyed by (f_d, T_s, I_f, E_q, E_{q+1}).
class WiWeightTable {
public:
    struct Key {
        double doppler_hz = 0.0;
        double T_s = 0.0;
        int I_f = 0;
        double E_q = 0.0;
        double E_q1 = 0.0;
        friend auto operator<=>(const Key&, const Key&) = default;
        friend bool operator==(const Key&, const Key&) = default;
    };

    /// Computes (or keeps) the entry for `key`.
    const RMatrix& add(const Key& key)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            it = entries_.emplace(key, wi_weights(key.doppler_hz, key.T_s, key.I_f, key.E_q, key.E_q1).C).first;
        }
        return it->second;
    }

    void insert(const Key& key, RMatrix C) { entries_[key] = std::move(C); }

    [[nodiscard]] const RMatrix* find(const Key& key) const
    {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::map<Key, RMatrix>& entries() const { return entries_; }

private:
    std::map<Key, RMatrix> entries_;
};

/// Anchor noise powers for a layout: E_0 = sigma^2 / 2 for the two-symbol
/// preamble LS, then the scheme's pilot-symbol noise term.
inline std::vector<double> anchor_noise_terms(int P, WiScheme scheme, double sigma2, const DftMatrices& dft)
{
    std::vector<double> E(static_cast<std::size_t>(P) + 1, noise_term(scheme, sigma2, dft));
    E[0] = sigma2 / 2.0;
    return E;
}

/// Weighted-interpolation estimator for a WI frame layout (P >= 1).
class WiEstimator {
public:
    WiEstimator(std::shared_ptr<const FrameLayout> layout, WiScheme scheme, double doppler_hz,
                const WiWeightTable* table = nullptr)
        : layout_(std::move(layout)), scheme_(scheme), doppler_hz_(doppler_hz), table_(table)
    {
        const FrameSpec& spec = layout_->spec;
        if (spec.P < 1) {
            throw Error("WI estimation needs at least one pilot symbol");
        }
        if (spec.scheme != pilot_scheme_of(scheme)) {
            throw Error("WI scheme " + to_string(scheme) + " does not match the frame's pilot allocation");
        }
        const auto lp = scheme == WiScheme::lp ? lp_pilot_positions(spec.K_on, spec.L) : std::vector<int>{};
        dft_ = make_dft_matrices(layout_->subcarriers, spec.K, spec.L, lp);
        if (scheme == WiScheme::lp) {
            lp_pilots_.resize(static_cast<Eigen::Index>(lp.size()));
            for (std::size_t n = 0; n < lp.size(); ++n) {
                lp_pilots_(static_cast<Eigen::Index>(n)) = layout_->pilot_values(lp[n]);
            }
        }
    }

    [[nodiscard]] const DftMatrices& dft() const { return dft_; }
    [[nodiscard]] WiScheme scheme() const { return scheme_; }
    [[nodiscard]] double doppler_hz() const { return doppler_hz_; }

    /// Anchor estimates: preamble LS followed by one estimate per pilot symbol.
    [[nodiscard]] std::vector<CVector> anchors(const FrameGrid& rx, OpCount* ops = nullptr) const
    {
        const FrameSpec& spec = layout_->spec;
        const std::int64_t K_on = spec.K_on;
        std::vector<CVector> a;
        a.push_back(ls_preamble(rx));
        if (ops) {
            *ops += {2 * K_on, 2 * K_on};
        }
        for (int q : layout_->pilot_symbols) {
            const CVector y = rx.symbols.col(q);
            switch (scheme_) {
            case WiScheme::fp_sls:
                a.push_back(sls_pilot(y, layout_->pilot_values));
                if (ops) {
                    *ops += {2 * K_on, 0};
                }
                break;
            case WiScheme::fp_als:
                a.push_back(als_pilot(sls_pilot(y, layout_->pilot_values), dft_));
                if (ops) {
                    *ops += {2 * K_on + 4 * K_on * K_on, 5 * K_on * K_on};
                }
                break;
            case WiScheme::lp: {
                CVector yp(static_cast<Eigen::Index>(dft_.lp_positions.size()));
                for (std::size_t n = 0; n < dft_.lp_positions.size(); ++n) {
                    yp(static_cast<Eigen::Index>(n)) = y(dft_.lp_positions[n]);
                }
                a.push_back(lp_pilot(yp, lp_pilots_, dft_));
                if (ops) {
                    const std::int64_t L = yp.size();
                    *ops += {2 * L + 4 * K_on * L, 5 * K_on * L};
                }
                break;
            }
            }
        }
        return a;
    }

    /// Weights of subframe f (0-based) at noise variance sigma2.
    [[nodiscard]] RMatrix subframe_weights(int f, double sigma2) const
    {
        const auto E = anchor_noise_terms(layout_->spec.P, scheme_, sigma2, dft_);
        const WiWeightTable::Key key{doppler_hz_, layout_->spec.T_s, data_symbols_in(f),
                                     E[static_cast<std::size_t>(f)], E[static_cast<std::size_t>(f) + 1]};
        if (table_) {
            if (const RMatrix* C = table_->find(key)) {
                return *C;
            }
        }
        return wi_weights(key.doppler_hz, key.T_s, key.I_f, key.E_q, key.E_q1).C;
    }

    [[nodiscard]] int data_symbols_in(int f) const
    {
        const auto& q = layout_->pilot_symbols;
        const int prev = f == 0 ? -1 : q[static_cast<std::size_t>(f) - 1];
        return q[static_cast<std::size_t>(f)] - prev - 1;
    }

    /// Full K_on x I estimate; pilot-symbol columns carry their anchor estimate.
    [[nodiscard]] EstimateGrid estimate(const FrameGrid& rx) const
    {
        if (rx.layout->spec.I != layout_->spec.I || rx.layout->spec.K_on != layout_->spec.K_on) {
            throw DimensionError("received frame does not match the estimator layout");
        }
        OpCount ops;
        const auto a = anchors(rx, &ops);
        const auto groups = group_pilots(a);
        const std::int64_t K_on = layout_->spec.K_on;
        EstimateGrid out{CMatrix(K_on, layout_->spec.I), "wi-" + to_string(scheme_), {}};
        int start = 0;
        for (std::size_t f = 0; f < groups.size(); ++f) {
            const int I_f = data_symbols_in(static_cast<int>(f));
            const RMatrix C = subframe_weights(static_cast<int>(f), rx.noise_variance);
            out.H_hat.middleCols(start, I_f) = wi_estimate(groups[f], C);
            out.H_hat.col(layout_->pilot_symbols[f]) = a[f + 1];
            ops += {4 * K_on * I_f, 2 * K_on * I_f};
            start += I_f + 1;
        }
        out.ops = ops;
        return out;
    }

private:
    std::shared_ptr<const FrameLayout> layout_;
    WiScheme scheme_;
    double doppler_hz_;
    const WiWeightTable* table_;
    DftMatrices dft_;
    RVector lp_pilots_;
};

/// Offline grid: every (Doppler, structure, scheme, SNR) combination yields the
/// keys its subframes will ask for.
struct WeightGrid {
    std::vector<double> doppler_hz{0.0, 250.0, 500.0, 1000.0};
    std::vector<int> pilot_symbols{1, 2, 3};
    std::vector<WiScheme> schemes{WiScheme::fp_sls, WiScheme::fp_als, WiScheme::lp};
    std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
    FrameSpec base{};
};

inline WiWeightTable precompute_weights(const WeightGrid& grid)
{
    WiWeightTable table;
    for (WiScheme scheme : grid.schemes) {
        for (int P : grid.pilot_symbols) {
            FrameSpec spec = grid.base;
            spec.P = P;
            spec.scheme = pilot_scheme_of(scheme);
            const auto layout = make_layout(spec);
            for (double fd : grid.doppler_hz) {
                const WiEstimator est(layout, scheme, fd);
                for (double snr : grid.snr_db) {
                    const auto E = anchor_noise_terms(P, scheme, noise_variance(snr), est.dft());
                    for (int f = 0; f < P; ++f) {
                        table.add({fd, spec.T_s, est.data_symbols_in(f), E[static_cast<std::size_t>(f)],
                                   E[static_cast<std::size_t>(f) + 1]});
                    }
                }
            }
        }
    }
    return table;
}

} // namespace wice
