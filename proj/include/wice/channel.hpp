// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wice/frame.hpp"
#include "wice/random.hpp"
#include "wice/types.hpp"

namespace wice {

/// Tapped-delay-line profile with a Jakes Doppler spectrum on every tap.
struct TdlProfile {
    std::string name;
    std::vector<double> delays_ns;
    std::vector<double> gains_db;
    double doppler_hz = 0.0;
    double velocity_kmh = 0.0;

    void validate() const
    {
        if (delays_ns.empty() || delays_ns.size() != gains_db.size()) {
            throw Error("profile '" + name + "': delay and gain lists must be nonempty and equal length");
        }
        for (std::size_t l = 0; l < delays_ns.size(); ++l) {
            if (delays_ns[l] < 0.0 || (l > 0 && delays_ns[l] < delays_ns[l - 1])) {
                throw Error("profile '" + name + "': delays must be nonnegative and nondecreasing");
            }
        }
        if (delays_ns.back() >= 1600.0) {
            throw Error("profile '" + name + "': delay spread exceeds the 1.6 us guard interval");
        }
        if (doppler_hz < 0.0) {
            throw Error("profile '" + name + "': negative Doppler");
        }
    }

    /// Linear tap powers normalized to unit sum.
    [[nodiscard]] std::vector<double> tap_powers() const
    {
        std::vector<double> p(gains_db.size());
        double total = 0.0;
        for (std::size_t l = 0; l < p.size(); ++l) {
            p[l] = std::pow(10.0, gains_db[l] / 10.0);
            total += p[l];
        }
        for (auto& v : p) {
            v /= total;
        }
        return p;
    }
};

inline TdlProfile vtv_uc()
{
    return {"VTV-UC",
            {0, 1, 100, 101, 102, 200, 201, 202, 300, 301, 400, 401},
            {0, 0, -10, -10, -10, -17.8, -17.8, -17.8, -21.1, -21.1, -26.3, -26.3},
            250.0,
            45.0};
}

inline TdlProfile vtv_sdww(double doppler_hz)
{
    return {"VTV-SDWW-" + std::to_string(static_cast<int>(doppler_hz)),
            {0, 1, 100, 101, 200, 300, 400, 401, 500, 600, 700, 701},
            {0, 0, -11.2, -11.2, -19, -21.9, -25.3, -25.3, -24.4, -28, -26.1, -26.1},
            doppler_hz,
            doppler_hz / 5.0};
}

inline std::vector<std::string> builtin_profile_names()
{
    return {"VTV-UC", "VTV-SDWW-500", "VTV-SDWW-1000"};
}

inline TdlProfile builtin_profile(const std::string& name)
{
    if (name == "VTV-UC") {
        return vtv_uc();
    }
    if (name == "VTV-SDWW-500") {
        return vtv_sdww(500.0);
    }
    if (name == "VTV-SDWW-1000") {
        return vtv_sdww(1000.0);
    }
    throw Error("unknown channel profile '" + name + "'");
}

/// One frame's channel. Column 0 of H and taps is the preamble epoch,
/// column i (1..I) the i-th data-region symbol. Noise holds unit-variance
/// draws: columns 0-1 for the two preamble symbols, 2..I+1 for the data region.
struct ChannelRealization {
    CMatrix H;     // K_on x (I+1)
    CMatrix taps;  // taps x (I+1)
    CMatrix noise; // K_on x (I+2)
    double doppler_hz = 0.0;

    /// True channel over the data region, K_on x I.
    [[nodiscard]] CMatrix data_region() const { return H.rightCols(H.cols() - 1); }
};

/// exp(-j 2 pi f_k tau_l) for every active subcarrier frequency f_k and tap delay.
inline CMatrix tap_steering(const std::vector<int>& subcarriers, double spacing_hz, const std::vector<double>& delays_ns)
{
    CMatrix E(static_cast<Eigen::Index>(subcarriers.size()), static_cast<Eigen::Index>(delays_ns.size()));
    for (std::size_t k = 0; k < subcarriers.size(); ++k) {
        const double f = subcarriers[k] * spacing_hz;
        for (std::size_t l = 0; l < delays_ns.size(); ++l) {
            E(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                std::polar(1.0, -2.0 * pi * f * delays_ns[l] * 1e-9);
        }
    }
    return E;
}

inline constexpr int default_sinusoids = 32;

/// Sum-of-sinusoids Jakes process for one tap, unit power, sampled at
/// t = n * T_s for n = 0..epochs-1. Arrival angles are stratified over the
/// circle with a random offset, so the ensemble autocorrelation is exactly
/// J0(2 pi f_d tau).
inline void jakes_tap(Rng& rng, double doppler_hz, double T_s, int sinusoids, Eigen::Ref<CVector> out)
{
    out.setZero();
    const double offset = uniform01(rng);
    const double amp = 1.0 / std::sqrt(static_cast<double>(sinusoids));
    for (int n = 0; n < sinusoids; ++n) {
        const double angle = 2.0 * pi * (n + offset) / sinusoids;
        const double phase = 2.0 * pi * uniform01(rng);
        const cplx step = std::polar(1.0, 2.0 * pi * doppler_hz * std::cos(angle) * T_s);
        cplx z = std::polar(amp, phase);
        for (Eigen::Index t = 0; t < out.size(); ++t) {
            out(t) += z;
            z *= step;
        }
    }
}

inline ChannelRealization sample_channel(const TdlProfile& profile, const FrameSpec& spec, std::uint64_t seed,
                                         int sinusoids = default_sinusoids)
{
    profile.validate();
    spec.validate();
    Rng rng(seed);
    const auto powers = profile.tap_powers();
    const auto n_taps = static_cast<Eigen::Index>(powers.size());
    const Eigen::Index epochs = spec.I + 1;

    ChannelRealization ch;
    ch.doppler_hz = profile.doppler_hz;
    ch.taps.resize(n_taps, epochs);
    CVector row(epochs);
    for (Eigen::Index l = 0; l < n_taps; ++l) {
        jakes_tap(rng, profile.doppler_hz, spec.T_s, sinusoids, row);
        ch.taps.row(l) = std::sqrt(powers[static_cast<std::size_t>(l)]) * row.transpose();
    }
    const CMatrix E = tap_steering(active_subcarriers(spec.K_on), spec.subcarrier_spacing, profile.delays_ns);
    ch.H = E * ch.taps;

    ch.noise.resize(spec.K_on, spec.I + 2);
    for (Eigen::Index c = 0; c < ch.noise.cols(); ++c) {
        for (Eigen::Index k = 0; k < ch.noise.rows(); ++k) {
            ch.noise(k, c) = complex_gaussian(rng);
        }
    }
    return ch;
}

/// Noise variance for unit signal and channel power; +inf dB disables noise.
inline double noise_variance(double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0) {
        return 0.0;
    }
    return std::pow(10.0, -snr_db / 10.0);
}

/// y_i[k] = h_i[k] x_i[k] + v_i[k]. Both preamble symbols see the
/// preamble-epoch channel.
inline FrameGrid apply_channel(const FrameGrid& tx, const ChannelRealization& ch, double snr_db)
{
    const FrameSpec& spec = tx.spec();
    if (ch.H.rows() != spec.K_on || ch.H.cols() != spec.I + 1 || ch.noise.cols() != spec.I + 2 ||
        ch.noise.rows() != spec.K_on) {
        throw DimensionError("channel realization does not match the frame dimensions");
    }
    const double sigma2 = noise_variance(snr_db);
    const double sigma = std::sqrt(sigma2);
    FrameGrid rx = tx;
    rx.noise_variance = sigma2;
    for (int s = 0; s < 2; ++s) {
        rx.preamble.col(s) = ch.H.col(0).cwiseProduct(tx.preamble.col(s));
        if (sigma > 0.0) {
            rx.preamble.col(s) += sigma * ch.noise.col(s);
        }
    }
    rx.symbols = ch.data_region().cwiseProduct(tx.symbols);
    if (sigma > 0.0) {
        rx.symbols += sigma * ch.noise.rightCols(spec.I);
    }
    return rx;
}

struct CoherenceInterval {
    int pilot_spacing = 0;  // symbols between successive pilot symbols
    double doppler_hz = 0.0;
    double T_s = 0.0;

    /// Delta_p * f_d * T_s (dimensionless).
    [[nodiscard]] double normalized() const { return pilot_spacing * doppler_hz * T_s; }
    /// The same quantity quoted in multiples of T_s, i.e. Delta_p * f_d.
    [[nodiscard]] double in_symbol_durations() const { return pilot_spacing * doppler_hz; }
};

inline CoherenceInterval coherence_interval(const FrameSpec& spec, double doppler_hz)
{
    if (spec.P < 1) {
        throw Error("coherence interval needs at least one pilot symbol");
    }
    return {spec.I / spec.P, doppler_hz, spec.T_s};
}

/// Second-order statistics of a TDL profile: separable time x frequency
/// correlation, E[h(k,i) h*(k',i')] = r_t(i-i') r_f(k-k').
struct ChannelCorrelation {
    std::vector<double> delays_s;
    std::vector<double> powers;
    double doppler_hz = 0.0;
    double T_s = 8e-6;
    double spacing_hz = 156.25e3;

    static ChannelCorrelation from_profile(const TdlProfile& p, const FrameSpec& spec)
    {
        ChannelCorrelation c;
        for (double d : p.delays_ns) {
            c.delays_s.push_back(d * 1e-9);
        }
        c.powers = p.tap_powers();
        c.doppler_hz = p.doppler_hz;
        c.T_s = spec.T_s;
        c.spacing_hz = spec.subcarrier_spacing;
        return c;
    }

    [[nodiscard]] double time(double symbol_lag) const { return bessel_j0(2.0 * pi * doppler_hz * symbol_lag * T_s); }

    [[nodiscard]] cplx frequency(double subcarrier_lag) const
    {
        cplx r{0.0, 0.0};
        for (std::size_t l = 0; l < powers.size(); ++l) {
            r += powers[l] * std::polar(1.0, -2.0 * pi * subcarrier_lag * spacing_hz * delays_s[l]);
        }
        return r;
    }
};

} // namespace wice
