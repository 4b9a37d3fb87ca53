// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "wice/constellation.hpp"
#include "wice/frame.hpp"
#include "wice/types.hpp"

namespace wice {

// ---------------------------------------------------------------------------
// Error measures

/// ||H_hat - H||_F^2 / ||H||_F^2 for one frame.
inline double nmse(const CMatrix& H_hat, const CMatrix& H)
{
    if (H_hat.rows() != H.rows() || H_hat.cols() != H.cols()) {
        throw DimensionError("NMSE operands differ in shape");
    }
    const double ref = H.squaredNorm();
    if (!(ref > 0.0)) {
        throw Error("NMSE undefined for an all-zero reference channel");
    }
    return (H_hat - H).squaredNorm() / ref;
}

inline double to_db(double x)
{
    return 10.0 * std::log10(x);
}

/// Zero-forcing equalization of every data cell by H_hat, hard demapping,
/// bits in payload order.
inline BitVector equalize_and_demap(const FrameGrid& rx, const CMatrix& H_hat)
{
    const FrameLayout& layout = *rx.layout;
    const FrameSpec& spec = layout.spec;
    if (H_hat.rows() != spec.K_on || H_hat.cols() != spec.I) {
        throw DimensionError("estimate does not cover the frame's data region");
    }
    const auto& c = constellation(spec.M);
    const auto b = static_cast<std::size_t>(c.bits_per_symbol());
    BitVector out(static_cast<std::size_t>(payload_bit_count(spec)));
    std::size_t cursor = 0;
    for (int i = 0; i < spec.I; ++i) {
        for (int k : layout.data_positions[static_cast<std::size_t>(i)]) {
            const int idx = c.nearest(rx.symbols(k, i) / H_hat(k, i));
            c.bits_of(idx, std::span(out).subspan(cursor, b));
            cursor += b;
        }
    }
    return out;
}

inline std::size_t bit_errors(const BitVector& decoded, const BitVector& sent)
{
    if (decoded.size() != sent.size()) {
        throw DimensionError("bit vectors differ in length");
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        n += decoded[i] != sent[i] ? 1U : 0U;
    }
    return n;
}

inline double ber(const BitVector& decoded, const BitVector& sent)
{
    if (sent.empty()) {
        throw Error("BER of an empty bit vector");
    }
    return static_cast<double>(bit_errors(decoded, sent)) / static_cast<double>(sent.size());
}

/// Gray QPSK over AWGN: Q(sqrt(2 Eb/N0)).
inline double qpsk_awgn_ber(double ebn0_db)
{
    const double g = std::pow(10.0, ebn0_db / 10.0);
    return 0.5 * std::erfc(std::sqrt(g));
}

/// Gray QPSK over flat Rayleigh fading with the channel known, average SNR per
/// symbol given in dB (unit channel power).
inline double qpsk_rayleigh_ber(double snr_db)
{
    const double gb = 0.5 * std::pow(10.0, snr_db / 10.0);
    return 0.5 * (1.0 - std::sqrt(gb / (1.0 + gb)));
}

// ---------------------------------------------------------------------------
// Complexity

struct ComplexityParams {
    std::int64_t K_on = 52;
    std::int64_t K_p = 4;
    std::int64_t K_d = 48;
    std::int64_t I = 100;
    std::int64_t L = 12;
    std::int64_t P = 1;

    [[nodiscard]] std::int64_t I_d() const { return I - P; }
};

// Per-(K_on I) or per-(K_on I_d) coefficients of the CNN stages.
inline constexpr OpCount channelnet_cnn_coeff{350144, 42432};
inline constexpr OpCount ts_channelnet_cnn_coeff{226880, 81472};
inline constexpr OpCount srcnn_coeff{7008, 1120};
inline constexpr OpCount dncnn_coeff{84096, 9856};

inline std::vector<std::string> complexity_schemes()
{
    return {"lmmse-online", "lmmse-offline", "rbf",          "addtt",        "channelnet",   "ts-channelnet",
            "fp-sls",       "fp-als",        "lp",           "fp-sls-srcnn", "fp-als-srcnn", "lp-srcnn",
            "fp-sls-dncnn", "fp-als-dncnn",  "lp-dncnn"};
}

namespace detail {

inline OpCount wi_linear_ops(const std::string& s, const ComplexityParams& p)
{
    const auto K = p.K_on;
    const auto P = p.P;
    const auto Id = p.I_d();
    const auto L = p.L;
    if (s == "fp-sls") {
        return {2 * K * P + 2 * K + 4 * K * Id, 2 * K + 2 * K * Id};
    }
    if (s == "fp-als") {
        return {4 * K * K * P + 2 * K * P + 2 * K + 4 * K * Id, 5 * K * K * P + 2 * K * Id};
    }
    if (s == "lp") {
        return {2 * L * P + 4 * K * L * P + 2 * K + 4 * K * Id, 5 * K * L * P + 2 * K * Id};
    }
    throw Error("unknown scheme '" + s + "'");
}

} // namespace detail

/// Real-valued operation counts per frame, evaluated from the closed forms.
inline OpCount complexity(const std::string& scheme, const ComplexityParams& p)
{
    const auto Kp = p.K_p;
    const auto Kd = p.K_d;
    const auto Kon = p.K_on;
    const auto I = p.I;
    const auto L = p.L;
    if (scheme == "lmmse-online") {
        return {4 * Kp * Kp * Kp * I * I * I + Kp * Kp * I * I + Kd * Kd * Kp * Kp * I * I * I * I + 2 * Kp * I,
                3 * Kp * Kp * Kp * I * I * I + 2 * Kp * I};
    }
    if (scheme == "lmmse-offline") {
        return {4 * Kd * Kp * Kp * I * I + 2 * Kp * I, 3 * Kd * Kp * Kp * I * I + 2 * Kd * Kp * I * I - 2 * Kd * I};
    }
    if (scheme == "rbf") {
        return {Kp * Kp * I * I * (4 + Kd * I) + Kp * I * (2 + 3 * Kd * I), Kp * I * (5 * Kp * I + 5 * Kd * I - 2)};
    }
    if (scheme == "addtt") {
        return {24 * Kon * I + 4 * L * Kon * I, 18 * Kon * I + 5 * Kon * I * L};
    }
    if (scheme == "channelnet") {
        return complexity("rbf", p) + (Kon * I) * channelnet_cnn_coeff;
    }
    if (scheme == "ts-channelnet") {
        return complexity("addtt", p) + (Kon * I) * ts_channelnet_cnn_coeff;
    }
    for (const char* suffix : {"-srcnn", "-dncnn"}) {
        const std::string sfx = suffix;
        if (scheme.size() > sfx.size() && scheme.ends_with(sfx)) {
            const auto base = scheme.substr(0, scheme.size() - sfx.size());
            const OpCount& c = sfx == "-srcnn" ? srcnn_coeff : dncnn_coeff;
            return detail::wi_linear_ops(base, p) + (Kon * p.I_d()) * c;
        }
    }
    return detail::wi_linear_ops(scheme, p);
}

inline double complexity_ratio(const std::string& a, const std::string& b, const ComplexityParams& p)
{
    return static_cast<double>(complexity(a, p).total()) / static_cast<double>(complexity(b, p).total());
}

struct RatioEntry {
    std::string a;
    std::string b;
    double ratio = 0.0;
};

/// Every ordered pair of distinct schemes.
inline std::vector<RatioEntry> complexity_ratio_table(const ComplexityParams& p)
{
    std::vector<RatioEntry> out;
    const auto schemes = complexity_schemes();
    for (const auto& a : schemes) {
        for (const auto& b : schemes) {
            if (a != b) {
                out.push_back({a, b, complexity_ratio(a, b, p)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

// Per-frame outcome of one estimator at one operating point.
struct FrameResult {
    double error_energy = 0.0;   // ||H_hat - H||_F^2
    double channel_energy = 0.0; // ||H||_F^2
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
};

inline FrameResult score_frame(const CMatrix& H_hat, const CMatrix& H)
{
    FrameResult r;
    r.channel_energy = H.squaredNorm();
    r.error_energy = nmse(H_hat, H) * r.channel_energy; // nmse checks the shapes
    return r;
}

/// Folds frame results in the order they are added.
struct PointAccumulator {
    std::size_t frames = 0;
    double error_sum = 0.0;
    double channel_sum = 0.0;
    std::size_t bit_errors = 0;
    std::size_t bits = 0;
    double ber_sum = 0.0;
    double ber_sq_sum = 0.0;

    void add(const FrameResult& r)
    {
        ++frames;
        error_sum += r.error_energy;
        channel_sum += r.channel_energy;
        bit_errors += r.bit_errors;
        bits += r.bits;
        const double b = r.bits ? static_cast<double>(r.bit_errors) / static_cast<double>(r.bits) : 0.0;
        ber_sum += b;
        ber_sq_sum += b * b;
    }

    // pooled over frames: a per-frame ratio mean lets a few faded frames dominate
    [[nodiscard]] double nmse() const { return channel_sum > 0.0 ? error_sum / channel_sum : 0.0; }
    [[nodiscard]] double ber() const { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }

    /// 95% half-width of the mean per-frame BER.
    [[nodiscard]] double ci95() const
    {
        if (frames < 2) {
            return 0.0;
        }
        const double n = static_cast<double>(frames);
        const double mean = ber_sum / n;
        const double var = std::max(0.0, (ber_sq_sum - n * mean * mean) / (n - 1.0));
        return 1.96 * std::sqrt(var / n);
    }
};

struct MetricsRow {
    std::string estimator;
    std::string scenario;
    double snr_db = 0.0;
    double nmse = 0.0;
    double ber = 0.0;
    std::size_t frames = 0;
    double ci95 = 0.0;
    OpCount ops;
    double tdr_gain_pct = 0.0;
    double phi_us = 0.0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;

    [[nodiscard]] const MetricsRow* find(const std::string& estimator, const std::string& scenario, double snr_db) const
    {
        for (const auto& r : rows) {
            if (r.estimator == estimator && r.scenario == scenario && r.snr_db == snr_db) {
                return &r;
            }
        }
        return nullptr;
    }
};

inline std::string format_double(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const MetricsReport& report)
{
    os << "estimator,scenario,snr_db,nmse,nmse_db,ber,frames,ci95,ops_muldiv,ops_sumsub,tdr_gain_pct,phi_us\n";
    for (const auto& r : report.rows) {
        os << r.estimator << ',' << r.scenario << ',' << format_double(r.snr_db) << ',' << format_double(r.nmse)
           << ',' << format_double(r.nmse > 0.0 ? to_db(r.nmse) : -std::numeric_limits<double>::infinity()) << ','
           << format_double(r.ber) << ',' << r.frames << ',' << format_double(r.ci95) << ',' << r.ops.mul_div << ','
           << r.ops.sum_sub << ',' << format_double(r.tdr_gain_pct) << ',' << format_double(r.phi_us) << '\n';
    }
}

} // namespace wice
