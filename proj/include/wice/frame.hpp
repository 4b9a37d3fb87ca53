// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "wice/constellation.hpp"
#include "wice/random.hpp"
#include "wice/types.hpp"

namespace wice {

enum class PilotScheme { fp, lp };

inline std::string to_string(PilotScheme s)
{
    return s == PilotScheme::fp ? "fp" : "lp";
}

/// Frequency-domain frame parameters. P == 0 selects the standard 802.11p
/// layout (four comb pilots per symbol); P in 1..3 inserts that many pilot
/// symbols under the FP or LP allocation.
struct FrameSpec {
    int K = 64;
    int K_on = 52;
    int K_d = 48;
    int K_p = 4;
    int I = 100;
    int P = 0;
    PilotScheme scheme = PilotScheme::fp;
    int L = 12;
    int M = 4;
    double rho = 1.0;
    double T_s = 8e-6;
    double subcarrier_spacing = 156.25e3;

    [[nodiscard]] bool standard() const { return P == 0; }
    [[nodiscard]] int data_symbols() const { return I - P; }
    [[nodiscard]] int bits_per_symbol() const { return M == 16 ? 4 : 2; }

    void validate() const
    {
        auto fail = [](const std::string& what) { throw Error("invalid frame spec: " + what); };
        if (K <= 0 || K_on <= 0 || K_on > K || K_on % 2 != 0) {
            fail("need 0 < K_on <= K with K_on even");
        }
        if (K_on > 52) {
            fail("K_on larger than the 52-subcarrier training sequence");
        }
        if (K_d + K_p != K_on) {
            fail("K_d + K_p must equal K_on");
        }
        if (P < 0 || P > 3) {
            fail("P must be in 0..3");
        }
        if (I < 1 || (P > 0 && I < 2 * P)) {
            fail("frame too short for the requested pilot symbols");
        }
        if (M != 4 && M != 16) {
            fail("M must be 4 or 16");
        }
        if (P == 0 && (K_p != 4 || K_on < 44)) {
            fail("standard layout needs K_p = 4 and pilots at +-7, +-21");
        }
        if (scheme == PilotScheme::lp && P > 0 && (L < 1 || L > K_on)) {
            fail("LP pilot count must be in 1..K_on");
        }
        if (!(T_s > 0.0) || !(subcarrier_spacing > 0.0) || !(rho > 0.0)) {
            fail("durations, spacing and code rate must be positive");
        }
    }
};

/// Active subcarrier numbers in band order: -K_on/2..-1, 1..K_on/2.
inline std::vector<int> active_subcarriers(int K_on)
{
    std::vector<int> s;
    s.reserve(static_cast<std::size_t>(K_on));
    for (int k = -K_on / 2; k <= K_on / 2; ++k) {
        if (k != 0) {
            s.push_back(k);
        }
    }
    return s;
}

/// BPSK long-training sequence restricted to the active band.
inline RVector training_sequence(int K_on)
{
    static constexpr std::array<int, 53> lts = {
        1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 0,
        1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1};
    const auto sc = active_subcarriers(K_on);
    RVector p(K_on);
    for (int n = 0; n < K_on; ++n) {
        p(n) = lts[static_cast<std::size_t>(sc[static_cast<std::size_t>(n)] + 26)];
    }
    return p;
}

inline int position_of_subcarrier(int K_on, int subcarrier)
{
    return subcarrier < 0 ? subcarrier + K_on / 2 : subcarrier + K_on / 2 - 1;
}

/// Comb pilot positions of the standard layout (subcarriers -21, -7, 7, 21).
inline std::vector<int> standard_pilot_positions(int K_on)
{
    std::vector<int> out;
    for (int s : {-21, -7, 7, 21}) {
        out.push_back(position_of_subcarrier(K_on, s));
    }
    return out;
}

/// LP pilot positions floor(n * K_on / L), n = 0..L-1.
inline std::vector<int> lp_pilot_positions(int K_on, int L)
{
    std::vector<int> out(static_cast<std::size_t>(L));
    for (int n = 0; n < L; ++n) {
        out[static_cast<std::size_t>(n)] = (n * K_on) / L;
    }
    return out;
}

/// Sizes of the P subframes: the first I mod P get one extra symbol.
inline std::vector<int> subframe_lengths(int I, int P)
{
    std::vector<int> len(static_cast<std::size_t>(P), I / P);
    for (int f = 0; f < I % P; ++f) {
        ++len[static_cast<std::size_t>(f)];
    }
    return len;
}

/// Pilot-symbol indices (0-based in the I-symbol data region), one at the end
/// of each subframe. Empty for the standard layout.
inline std::vector<int> pilot_symbol_positions(const FrameSpec& spec)
{
    std::vector<int> pos;
    if (spec.P == 0) {
        return pos;
    }
    int end = 0;
    for (int len : subframe_lengths(spec.I, spec.P)) {
        end += len;
        pos.push_back(end - 1);
    }
    return pos;
}

/// Data subcarriers per frame (K_DF).
inline long data_subcarrier_count(const FrameSpec& spec)
{
    if (spec.P == 0) {
        return static_cast<long>(spec.K_d) * spec.I;
    }
    long n = static_cast<long>(spec.K_on) * (spec.I - spec.P);
    if (spec.scheme == PilotScheme::lp) {
        n += static_cast<long>(spec.K_on - spec.L) * spec.P;
    }
    return n;
}

/// Resolved pilot/data placement for a FrameSpec.
struct FrameLayout {
    FrameSpec spec;
    std::vector<int> subcarriers;
    RVector pilot_values;
    std::vector<int> pilot_symbols;
    std::vector<std::vector<int>> pilot_positions; // per symbol
    std::vector<std::vector<int>> data_positions;  // per symbol

    [[nodiscard]] long data_cell_count() const
    {
        long n = 0;
        for (const auto& d : data_positions) {
            n += static_cast<long>(d.size());
        }
        return n;
    }

    /// Pilot cells in symbol-major order (the vec() order of the LS grid).
    [[nodiscard]] std::vector<Cell> pilot_cells() const
    {
        std::vector<Cell> cells;
        for (int i = 0; i < spec.I; ++i) {
            for (int k : pilot_positions[static_cast<std::size_t>(i)]) {
                cells.push_back({k, i});
            }
        }
        return cells;
    }
};

inline std::shared_ptr<const FrameLayout> make_layout(const FrameSpec& spec)
{
    spec.validate();
    auto layout = std::make_shared<FrameLayout>();
    layout->spec = spec;
    layout->subcarriers = active_subcarriers(spec.K_on);
    layout->pilot_values = training_sequence(spec.K_on);
    layout->pilot_symbols = pilot_symbol_positions(spec);
    layout->pilot_positions.resize(static_cast<std::size_t>(spec.I));
    layout->data_positions.resize(static_cast<std::size_t>(spec.I));

    std::vector<int> all(static_cast<std::size_t>(spec.K_on));
    for (int k = 0; k < spec.K_on; ++k) {
        all[static_cast<std::size_t>(k)] = k;
    }
    const auto comb = standard_pilot_positions(spec.K_on);
    const auto lp = lp_pilot_positions(spec.K_on, spec.L);

    for (int i = 0; i < spec.I; ++i) {
        std::vector<int> pilots;
        if (spec.P == 0) {
            pilots = comb;
        } else if (std::ranges::find(layout->pilot_symbols, i) != layout->pilot_symbols.end()) {
            pilots = spec.scheme == PilotScheme::fp ? all : lp;
        }
        std::vector<int> data;
        std::ranges::set_difference(all, pilots, std::back_inserter(data));
        layout->pilot_positions[static_cast<std::size_t>(i)] = std::move(pilots);
        layout->data_positions[static_cast<std::size_t>(i)] = std::move(data);
    }
    return layout;
}

/// Frequency-domain frame: two LTS preamble symbols plus the K_on x I region.
struct FrameGrid {
    std::shared_ptr<const FrameLayout> layout;
    CMatrix preamble; // K_on x 2
    CMatrix symbols;  // K_on x I
    BitVector payload_bits;
    double noise_variance = 0.0; // sigma^2 of the received grid, 0 for transmit grids

    [[nodiscard]] const FrameSpec& spec() const { return layout->spec; }
};

inline long payload_bit_count(const FrameSpec& spec)
{
    return data_subcarrier_count(spec) * spec.bits_per_symbol();
}

inline FrameGrid build_frame(std::shared_ptr<const FrameLayout> layout, const BitVector& bits)
{
    const FrameSpec& spec = layout->spec;
    const long need = payload_bit_count(spec);
    if (static_cast<long>(bits.size()) != need) {
        throw DimensionError("payload has " + std::to_string(bits.size()) + " bits, frame needs " +
                             std::to_string(need));
    }
    FrameGrid g;
    g.preamble.resize(spec.K_on, 2);
    g.preamble.col(0) = layout->pilot_values.cast<cplx>();
    g.preamble.col(1) = g.preamble.col(0);
    g.symbols = CMatrix::Zero(spec.K_on, spec.I);

    const auto& c = constellation(spec.M);
    const auto b = static_cast<std::size_t>(c.bits_per_symbol());
    std::size_t cursor = 0;
    for (int i = 0; i < spec.I; ++i) {
        for (int k : layout->pilot_positions[static_cast<std::size_t>(i)]) {
            g.symbols(k, i) = layout->pilot_values(k);
        }
        for (int k : layout->data_positions[static_cast<std::size_t>(i)]) {
            g.symbols(k, i) = c.map(std::span(bits).subspan(cursor, b));
            cursor += b;
        }
    }
    g.payload_bits = bits;
    g.layout = std::move(layout);
    return g;
}

inline FrameGrid build_frame(const FrameSpec& spec, const BitVector& bits)
{
    return build_frame(make_layout(spec), bits);
}

inline FrameGrid build_random_frame(std::shared_ptr<const FrameLayout> layout, std::uint64_t seed)
{
    const auto n = static_cast<std::size_t>(payload_bit_count(layout->spec));
    return build_frame(std::move(layout), random_bits(n, seed));
}

struct TdrResult {
    double bits_per_second = 0.0;
    double gain = 0.0; // fractional, relative to the standard layout

    [[nodiscard]] double gain_pct() const { return 100.0 * gain; }
    /// Gain in percent truncated (not rounded) to two decimals, as tabulated.
    [[nodiscard]] double gain_pct_2dp() const { return std::trunc(gain_pct() * 100.0 + 1e-9) / 100.0; }
};

inline TdrResult tdr(const FrameSpec& spec)
{
    spec.validate();
    auto rate = [](const FrameSpec& s) {
        return static_cast<double>(data_subcarrier_count(s)) * std::log2(static_cast<double>(s.M)) * s.rho /
               (s.T_s * s.I);
    };
    FrameSpec ref = spec;
    ref.P = 0;
    TdrResult r;
    r.bits_per_second = rate(spec);
    r.gain = r.bits_per_second / rate(ref) - 1.0;
    return r;
}

/// Receiver buffering time in microseconds: the longest subframe must arrive
/// before estimation starts.
inline double buffering_time_us(const FrameSpec& spec)
{
    spec.validate();
    const int symbols = spec.P <= 1 ? spec.I : (spec.I + spec.P - 1) / spec.P;
    // whole nanoseconds keep 100 x 8 us an exact 800
    return symbols * std::round(spec.T_s * 1e9) / 1e3;
}

} // namespace wice
