// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wice/types.hpp"

namespace wice {

/// Gray-mapped square constellation (QPSK or 16-QAM) with unit average energy.
///
/// Bits are grouped per symbol, first half on the in-phase axis, second half on
/// quadrature. Within an axis the leading bit selects the sign (0 -> positive)
/// and the remaining bit, if any, selects the Gray-coded amplitude level. The
/// point index is the bit group read MSB-first.
class Constellation {
public:
    explicit Constellation(int order) : order_(order)
    {
        if (order == 4) {
            bits_ = 2;
        } else if (order == 16) {
            bits_ = 4;
        } else {
            throw Error("unsupported modulation order " + std::to_string(order));
        }
        const int half = bits_ / 2;
        const double scale = order == 4 ? 1.0 / std::sqrt(2.0) : 1.0 / std::sqrt(10.0);
        points_.resize(static_cast<std::size_t>(order));
        for (int idx = 0; idx < order; ++idx) {
            const int ibits = idx >> half;
            const int qbits = idx & ((1 << half) - 1);
            points_[static_cast<std::size_t>(idx)] =
                cplx(axis_level(ibits, half), axis_level(qbits, half)) * scale;
        }
    }

    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] int bits_per_symbol() const { return bits_; }
    [[nodiscard]] std::span<const cplx> points() const { return points_; }

    [[nodiscard]] cplx map(std::span<const std::uint8_t> bits) const
    {
        return points_[static_cast<std::size_t>(index_of(bits))];
    }

    /// Nearest point in Euclidean distance; ties go to the lowest index.
    [[nodiscard]] int nearest(cplx y) const
    {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int idx = 0; idx < order_; ++idx) {
            const double d = std::norm(y - points_[static_cast<std::size_t>(idx)]);
            if (d < best_d) {
                best_d = d;
                best = idx;
            }
        }
        return best;
    }

    void bits_of(int idx, std::span<std::uint8_t> out) const
    {
        for (int b = 0; b < bits_; ++b) {
            out[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((idx >> (bits_ - 1 - b)) & 1);
        }
    }

private:
    static double axis_level(int bits, int nbits)
    {
        if (nbits == 1) {
            return bits == 0 ? 1.0 : -1.0;
        }
        // sign bit, then Gray amplitude: 0 -> outer (3), 1 -> inner (1)
        const int sign = (bits >> 1) & 1;
        const int amp = bits & 1;
        const double level = amp == 0 ? 3.0 : 1.0;
        return sign == 0 ? level : -level;
    }

    [[nodiscard]] int index_of(std::span<const std::uint8_t> bits) const
    {
        if (static_cast<int>(bits.size()) != bits_) {
            throw DimensionError("bit group size does not match constellation");
        }
        int idx = 0;
        for (auto b : bits) {
            idx = (idx << 1) | (b & 1);
        }
        return idx;
    }

    int order_;
    int bits_ = 0;
    std::vector<cplx> points_;
};

inline const Constellation& constellation(int order)
{
    static const Constellation qpsk(4);
    static const Constellation qam16(16);
    if (order == 4) {
        return qpsk;
    }
    if (order == 16) {
        return qam16;
    }
    throw Error("unsupported modulation order " + std::to_string(order));
}

inline std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, int order)
{
    const auto& c = constellation(order);
    const auto b = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % b != 0) {
        throw DimensionError("bit count is not a multiple of bits per symbol");
    }
    std::vector<cplx> out(bits.size() / b);
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = c.map(bits.subspan(n * b, b));
    }
    return out;
}

struct HardDecision {
    cplx point;
    int index = 0;
    std::array<std::uint8_t, 4> bits{};
};

inline HardDecision demap_hard(cplx y, int order)
{
    const auto& c = constellation(order);
    HardDecision d;
    d.index = c.nearest(y);
    d.point = c.points()[static_cast<std::size_t>(d.index)];
    c.bits_of(d.index, std::span(d.bits).first(static_cast<std::size_t>(c.bits_per_symbol())));
    return d;
}

} // namespace wice
