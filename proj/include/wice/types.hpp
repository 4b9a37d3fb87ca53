// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wice {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using BitVector = std::vector<std::uint8_t>;

inline constexpr double pi = std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated binary container.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Resource-element coordinate: active-band position k, symbol index i.
struct Cell {
    int k = 0;
    int i = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Real-valued operation tally.
struct OpCount {
    std::int64_t mul_div = 0;
    std::int64_t sum_sub = 0;

    [[nodiscard]] std::int64_t total() const { return mul_div + sum_sub; }

    OpCount& operator+=(const OpCount& o)
    {
        mul_div += o.mul_div;
        sum_sub += o.sum_sub;
        return *this;
    }
    friend OpCount operator+(OpCount a, const OpCount& b) { return a += b; }
    friend OpCount operator*(std::int64_t s, OpCount a)
    {
        a.mul_div *= s;
        a.sum_sub *= s;
        return a;
    }
    friend bool operator==(const OpCount&, const OpCount&) = default;
};

/// Channel estimate over the K_on x I grid of a frame.
struct EstimateGrid {
    CMatrix H_hat;
    std::string method;
    OpCount ops{};
};

} // namespace wice
