// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "wice/types.hpp"
#include "wice/wi.hpp"

namespace wice {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

/// [Re(H); Im(H)], 2K x N.
inline RMatrix complex_stack(const CMatrix& H)
{
    RMatrix R(2 * H.rows(), H.cols());
    R.topRows(H.rows()) = H.real();
    R.bottomRows(H.rows()) = H.imag();
    return R;
}

inline CMatrix complex_unstack(const RMatrix& R)
{
    if (R.rows() % 2 != 0) {
        throw DimensionError("stacked matrix needs an even row count");
    }
    const auto K = R.rows() / 2;
    CMatrix H(K, R.cols());
    H.real() = R.topRows(K);
    H.imag() = R.bottomRows(K);
    return H;
}

struct DatasetRecord {
    RMatrix input;  // 2K_on x I_d
    RMatrix target; // empty for prediction files
};

struct Dataset {
    int K_on = 0;
    int I_d = 0;
    bool has_target = true;
    std::vector<DatasetRecord> records;
};

inline constexpr std::array<char, 4> dataset_magic{'W', 'I', 'C', 'E'};
inline constexpr std::array<char, 4> weight_table_magic{'W', 'I', 'W', 'T'};
inline constexpr std::uint16_t container_version = 1;
inline constexpr std::uint16_t flag_has_target = 1U << 0U;
inline constexpr std::uint16_t flag_float64 = 1U << 1U;

namespace detail {

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, const std::string& what)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError("truncated file while reading " + what);
    }
    return v;
}

// Row-major float32 payload.
inline void put_matrix_f32(std::ostream& os, const RMatrix& m)
{
    std::vector<float> buf(static_cast<std::size_t>(m.size()));
    std::size_t n = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            buf[n++] = static_cast<float>(m(r, c));
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline RMatrix get_matrix_f32(std::istream& is, Eigen::Index rows, Eigen::Index cols)
{
    std::vector<float> buf(static_cast<std::size_t>(rows * cols));
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
        throw FormatError("truncated record payload");
    }
    RMatrix m(rows, cols);
    std::size_t n = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = buf[n++];
        }
    }
    return m;
}

inline void check_magic(std::istream& is, const std::array<char, 4>& want)
{
    std::array<char, 4> got{};
    if (!is.read(got.data(), 4)) {
        throw FormatError("truncated file header");
    }
    if (got != want) {
        throw FormatError("bad magic: expected '" + std::string(want.data(), 4) + "'");
    }
}

} // namespace detail

inline void write_dataset(std::ostream& os, const Dataset& ds)
{
    if (ds.K_on <= 0 || ds.I_d <= 0 || ds.K_on > 0xFFFF || ds.I_d > 0xFFFF) {
        throw DimensionError("dataset dimensions out of range");
    }
    const Eigen::Index rows = 2 * ds.K_on;
    for (const auto& r : ds.records) {
        if (r.input.rows() != rows || r.input.cols() != ds.I_d) {
            throw DimensionError("record input does not match the dataset dimensions");
        }
        if (ds.has_target && (r.target.rows() != rows || r.target.cols() != ds.I_d)) {
            throw DimensionError("record target does not match the dataset dimensions");
        }
        if (!r.input.allFinite() || (ds.has_target && !r.target.allFinite())) {
            throw Error("dataset records must be finite");
        }
    }
    os.write(dataset_magic.data(), 4);
    detail::put<std::uint16_t>(os, container_version);
    detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(ds.K_on));
    detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(ds.I_d));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.records.size()));
    detail::put<std::uint16_t>(os, ds.has_target ? flag_has_target : std::uint16_t{0});
    for (const auto& r : ds.records) {
        detail::put_matrix_f32(os, r.input);
        if (ds.has_target) {
            detail::put_matrix_f32(os, r.target);
        }
    }
    if (!os) {
        throw Error("write failed");
    }
}

inline Dataset read_dataset(std::istream& is)
{
    detail::check_magic(is, dataset_magic);
    const auto version = detail::get<std::uint16_t>(is, "version");
    if (version != container_version) {
        throw FormatError("unsupported container version " + std::to_string(version));
    }
    Dataset ds;
    ds.K_on = detail::get<std::uint16_t>(is, "K_on");
    ds.I_d = detail::get<std::uint16_t>(is, "I_d");
    const auto count = detail::get<std::uint32_t>(is, "record count");
    const auto flags = detail::get<std::uint16_t>(is, "flags");
    if (flags & ~flag_has_target) {
        throw FormatError("unknown dataset flags");
    }
    if (ds.K_on == 0 || ds.I_d == 0) {
        throw FormatError("zero dataset dimension in header");
    }
    ds.has_target = (flags & flag_has_target) != 0;
    ds.records.reserve(count);
    for (std::uint32_t n = 0; n < count; ++n) {
        DatasetRecord r;
        r.input = detail::get_matrix_f32(is, 2 * ds.K_on, ds.I_d);
        if (ds.has_target) {
            r.target = detail::get_matrix_f32(is, 2 * ds.K_on, ds.I_d);
        }
        ds.records.push_back(std::move(r));
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after the last record");
    }
    return ds;
}

inline void write_dataset(const std::string& path, const Dataset& ds)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("cannot open '" + path + "' for writing");
    }
    write_dataset(os, ds);
}

inline Dataset read_dataset(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot open '" + path + "'");
    }
    return read_dataset(is);
}

// ---------------------------------------------------------------------------
// Weight-table cache: same header layout, float64 payload. Each entry is
// u16 I_f, then f_d, T_s, E_q, E_q1, then the 2 x I_f weights row-major.

inline void write_weight_table(std::ostream& os, const WiWeightTable& table)
{
    os.write(weight_table_magic.data(), 4);
    detail::put<std::uint16_t>(os, container_version);
    detail::put<std::uint16_t>(os, 2);
    detail::put<std::uint16_t>(os, 0);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(table.size()));
    detail::put<std::uint16_t>(os, flag_float64);
    for (const auto& [key, C] : table.entries()) {
        detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(key.I_f));
        for (double v : {key.doppler_hz, key.T_s, key.E_q, key.E_q1}) {
            detail::put<double>(os, v);
        }
        for (Eigen::Index r = 0; r < C.rows(); ++r) {
            for (Eigen::Index c = 0; c < C.cols(); ++c) {
                detail::put<double>(os, C(r, c));
            }
        }
    }
    if (!os) {
        throw Error("write failed");
    }
}

inline WiWeightTable read_weight_table(std::istream& is)
{
    detail::check_magic(is, weight_table_magic);
    if (detail::get<std::uint16_t>(is, "version") != container_version) {
        throw FormatError("unsupported weight-table version");
    }
    if (detail::get<std::uint16_t>(is, "rows") != 2) {
        throw FormatError("weight tables hold 2-row matrices");
    }
    detail::get<std::uint16_t>(is, "reserved");
    const auto count = detail::get<std::uint32_t>(is, "entry count");
    if (detail::get<std::uint16_t>(is, "flags") != flag_float64) {
        throw FormatError("weight tables must use the float64 payload flag");
    }
    WiWeightTable table;
    for (std::uint32_t n = 0; n < count; ++n) {
        WiWeightTable::Key key;
        key.I_f = detail::get<std::uint16_t>(is, "I_f");
        key.doppler_hz = detail::get<double>(is, "f_d");
        key.T_s = detail::get<double>(is, "T_s");
        key.E_q = detail::get<double>(is, "E_q");
        key.E_q1 = detail::get<double>(is, "E_q1");
        if (key.I_f < 1) {
            throw FormatError("weight entry with empty subframe");
        }
        RMatrix C(2, key.I_f);
        for (Eigen::Index r = 0; r < 2; ++r) {
            for (Eigen::Index c = 0; c < key.I_f; ++c) {
                C(r, c) = detail::get<double>(is, "weights");
            }
        }
        table.insert(key, std::move(C));
    }
    return table;
}

} // namespace wice
