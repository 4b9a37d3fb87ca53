// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <Eigen/LU>

#include "wice/baseline.hpp"
#include "wice/metrics.hpp"

using namespace wice;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

CVector random_cvector(Eigen::Index n, std::uint64_t seed)
{
    Rng rng(seed);
    CVector v(n);
    for (auto& x : v) {
        x = complex_gaussian(rng);
    }
    return v;
}

// E[h(k,i) h*(k',i')] written out term by term
cplx brute_corr(const TdlProfile& p, int sk, int si, int sk2, int si2)
{
    const auto pw = p.tap_powers();
    cplx f{0, 0};
    for (std::size_t l = 0; l < pw.size(); ++l) {
        f += pw[l] * std::exp(cplx(0, -2.0 * pi * (sk - sk2) * 156.25e3 * p.delays_ns[l] * 1e-9));
    }
    return std::cyl_bessel_j(0.0, 2.0 * pi * p.doppler_hz * std::abs(si - si2) * 8e-6) * f;
}

} // namespace

TEST_CASE("preamble LS")
{
    const RVector p = training_sequence(52);
    const CVector h = random_cvector(52, 1);
    const CVector y = h.cwiseProduct(p.cast<cplx>());
    CHECK((ls_preamble(y, y, p) - h).norm() < 1e-14);

    const RVector ones = RVector::Ones(52);
    const CVector c = CVector::Constant(52, cplx(0.3, -2));
    CHECK((ls_preamble(c, c, ones) - c).norm() == 0.0);

    RVector zero = ones;
    zero(3) = 0.0;
    CHECK_THROWS_AS(ls_preamble(c, c, zero), Error);
    CHECK_THROWS_AS(ls_preamble(c, c.head(51), ones), DimensionError);
}

TEST_CASE("preamble averaging halves the noise")
{
    FrameSpec spec;
    spec.I = 2;
    const auto layout = make_layout(spec);
    const double sigma2 = noise_variance(10.0);
    double err2 = 0.0;
    double err1 = 0.0;
    long n = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto s = derive_seed(21, static_cast<std::uint64_t>(t));
        const auto ch = sample_channel(vtv_uc(), spec, s);
        FrameGrid tx;
        tx.layout = layout;
        tx.preamble = layout->pilot_values.cast<cplx>().replicate(1, 2);
        tx.symbols = CMatrix::Ones(52, 2);
        const auto rx = apply_channel(tx, ch, 10.0);
        const CVector h0 = ch.H.col(0);
        err2 += (ls_preamble(rx) - h0).squaredNorm();
        err1 += (rx.preamble.col(0).cwiseQuotient(layout->pilot_values.cast<cplx>()) - h0).squaredNorm();
        n += 52;
    }
    CHECK_THAT(err2 / n, WithinRel(sigma2 / 2.0, 0.05));
    CHECK_THAT(err1 / err2, WithinRel(2.0, 0.1));
}

TEST_CASE("LMMSE matches a dense evaluation on a 4 x 3 grid")
{
    const TdlProfile p{"toy", {0, 150, 420}, {0, -4, -9}, 700.0, 0};
    FrameSpec spec;
    const auto corr = ChannelCorrelation::from_profile(p, spec);
    const std::vector<int> sc{-2, -1, 1, 2};
    const std::vector<Cell> pilots{{0, 0}, {3, 0}, {1, 1}, {2, 2}, {0, 2}};
    const double sigma2 = 0.05;
    const LmmseInterpolator lmmse(corr, sc, 3, pilots, sigma2, 100);

    // vec order: k fastest, then symbol
    const int n = 12;
    const auto np = static_cast<Eigen::Index>(pilots.size());
    CMatrix Rhp(n, np);
    CMatrix Rpp(np, np);
    for (int c = 0; c < n; ++c) {
        for (Eigen::Index b = 0; b < np; ++b) {
            const auto& pb = pilots[static_cast<std::size_t>(b)];
            Rhp(c, b) = brute_corr(p, sc[static_cast<std::size_t>(c % 4)], c / 4, sc[static_cast<std::size_t>(pb.k)], pb.i);
        }
    }
    for (Eigen::Index a = 0; a < np; ++a) {
        for (Eigen::Index b = 0; b < np; ++b) {
            const auto& pa = pilots[static_cast<std::size_t>(a)];
            const auto& pb = pilots[static_cast<std::size_t>(b)];
            Rpp(a, b) = brute_corr(p, sc[static_cast<std::size_t>(pa.k)], pa.i, sc[static_cast<std::size_t>(pb.k)], pb.i);
        }
    }
    const CMatrix W = Rhp * (Rpp + sigma2 * CMatrix::Identity(np, np)).fullPivLu().inverse();
    const CVector h_ls = random_cvector(np, 4);
    const CVector oracle = W * h_ls;
    const CVector got = lmmse.estimate(h_ls).reshaped();
    CHECK((got - oracle).norm() / oracle.norm() < 1e-10);
    CHECK(!lmmse.jitter_applied());
}

TEST_CASE("LMMSE without noise passes through colocated pilots")
{
    const auto p = vtv_sdww(500);
    const auto corr = ChannelCorrelation::from_profile(p, FrameSpec{});
    const auto layout = make_layout(FrameSpec{});
    const auto pilots = layout->pilot_cells();
    const LmmseInterpolator lmmse(corr, layout->subcarriers, 100, pilots, 1e-9, 10);
    const auto ch = sample_channel(p, FrameSpec{}, 5);
    CVector h_ls(static_cast<Eigen::Index>(pilots.size()));
    for (std::size_t n = 0; n < pilots.size(); ++n) {
        h_ls(static_cast<Eigen::Index>(n)) = ch.data_region()(pilots[n].k, pilots[n].i);
    }
    const CMatrix H = lmmse.estimate(h_ls);
    for (std::size_t n = 0; n < pilots.size(); n += 37) {
        CHECK(std::abs(H(pilots[n].k, pilots[n].i) - h_ls(static_cast<Eigen::Index>(n))) < 1e-5);
    }
}

TEST_CASE("LMMSE jitter on a singular pilot correlation")
{
    const auto corr = ChannelCorrelation::from_profile(vtv_uc(), FrameSpec{});
    const std::vector<Cell> dup{{0, 0}, {0, 0}, {3, 1}};
    const LmmseInterpolator lmmse(corr, {-2, -1, 1, 2}, 2, dup, 0.0, 100);
    CHECK(lmmse.jitter_applied());
    CHECK_THROWS_AS(LmmseInterpolator(corr, {-2, -1, 1, 2}, 2, dup, 0.0, 0), Error);
    CHECK_THROWS_AS(LmmseInterpolator(corr, {-2, -1, 1, 2}, 20, dup, 0.0, 10), Error);
}

TEST_CASE("LMMSE beats the pilot LS it consumes, and the long window beats the short one")
{
    const auto p = vtv_sdww(500);
    const FrameSpec spec;
    const auto layout = make_layout(spec);
    const auto corr = ChannelCorrelation::from_profile(p, spec);
    const auto pilots = layout->pilot_cells();
    for (double snr : {0.0, 10.0, 20.0, 30.0}) {
        const LmmseInterpolator full(corr, layout->subcarriers, spec.I, pilots, noise_variance(snr), 100);
        const LmmseInterpolator ten(corr, layout->subcarriers, spec.I, pilots, noise_variance(snr), 10);
        double e_ls = 0.0;
        double e_lmmse = 0.0;
        double e_full = 0.0;
        double e_ten = 0.0;
        for (int n = 0; n < 60; ++n) {
            const auto s = derive_seed(31, static_cast<std::uint64_t>(n));
            const auto ch = sample_channel(p, spec, s);
            const auto rx = apply_channel(build_random_frame(layout, s), ch, snr);
            const CVector ls = pilot_ls(rx);
            const CMatrix Hf = full.estimate(ls);
            const CMatrix H = ch.data_region();
            for (std::size_t c = 0; c < pilots.size(); ++c) {
                const auto [k, i] = pilots[c];
                e_ls += std::norm(ls(static_cast<Eigen::Index>(c)) - H(k, i));
                e_lmmse += std::norm(Hf(k, i) - H(k, i));
            }
            e_full += nmse(Hf, H);
            e_ten += nmse(ten.estimate(ls), H);
        }
        CHECK(e_lmmse <= e_ls);
        CHECK(e_full < e_ten);
    }
}

TEST_CASE("RBF kernel and exact interpolation")
{
    CHECK(rbf_kernel(0, 0, 3.0) == 1.0);
    CHECK_THAT(rbf_kernel(1, 2, 9.0), WithinAbs(std::exp(-1.0), 1e-15));

    const auto layout = make_layout(FrameSpec{});
    const auto pilots = layout->pilot_cells();
    const RbfInterpolator rbf(pilots, 52, 100, default_rbf_r0);
    const CVector h = random_cvector(static_cast<Eigen::Index>(pilots.size()), 9);
    const CVector w = rbf.weights(h);
    const CVector Aw = rbf.interpolation_matrix().cast<cplx>() * w;
    CHECK((Aw - h).norm() <= 1e-8 * h.norm());
    const CMatrix H = rbf.interpolate(w);
    for (std::size_t n = 0; n < pilots.size(); n += 11) {
        CHECK(std::abs(H(pilots[n].k, pilots[n].i) - h(static_cast<Eigen::Index>(n))) < 1e-8);
    }
    CHECK(rbf.rcond() > 0.0);
    CHECK_THROWS_AS(RbfInterpolator(pilots, 52, 100, 0.0), Error);
    CHECK_THROWS_AS(rbf.weights(h.head(3)), DimensionError);
}

TEST_CASE("RBF matches a dense oracle on a 2 x 2 pilot toy")
{
    const std::vector<Cell> pilots{{1, 0}, {4, 0}, {1, 3}, {4, 3}};
    const double r0 = 6.0;
    const RbfInterpolator rbf(pilots, 6, 4, r0);
    const CVector h = random_cvector(4, 12);
    Eigen::Matrix4d A;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const double x = std::abs(pilots[a].k - pilots[b].k);
            const double y = std::abs(pilots[a].i - pilots[b].i);
            A(a, b) = std::exp(-(x + y) * (x + y) / r0);
        }
    }
    const Eigen::Vector4cd w = A.cast<cplx>().inverse() * h;
    const CMatrix H = rbf.estimate(h);
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 6; ++k) {
            cplx v{0, 0};
            for (int j = 0; j < 4; ++j) {
                const double x = std::abs(k - pilots[j].k);
                const double y = std::abs(i - pilots[j].i);
                v += w(j) * std::exp(-(x + y) * (x + y) / r0);
            }
            CHECK(std::abs(H(k, i) - v) < 1e-10 * std::max(1.0, std::abs(v)));
        }
    }
}

TEST_CASE("ADD-TT parameters and frequency averaging")
{
    AddTtParams p;
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.beta = -1;
    CHECK_THROWS_AS(p.validate(), Error);

    const CVector h = random_cvector(52, 3);
    CHECK(frequency_average(h, 0) == h);
    const CVector a = frequency_average(h, 2);
    CHECK(std::abs(a(10) - h.segment(8, 5).mean()) < 1e-15);
    CHECK(std::abs(a(0) - h.segment(0, 3).mean()) < 1e-15);
    CHECK(std::abs(a(51) - h.segment(49, 3).mean()) < 1e-15);
}

TEST_CASE("ADD-TT fixed point on a static L-tap channel")
{
    const auto layout = make_layout(FrameSpec{});
    const auto dft = make_dft_matrices(layout->subcarriers, 64, 12);
    const CVector g = random_cvector(12, 8);
    const CVector h = dft.F_on * g;
    const auto tx = build_random_frame(layout, 2);
    FrameGrid rx = tx;
    rx.symbols = h.replicate(1, 100).cwiseProduct(tx.symbols);
    AddTtParams p;
    p.beta = 0;
    const auto est = add_tt(rx, h, p, dft);
    CHECK((est.H_hat - h.replicate(1, 100)).norm() < 1e-10 * h.norm());
    CHECK(equalize_and_demap(rx, est.H_hat) == tx.payload_bits);

    // a flat channel survives the default frequency window too
    const CVector flat = CVector::Constant(52, cplx(0.6, -0.8));
    rx.symbols = flat.replicate(1, 100).cwiseProduct(tx.symbols);
    const auto est2 = add_tt(rx, flat, AddTtParams{}, dft);
    CHECK((est2.H_hat - flat.replicate(1, 100)).norm() < 1e-10);
}

TEST_CASE("ADD-TT with alpha = 1 keeps only the current symbol")
{
    const auto spec = FrameSpec{};
    const auto layout = make_layout(spec);
    const auto dft = make_dft_matrices(layout->subcarriers, 64, 12);
    const auto ch = sample_channel(vtv_sdww(1000), spec, 4);
    const auto rx = apply_channel(build_random_frame(layout, 4), ch, 25.0);
    AddTtParams p;
    p.alpha = 1.0;
    const auto est = add_tt(rx, ls_preamble(rx), p, dft);
    // replay symbol 40 by hand from the symbol-39 estimate
    const CVector prev = est.H_hat.col(39);
    CVector d(52);
    for (int k = 0; k < 52; ++k) {
        const auto& pp = layout->pilot_positions[40];
        d(k) = std::ranges::find(pp, k) != pp.end() ? cplx(layout->pilot_values(k), 0)
                                                    : demap_hard(rx.symbols(k, 40) / prev(k), 4).point;
    }
    const CVector hdd = rx.symbols.col(40).cwiseQuotient(d);
    const CVector ftt = frequency_average(dft.W_als * hdd, 2);
    CHECK((est.H_hat.col(40) - ftt).norm() < 1e-10);
    // the truncated estimate lies in the L-tap subspace
    CHECK(((CMatrix::Identity(52, 52) - dft.W_als) * (dft.W_als * hdd)).norm() < 1e-10 * hdd.norm());
    CHECK_THROWS_AS(add_tt(rx, ls_preamble(rx).head(10), p, dft), DimensionError);
}
