#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "sodkit/depth.hpp"
#include "sodkit/weights.hpp"

using namespace sodkit;

TEST_CASE("otsu on a bimodal map matches the exhaustive scan") {
    DepthMap d(8, 8);
    for (int i = 0; i < 32; ++i) d.intensities[i] = 50;
    for (int i = 32; i < 64; ++i) d.intensities[i] = 200;
    const OtsuResult r = otsu_threshold(d);
    CHECK_FALSE(r.degenerate);
    CHECK(r.threshold > 50);
    CHECK(r.threshold <= 200);
    CHECK(r.threshold == oracle::otsu_exhaustive(d));
}

TEST_CASE("otsu constant image is degenerate") {
    DepthMap d(4, 4, 100);
    const OtsuResult r = otsu_threshold(d);
    CHECK(r.degenerate);
    CHECK(r.threshold == 100);
}

TEST_CASE("otsu tie-break picks the smallest maximizer") {
    // only values 0 and 255: every t in [1,255] attains the same variance
    DepthMap d(4, 4);
    for (int i = 0; i < 8; ++i) d.intensities[i] = 0;
    for (int i = 8; i < 16; ++i) d.intensities[i] = 255;
    const OtsuResult r = otsu_threshold(d);
    CHECK(r.threshold == 1);
    CHECK(r.threshold == oracle::otsu_exhaustive(d));
}

TEST_CASE("otsu equals exhaustive scan on seeded random maps") {
    SplitMix64 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        DepthMap d(16, 16);
        for (auto& v : d.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);
        CHECK(otsu_threshold(d).threshold == oracle::otsu_exhaustive(d));
    }
}

TEST_CASE("enhance scaling, clamping, identity") {
    const EnhanceConfig cfg{0.8, 1.2};
    DepthMap d(1, 2);
    d.intensities = {100, 250};
    const DepthMap out = enhance_depth(d, cfg, 128);
    CHECK(out.intensities[0] == 80);   // 0.8 * 100
    CHECK(out.intensities[1] == 255);  // clamped from 300

    const EnhanceConfig unit{1.0, 1.0};
    DepthMap all(16, 16);
    for (int i = 0; i < 256; ++i) all.intensities[i] = static_cast<std::uint8_t>(i);
    const DepthMap same = enhance_depth(all, unit, 77);
    CHECK(same.intensities == all.intensities);
}

TEST_CASE("enhance matches the per-pixel oracle and is monotone") {
    SplitMix64 rng(103);
    const EnhanceConfig cfg{0.7, 1.3};
    DepthMap d(12, 12);
    for (auto& v : d.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);
    const DepthMap out = enhance_depth(d, cfg, 90);
    CHECK(out.intensities == oracle::enhance_naive(d, 0.7, 1.3, 90));

    // monotone per pixel for fixed threshold
    for (int t_star : {0, 64, 200, 255}) {
        int prev = -1;
        for (int v = 0; v < 256; ++v) {
            DepthMap one(1, 1, static_cast<std::uint8_t>(v));
            const int mapped = enhance_depth(one, cfg, t_star).intensities[0];
            CHECK(mapped >= prev);
            prev = mapped;
        }
    }
}

TEST_CASE("enhance config validation") {
    CHECK_THROWS_AS((EnhanceConfig{1.4, 1.2}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((EnhanceConfig{0.8, 0.9}.validate()), std::invalid_argument);
    DepthMap d(1, 1, 7);
    CHECK_THROWS_AS(enhance_depth(d, EnhanceConfig{}, 300), std::invalid_argument);
}

TEST_CASE("hha flat surface gives a constant angle channel") {
    DepthMap d(8, 8, 120);
    const HhaImage hha = encode_hha(d);
    const std::uint8_t first = hha.channels[2][0];
    for (std::uint8_t v : hha.channels[2]) CHECK(v == first);
    CHECK(hha.zero_depth_pixels == 0);
}

TEST_CASE("hha two-valued step depth yields a two-valued disparity channel") {
    DepthMap d(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) d.at(y, x) = x < 4 ? 60 : 180;
    const HhaImage hha = encode_hha(d);
    std::set<std::uint8_t> values(hha.channels[0].begin(), hha.channels[0].end());
    CHECK(values.size() == 2);
    // min-max normalization maps the extremes to 0 and 255 exactly
    CHECK(values.count(0) == 1);
    CHECK(values.count(255) == 1);
}

TEST_CASE("hha zero-depth pixels saturate and are counted") {
    DepthMap d(4, 4, 100);
    d.at(0, 0) = 0;
    d.at(3, 3) = 0;
    const HhaImage hha = encode_hha(d);
    CHECK(hha.zero_depth_pixels == 2);
    CHECK(hha.channels[0][0] == 255);
    CHECK(hha.channels[0][15] == 255);
}

TEST_CASE("hha ramp matches a per-pixel geometric reference") {
    const int H = 6, W = 6;
    DepthMap d(H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            d.at(y, x) = static_cast<std::uint8_t>(40 + 5 * x + 3 * y);
    const HhaImage hha = encode_hha(d);

    // independent scalar reference
    const double f = std::max(H, W);
    const double cy = H / 2.0;
    std::vector<double> disp(H * W), height(H * W), angle(H * W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double z = d.at(y, x);
            const int i = y * W + x;
            disp[i] = 1.0 / z;
            height[i] = -((y - cy) / f) * z;
            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, W - 1);
            const int yu = std::max(y - 1, 0), yd = std::min(y + 1, H - 1);
            const double gx = (d.at(y, xr) - static_cast<double>(d.at(y, xl))) / (xr - xl);
            const double gy = (d.at(yd, x) - static_cast<double>(d.at(yu, x))) / (yd - yu);
            const double ny = -gy / std::sqrt(gx * gx + gy * gy + 1.0);
            angle[i] = std::acos(ny) / M_PI * 255.0;
        }
    auto norm = [](const std::vector<double>& raw) {
        double lo = raw[0], hi = raw[0];
        for (double v : raw) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        std::vector<std::uint8_t> out(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double v = hi > lo ? (raw[i] - lo) / (hi - lo) * 255.0
                                     : std::clamp(raw[i], 0.0, 255.0);
            out[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
        return out;
    };
    CHECK(hha.channels[0] == norm(disp));
    CHECK(hha.channels[1] == norm(height));
    CHECK(hha.channels[2] == norm(angle));
}

TEST_CASE("hha-e pipeline composes the three stages") {
    SplitMix64 rng(107);
    DepthMap d(16, 16);
    for (auto& v : d.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);
    const EnhanceConfig cfg{0.8, 1.2};
    const HhaPipelineResult r = hha_e_pipeline(d, cfg);
    CHECK(r.otsu.threshold == oracle::otsu_exhaustive(d));
    CHECK(r.enhanced.intensities ==
          oracle::enhance_naive(d, cfg.lambda1, cfg.lambda2, r.otsu.threshold));
    const HhaImage direct = encode_hha(r.enhanced);
    for (int c = 0; c < 3; ++c) CHECK(r.hha.channels[c] == direct.channels[c]);

    // constant image passes through with the degenerate flag
    DepthMap flat(4, 4, 33);
    const HhaPipelineResult fr = hha_e_pipeline(flat, cfg);
    CHECK(fr.otsu.degenerate);

    // lambda1 = lambda2 = 1 makes the enhancement step the identity
    const HhaPipelineResult ur = hha_e_pipeline(d, EnhanceConfig{1.0, 1.0});
    CHECK(ur.enhanced.intensities == d.intensities);
}
