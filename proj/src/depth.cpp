#include "sodkit/depth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace sodkit {

DepthMap::DepthMap(int h, int w, std::uint8_t fill) : height(h), width(w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("DepthMap dims must be positive");
    intensities.assign(static_cast<std::size_t>(h) * w, fill);
}

void EnhanceConfig::validate() const {
    if (!(lambda1 > 0.0 && lambda1 <= 1.0 && lambda2 >= 1.0))
        throw std::invalid_argument("EnhanceConfig requires 0 < lambda1 <= 1 <= lambda2");
}

OtsuResult otsu_threshold(const DepthMap& depth) {
    if (depth.intensities.empty())
        throw std::invalid_argument("otsu_threshold: empty depth map");

    std::int64_t hist[256] = {0};
    for (std::uint8_t v : depth.intensities) ++hist[v];

    int lo = 0, hi = 255;
    while (hist[lo] == 0) ++lo;
    while (hist[hi] == 0) --hi;
    if (lo == hi) return {lo, true};

    const std::int64_t total = static_cast<std::int64_t>(depth.intensities.size());
    std::int64_t sum_all = 0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<std::int64_t>(v) * hist[v];

    // Class 0 is I < t, class 1 is I >= t; running prefix sums.
    int best_t = lo;
    double best_var = -1.0;
    std::int64_t n0 = 0, s0 = 0;
    for (int t = 0; t <= 255; ++t) {
        const std::int64_t n1 = total - n0;
        if (n0 > 0 && n1 > 0) {
            const std::int64_t s1 = sum_all - s0;
            const double diff = static_cast<double>(s0 * n1 - s1 * n0);
            const double var = diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
            if (var > best_var) {
                best_var = var;
                best_t = t;
            }
        }
        n0 += hist[t];
        s0 += static_cast<std::int64_t>(t) * hist[t];
    }
    return {best_t, false};
}

DepthMap enhance_depth(const DepthMap& depth, const EnhanceConfig& cfg, int t_star) {
    cfg.validate();
    if (t_star < 0 || t_star > 255)
        throw std::invalid_argument("enhance_depth: threshold out of [0,255]");
    DepthMap out(depth.height, depth.width);
    for (std::size_t i = 0; i < depth.intensities.size(); ++i) {
        const double scale = depth.intensities[i] < t_star ? cfg.lambda1 : cfg.lambda2;
        const double scaled = scale * depth.intensities[i];
        const double rounded = std::floor(scaled + 0.5);  // values are non-negative
        out.intensities[i] = static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
    }
    return out;
}

namespace {

// Min-max normalize a raw channel to [0,255]; constant channels keep their
// (clamped) raw value. `skip` marks pixels excluded from the min/max and
// forced to 255 afterwards.
std::vector<std::uint8_t> normalize_channel(const std::vector<double>& raw,
                                            const std::vector<bool>* skip = nullptr) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (skip && (*skip)[i]) continue;
        lo = std::min(lo, raw[i]);
        hi = std::max(hi, raw[i]);
    }
    std::vector<std::uint8_t> out(raw.size());
    const bool constant = !(hi > lo);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (skip && (*skip)[i]) {
            out[i] = 255;
            continue;
        }
        double v = constant ? std::clamp(raw[i], 0.0, 255.0)
                            : (raw[i] - lo) / (hi - lo) * 255.0;
        out[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
    return out;
}

}  // namespace

HhaImage encode_hha(const DepthMap& depth, const std::optional<CameraIntrinsics>& camera) {
    const int H = depth.height, W = depth.width;
    const std::size_t n = static_cast<std::size_t>(H) * W;
    CameraIntrinsics cam = camera.value_or(CameraIntrinsics{
        static_cast<double>(std::max(H, W)), static_cast<double>(std::max(H, W)),
        W / 2.0, H / 2.0});

    std::vector<double> disparity(n), height_raw(n), angle_raw(n);
    std::vector<bool> zero_depth(n, false);
    int zero_count = 0;

    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            const double z = depth.at(y, x);
            if (z <= 0.0) {
                zero_depth[i] = true;
                ++zero_count;
                disparity[i] = 0.0;
            } else {
                disparity[i] = 1.0 / z;
            }
            // Back-projected camera y; gravity points image-down, so height
            // above ground grows toward the top of the image.
            height_raw[i] = -((y - cam.cy) / cam.fy) * z;

            // Central differences, one-sided at borders.
            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, W - 1);
            const int yu = std::max(y - 1, 0), yd = std::min(y + 1, H - 1);
            const double gx = (depth.at(y, xr) - static_cast<double>(depth.at(y, xl))) / (xr - xl > 0 ? xr - xl : 1);
            const double gy = (depth.at(yd, x) - static_cast<double>(depth.at(yu, x))) / (yd - yu > 0 ? yd - yu : 1);
            // Surface normal of z(x,y) is proportional to (-gx, -gy, 1).
            const double norm = std::sqrt(gx * gx + gy * gy + 1.0);
            const double ny = -gy / norm;
            // Gravity unit vector is (0,1,0) in image coordinates.
            const double angle = std::acos(std::clamp(ny, -1.0, 1.0));
            angle_raw[i] = angle / M_PI * 255.0;
        }
    }

    HhaImage out;
    out.height = H;
    out.width = W;
    out.zero_depth_pixels = zero_count;
    out.channels[0] = normalize_channel(disparity, &zero_depth);
    out.channels[1] = normalize_channel(height_raw);
    out.channels[2] = normalize_channel(angle_raw);
    return out;
}

HhaPipelineResult hha_e_pipeline(const DepthMap& depth, const EnhanceConfig& cfg) {
    HhaPipelineResult result;
    result.otsu = otsu_threshold(depth);
    result.enhanced = enhance_depth(depth, cfg, result.otsu.threshold);
    result.hha = encode_hha(result.enhanced);
    return result;
}

}  // namespace sodkit
