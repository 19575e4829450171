#ifndef SODKIT_DEPTH_HPP
#define SODKIT_DEPTH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace sodkit {

struct DepthMap {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> intensities;  // row-major, length = height*width

    DepthMap() = default;
    DepthMap(int h, int w, std::uint8_t fill = 0);
    std::uint8_t at(int y, int x) const { return intensities[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return intensities[static_cast<std::size_t>(y) * width + x]; }
};

struct EnhanceConfig {
    double lambda1 = 0.8;  // scale below threshold
    double lambda2 = 1.2;  // scale at/above threshold

    void validate() const;
};

struct CameraIntrinsics {
    double fx, fy, cx, cy;
};

// Three 8-bit channels: disparity, height above ground, normal-gravity angle.
struct HhaImage {
    int height = 0;
    int width = 0;
    std::array<std::vector<std::uint8_t>, 3> channels;
    int zero_depth_pixels = 0;  // pixels whose disparity channel saturated
};

struct OtsuResult {
    int threshold = 0;  // in [0,255]
    bool degenerate = false;  // constant image; threshold is that constant
};

// Maximizes between-class variance over the 256-bin histogram; ties broken
// by the smallest threshold.
OtsuResult otsu_threshold(const DepthMap& depth);

// Pixels below t_star scaled by lambda1, at/above by lambda2; rounded
// half-away-from-zero, clamped to [0,255].
DepthMap enhance_depth(const DepthMap& depth, const EnhanceConfig& cfg, int t_star);

// Simplified geocentric encoding. Default intrinsics: fx=fy=max(H,W),
// cx=W/2, cy=H/2; gravity is image-down.
HhaImage encode_hha(const DepthMap& depth,
                    const std::optional<CameraIntrinsics>& camera = std::nullopt);

struct HhaPipelineResult {
    OtsuResult otsu;
    DepthMap enhanced;
    HhaImage hha;
};

HhaPipelineResult hha_e_pipeline(const DepthMap& depth, const EnhanceConfig& cfg);

}  // namespace sodkit

#endif
