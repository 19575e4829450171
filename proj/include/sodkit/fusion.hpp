#ifndef SODKIT_FUSION_HPP
#define SODKIT_FUSION_HPP

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sodkit/depth.hpp"
#include "sodkit/image_io.hpp"
#include "sodkit/tensor.hpp"
#include "sodkit/weights.hpp"

namespace sodkit {

// Per-level side-output pairs (RGB stream, enhanced-depth stream) for
// levels 2..5; level i has spatial dims (M/2^(i-1), N/2^(i-1)).
struct FeaturePyramid {
    std::map<int, std::pair<Tensor, Tensor>> levels;
};

struct SaliencyOutput {
    Tensor final_map;               // 1 channel, values in (0,1)
    std::vector<Tensor> side_maps;  // one per pyramid layer, shallow to deep
};

// Instrumentation for the integration loop.
struct IntegrateTrace {
    int mlfm_calls = 0;
    int fim_calls = 0;
    std::vector<int> feedback_layers;  // layers where feedback summation ran
    int left_reuse_hits = 0;           // times an existing left feature was folded in
    std::vector<std::pair<int, int>> mlfm_input_counts;  // (call index -> input count)
};

// Deterministic stand-in for the backbone: pseudo-random per-level features
// from the seed alone. M and N must be divisible by 16.
FeaturePyramid backbone_stub(std::uint64_t seed, int input_h, int input_w,
                             int channel_width);

// Cross-modal fusion of one pyramid level: product of the two modality
// streams plus a residual refinement. Output has target_c channels at
// (target_h, target_w).
Tensor cmrm(const Tensor& s_rgb, const Tensor& s_hha, WeightStore& w,
            const std::string& site, int target_c, int target_h, int target_w);

struct MlfmResult {
    Tensor left;  // at the first (highest-resolution) input's resolution
    Tensor down;  // at (down_h, down_w)
};

// Multi-level fusion: inputs ordered low-level (highest resolution) first,
// high-level last; at least two inputs.
MlfmResult mlfm(const std::vector<Tensor>& inputs, WeightStore& w,
                const std::string& site, int down_h, int down_w);

struct FimResult {
    std::map<int, Tensor> feedback;  // level -> tensor at that level's shape
    Tensor side_map;                 // 1 channel, trunk resolution, in (0,1)
};

FimResult fim(const Tensor& f_2l, const std::vector<std::pair<int, Tensor>>& target_levels,
              WeightStore& w, const std::string& site);

// Runs the multi-level interactive integration over P pyramid layers.
// `features` maps level -> tensor for levels 2..P+1 with strictly halving
// resolutions. Output final map is at level-2 resolution.
SaliencyOutput integrate(const std::map<int, Tensor>& features, WeightStore& w,
                         int pyramid_layers = 4, IntegrateTrace* trace = nullptr);

struct ForwardConfig {
    int input_h = 352;
    int input_w = 352;
    int channel_width = 64;
    EnhanceConfig enhance;
    std::uint64_t seed = 0;
};

struct ForwardResult {
    SaliencyOutput saliency;  // maps upsampled to input resolution
    OtsuResult otsu;
    HhaImage hha;
};

// Full pipeline: depth enhancement + HHA encoding, stubbed backbones seeded
// from the image bytes, CMRM per level, then integration.
ForwardResult forward_full(const ImageU8& rgb, const DepthMap& depth, WeightStore& w,
                           const ForwardConfig& cfg);

}  // namespace sodkit

#endif
