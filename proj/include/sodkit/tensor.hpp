#ifndef SODKIT_TENSOR_HPP
#define SODKIT_TENSOR_HPP

#include <cstddef>
#include <vector>

namespace sodkit {

// Dense rank-3 feature map, row-major (channel, row, column).
struct Tensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int c, int h, int w, float fill = 0.0f);

    std::size_t size() const { return data.size(); }
    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const Tensor& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
    bool all_finite() const;
};

// 3x3 convolution weights plus inference-mode batch-norm parameters.
struct WeightLayerParams {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<float> kernel;  // (out, in, 3, 3) row-major
    std::vector<float> bn_gamma;
    std::vector<float> bn_beta;
    std::vector<float> bn_mean;
    std::vector<float> bn_var;
    float bn_eps = 1e-5f;
};

// 1x1 channel projection (no BN, no activation).
struct Proj1x1 {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<float> kernel;  // (out, in)
};

enum class EwiseOp { Mul, Add };
enum class DownscaleMode { Bilinear, MaxPool };

// Stride 1, zero padding 1, cross-correlation semantics. Accumulation per
// output element is a double running in fixed order: input channel, kernel
// row, kernel column.
Tensor conv2d_3x3(const Tensor& input, const WeightLayerParams& params);

Tensor conv1x1(const Tensor& input, const Proj1x1& proj);

// y = gamma*(x - mean)/sqrt(var + eps) + beta, per channel.
Tensor batchnorm_infer(const Tensor& input, const WeightLayerParams& params);

Tensor relu(const Tensor& input);

// relu(batchnorm(conv3x3(input)))
Tensor weight_layer(const Tensor& input, const WeightLayerParams& params);

// Align-corners-false: src = (dst + 0.5)*scale - 0.5, clamped.
Tensor bilinear_resize(const Tensor& input, int out_h, int out_w);

// 2x2 window max, stride 2. Height and width must be even.
Tensor maxpool2x2(const Tensor& input);

Tensor ewise(const Tensor& a, const Tensor& b, EwiseOp op);

// Spatial resize (bilinear by default, maxpool repeatedly for exact halving
// when requested) followed by a 1x1 channel projection.
Tensor reshape_to(const Tensor& input, int target_c, int target_h, int target_w,
                  const Proj1x1& proj,
                  DownscaleMode mode = DownscaleMode::Bilinear);

Tensor sigmoid(const Tensor& input);

}  // namespace sodkit

#endif
