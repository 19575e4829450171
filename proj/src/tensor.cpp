#include "sodkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sodkit {

Tensor::Tensor(int c, int h, int w, float fill) : channels(c), height(h), width(w) {
    if (c <= 0 || h <= 0 || w <= 0)
        throw std::invalid_argument("Tensor dims must be positive");
    data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor conv2d_3x3(const Tensor& input, const WeightLayerParams& params) {
    if (input.channels != params.in_channels)
        throw std::invalid_argument("conv2d_3x3: channel mismatch");
    if (params.kernel.size() !=
        static_cast<std::size_t>(params.out_channels) * params.in_channels * 9)
        throw std::invalid_argument("conv2d_3x3: kernel size mismatch");

    const int H = input.height, W = input.width;
    Tensor out(params.out_channels, H, W);
    for (int oc = 0; oc < params.out_channels; ++oc) {
        const float* kbase =
            params.kernel.data() + static_cast<std::size_t>(oc) * params.in_channels * 9;
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                double acc = 0.0;
                for (int ic = 0; ic < params.in_channels; ++ic) {
                    const float* k = kbase + ic * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = y + ky - 1;
                        if (iy < 0 || iy >= H) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = x + kx - 1;
                            if (ix < 0 || ix >= W) continue;
                            acc += static_cast<double>(k[ky * 3 + kx]) *
                                   static_cast<double>(input.at(ic, iy, ix));
                        }
                    }
                }
                out.at(oc, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor conv1x1(const Tensor& input, const Proj1x1& proj) {
    if (input.channels != proj.in_channels)
        throw std::invalid_argument("conv1x1: channel mismatch");
    if (proj.kernel.size() !=
        static_cast<std::size_t>(proj.out_channels) * proj.in_channels)
        throw std::invalid_argument("conv1x1: kernel size mismatch");

    Tensor out(proj.out_channels, input.height, input.width);
    const std::size_t plane = static_cast<std::size_t>(input.height) * input.width;
    for (int oc = 0; oc < proj.out_channels; ++oc) {
        const float* k = proj.kernel.data() + static_cast<std::size_t>(oc) * proj.in_channels;
        float* dst = out.data.data() + oc * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            double acc = 0.0;
            for (int ic = 0; ic < proj.in_channels; ++ic)
                acc += static_cast<double>(k[ic]) *
                       static_cast<double>(input.data[ic * plane + p]);
            dst[p] = static_cast<float>(acc);
        }
    }
    return out;
}

Tensor batchnorm_infer(const Tensor& input, const WeightLayerParams& params) {
    if (!(params.bn_eps > 0.0f))
        throw std::invalid_argument("batchnorm_infer: eps must be positive");
    if (static_cast<int>(params.bn_gamma.size()) != input.channels ||
        static_cast<int>(params.bn_beta.size()) != input.channels ||
        static_cast<int>(params.bn_mean.size()) != input.channels ||
        static_cast<int>(params.bn_var.size()) != input.channels)
        throw std::invalid_argument("batchnorm_infer: per-channel params length mismatch");

    Tensor out(input.channels, input.height, input.width);
    const std::size_t plane = static_cast<std::size_t>(input.height) * input.width;
    for (int c = 0; c < input.channels; ++c) {
        if (params.bn_var[c] < 0.0f)
            throw std::invalid_argument("batchnorm_infer: negative variance");
        const float scale =
            params.bn_gamma[c] / std::sqrt(params.bn_var[c] + params.bn_eps);
        const float mean = params.bn_mean[c];
        const float beta = params.bn_beta[c];
        const float* src = input.data.data() + c * plane;
        float* dst = out.data.data() + c * plane;
        for (std::size_t p = 0; p < plane; ++p)
            dst[p] = scale * (src[p] - mean) + beta;
    }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.data) v = std::max(v, 0.0f);
    return out;
}

Tensor weight_layer(const Tensor& input, const WeightLayerParams& params) {
    return relu(batchnorm_infer(conv2d_3x3(input, params), params));
}

Tensor bilinear_resize(const Tensor& input, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("bilinear_resize: output dims must be >= 1");
    if (out_h == input.height && out_w == input.width) return input;

    Tensor out(input.channels, out_h, out_w);
    const double sy = static_cast<double>(input.height) / out_h;
    const double sx = static_cast<double>(input.width) / out_w;
    for (int c = 0; c < input.channels; ++c) {
        for (int y = 0; y < out_h; ++y) {
            double fy = (y + 0.5) * sy - 0.5;
            fy = std::clamp(fy, 0.0, static_cast<double>(input.height - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, input.height - 1);
            const double wy = fy - y0;
            for (int x = 0; x < out_w; ++x) {
                double fx = (x + 0.5) * sx - 0.5;
                fx = std::clamp(fx, 0.0, static_cast<double>(input.width - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, input.width - 1);
                const double wx = fx - x0;
                const double top = input.at(c, y0, x0) +
                                   (input.at(c, y0, x1) - input.at(c, y0, x0)) * wx;
                const double bot = input.at(c, y1, x0) +
                                   (input.at(c, y1, x1) - input.at(c, y1, x0)) * wx;
                out.at(c, y, x) = static_cast<float>(top + (bot - top) * wy);
            }
        }
    }
    return out;
}

Tensor maxpool2x2(const Tensor& input) {
    if (input.height % 2 != 0 || input.width % 2 != 0)
        throw std::invalid_argument("maxpool2x2: dims must be even");
    Tensor out(input.channels, input.height / 2, input.width / 2);
    for (int c = 0; c < input.channels; ++c)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                const float a = input.at(c, 2 * y, 2 * x);
                const float b = input.at(c, 2 * y, 2 * x + 1);
                const float d = input.at(c, 2 * y + 1, 2 * x);
                const float e = input.at(c, 2 * y + 1, 2 * x + 1);
                out.at(c, y, x) = std::max(std::max(a, b), std::max(d, e));
            }
    return out;
}

Tensor ewise(const Tensor& a, const Tensor& b, EwiseOp op) {
    if (!a.same_shape(b))
        throw std::invalid_argument("ewise: shape mismatch");
    Tensor out = a;
    if (op == EwiseOp::Mul) {
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    } else {
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    }
    return out;
}

Tensor reshape_to(const Tensor& input, int target_c, int target_h, int target_w,
                  const Proj1x1& proj, DownscaleMode mode) {
    Tensor resized = input;
    if (input.height != target_h || input.width != target_w) {
        const bool down = target_h <= input.height && target_w <= input.width;
        if (down && mode == DownscaleMode::MaxPool && input.height % 2 == 0 &&
            input.width % 2 == 0) {
            while (resized.height > target_h && resized.width > target_w &&
                   resized.height % 2 == 0 && resized.width % 2 == 0 &&
                   resized.height / 2 >= target_h && resized.width / 2 >= target_w)
                resized = maxpool2x2(resized);
            if (resized.height != target_h || resized.width != target_w)
                resized = bilinear_resize(resized, target_h, target_w);
        } else {
            resized = bilinear_resize(resized, target_h, target_w);
        }
    }
    if (resized.channels == target_c && proj.kernel.empty()) return resized;
    if (proj.in_channels != resized.channels || proj.out_channels != target_c)
        throw std::invalid_argument("reshape_to: projection shape mismatch");
    return conv1x1(resized, proj);
}

Tensor sigmoid(const Tensor& input) {
    Tensor out = input;
    for (float& v : out.data) v = 1.0f / (1.0f + std::exp(-v));
    return out;
}

}  // namespace sodkit
