#ifndef SODKIT_CHECK_ORACLES_HPP
#define SODKIT_CHECK_ORACLES_HPP

// Naive reference implementations used to cross-check the library. These
// deliberately stay close to the defining formulas (plain loops, no shared
// code with the main implementation paths).

#include <array>
#include <cstdint>
#include <vector>

#include "sodkit/depth.hpp"
#include "sodkit/loss.hpp"
#include "sodkit/metrics.hpp"
#include "sodkit/tensor.hpp"

namespace sodkit::oracle {

Tensor conv2d_3x3_naive(const Tensor& input, const WeightLayerParams& params);
Tensor batchnorm_naive(const Tensor& input, const WeightLayerParams& params);
Tensor relu_naive(const Tensor& input);
Tensor bilinear_resize_naive(const Tensor& input, int out_h, int out_w);
Tensor maxpool2x2_naive(const Tensor& input);
Tensor ewise_naive(const Tensor& a, const Tensor& b, bool multiply);

// Exhaustive scan over all 256 candidate thresholds, recomputing the class
// statistics from the histogram for each candidate.
int otsu_exhaustive(const DepthMap& depth);

std::vector<std::uint8_t> enhance_naive(const DepthMap& depth, double lambda1,
                                        double lambda2, int t_star);

// Direct formula evaluation per pixel of the surround-weight map.
std::vector<double> cs_weights_naive(const std::vector<std::uint8_t>& gt, int height,
                                     int width, int window);

double cs_bce_naive(const PredGtPair& pair, const std::vector<double>& weights);
double w_iou_naive(const PredGtPair& pair, const std::vector<double>& weights);

// Central finite differences of the EPA loss.
std::vector<double> epa_gradient_fd(const PredGtPair& pair, const CsWeightConfig& cfg,
                                    double step);

double mae_naive(const EvalPair& pair);

struct CurveOracle {
    std::array<double, 256> precision{};
    std::array<double, 256> recall{};
    std::array<double, 256> f{};
    std::array<double, 256> e{};
    double mean_f = 0.0;
    double mean_e = 0.0;
};

// Per-threshold set counting and per-pixel alignment evaluation, one full
// pass over the image for every threshold.
CurveOracle curves_naive(const EvalPair& pair, double beta_sq);

double s_measure_naive(const EvalPair& pair, double alpha);

}  // namespace sodkit::oracle

#endif
