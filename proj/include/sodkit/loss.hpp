#ifndef SODKIT_LOSS_HPP
#define SODKIT_LOSS_HPP

#include <cstdint>
#include <vector>

namespace sodkit {

// Prediction/ground-truth pair over an H x W grid. P in [0,1], G in {0,1}.
struct PredGtPair {
    int height = 0;
    int width = 0;
    std::vector<double> pred;
    std::vector<std::uint8_t> gt;

    PredGtPair() = default;
    PredGtPair(int h, int w);
    std::size_t size() const { return pred.size(); }
    void validate() const;
};

struct CsWeightConfig {
    int window = 31;  // odd, >= 3; side length of the surround area

    void validate() const;
};

struct LossBreakdown {
    double cs_bce = 0.0;
    double w_iou = 0.0;
    double epa = 0.0;  // w_iou + cs_bce
};

inline constexpr double kProbClamp = 1e-7;

// Ring-shaped surround kernel: for each offset at Euclidean distance d from
// the center, w = (sin(pi*d/A0 - pi/2) + 1) / (2*n_d), where n_d counts
// offsets at exactly that distance and A0 = window^2. Center weight is 0.
std::vector<double> ring_kernel(int window);

// Per-pixel attention weight w_i = |sum(w_A * G over window)/A0 - G_i|,
// zero-padded borders, constant full-window denominator.
std::vector<double> center_surround_weights(const std::vector<std::uint8_t>& gt,
                                            int height, int width,
                                            const CsWeightConfig& cfg);

double cs_bce(const PredGtPair& pair, const std::vector<double>& weights);
double w_iou(const PredGtPair& pair, const std::vector<double>& weights);
LossBreakdown epa(const PredGtPair& pair, const CsWeightConfig& cfg = {});

// Sum over three predictions (final first) with weights 1, 1/2, 1/4.
double total_loss(const std::vector<std::uint8_t>& gt, int height, int width,
                  const std::vector<std::vector<double>>& preds,
                  const CsWeightConfig& cfg = {});

// Analytic d(EPA)/dp per pixel; the surround weights are treated as
// constants of G.
std::vector<double> loss_gradient(const PredGtPair& pair, const CsWeightConfig& cfg = {});

}  // namespace sodkit

#endif
