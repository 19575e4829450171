#include "sodkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sodkit {

PredGtPair::PredGtPair(int h, int w) : height(h), width(w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("PredGtPair: dims must be positive");
    pred.assign(static_cast<std::size_t>(h) * w, 0.0);
    gt.assign(static_cast<std::size_t>(h) * w, 0);
}

void PredGtPair::validate() const {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (pred.size() != n || gt.size() != n)
        throw std::invalid_argument("PredGtPair: length mismatch");
    for (double p : pred)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("PredGtPair: prediction outside [0,1]");
    for (std::uint8_t g : gt)
        if (g > 1) throw std::invalid_argument("PredGtPair: ground truth not binary");
}

void CsWeightConfig::validate() const {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("CsWeightConfig: window must be odd and >= 3");
}

std::vector<double> ring_kernel(int window) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("ring_kernel: window must be odd");
    const int r = window / 2;
    const double area = static_cast<double>(window) * window;

    // Exact-distance multiplicity via squared integer distances.
    std::map<int, int> multiplicity;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) ++multiplicity[dy * dy + dx * dx];

    std::vector<double> kernel(static_cast<std::size_t>(window) * window);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const int d2 = dy * dy + dx * dx;
            const double d = std::sqrt(static_cast<double>(d2));
            const double n_d = multiplicity.at(d2);
            kernel[static_cast<std::size_t>(dy + r) * window + (dx + r)] =
                (std::sin(M_PI * d / area - M_PI / 2.0) + 1.0) / (2.0 * n_d);
        }
    return kernel;
}

std::vector<double> center_surround_weights(const std::vector<std::uint8_t>& gt,
                                            int height, int width,
                                            const CsWeightConfig& cfg) {
    cfg.validate();
    if (gt.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("center_surround_weights: size mismatch");
    const int r = cfg.window / 2;
    const std::vector<double> kernel = ring_kernel(cfg.window);
    const double area = static_cast<double>(cfg.window) * cfg.window;

    std::vector<double> weights(gt.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double num = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= height) continue;
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= width) continue;
                    if (gt[static_cast<std::size_t>(yy) * width + xx])
                        num += kernel[static_cast<std::size_t>(dy + r) * cfg.window + (dx + r)];
                }
            }
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            weights[i] = std::abs(num / area - static_cast<double>(gt[i]));
        }
    return weights;
}

double cs_bce(const PredGtPair& pair, const std::vector<double>& weights) {
    if (weights.size() != pair.size())
        throw std::invalid_argument("cs_bce: weight map size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double a = 1.0 + weights[i];
        const double p = std::clamp(pair.pred[i], kProbClamp, 1.0 - kProbClamp);
        num += a * (pair.gt[i] ? std::log(p) : std::log(1.0 - p));
        den += a;
    }
    return -num / den;
}

double w_iou(const PredGtPair& pair, const std::vector<double>& weights) {
    if (weights.size() != pair.size())
        throw std::invalid_argument("w_iou: weight map size mismatch");
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double a = 1.0 + weights[i];
        const double g = pair.gt[i];
        const double p = pair.pred[i];
        inter += a * g * p;
        uni += a * (g + p - g * p);
    }
    if (uni == 0.0) return 0.0;  // both maps empty
    return 1.0 - inter / uni;
}

LossBreakdown epa(const PredGtPair& pair, const CsWeightConfig& cfg) {
    const std::vector<double> w =
        center_surround_weights(pair.gt, pair.height, pair.width, cfg);
    LossBreakdown out;
    out.cs_bce = cs_bce(pair, w);
    out.w_iou = w_iou(pair, w);
    out.epa = out.cs_bce + out.w_iou;
    return out;
}

double total_loss(const std::vector<std::uint8_t>& gt, int height, int width,
                  const std::vector<std::vector<double>>& preds,
                  const CsWeightConfig& cfg) {
    if (preds.size() != 3)
        throw std::invalid_argument("total_loss: expects exactly 3 predictions");
    double total = 0.0;
    double scale = 1.0;
    for (const auto& p : preds) {
        PredGtPair pair;
        pair.height = height;
        pair.width = width;
        pair.pred = p;
        pair.gt = gt;
        pair.validate();
        total += scale * epa(pair, cfg).epa;
        scale *= 0.5;
    }
    return total;
}

std::vector<double> loss_gradient(const PredGtPair& pair, const CsWeightConfig& cfg) {
    const std::vector<double> w =
        center_surround_weights(pair.gt, pair.height, pair.width, cfg);

    double sum_a = 0.0, inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double a = 1.0 + w[i];
        sum_a += a;
        inter += a * pair.gt[i] * pair.pred[i];
        uni += a * (pair.gt[i] + pair.pred[i] - pair.gt[i] * pair.pred[i]);
    }

    std::vector<double> grad(pair.size());
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double a = 1.0 + w[i];
        const double p = std::clamp(pair.pred[i], kProbClamp, 1.0 - kProbClamp);
        const double g = pair.gt[i];
        // cs-BCE term
        double d = -(a / sum_a) * (g / p - (1.0 - g) / (1.0 - p));
        // wIoU term: L = 1 - inter/union
        if (uni > 0.0) {
            const double d_inter = a * g;
            const double d_union = a * (1.0 - g);
            d += -(d_inter * uni - inter * d_union) / (uni * uni);
        }
        grad[i] = d;
    }
    return grad;
}

}  // namespace sodkit
