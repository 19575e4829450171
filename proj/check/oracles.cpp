#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sodkit::oracle {

Tensor conv2d_3x3_naive(const Tensor& input, const WeightLayerParams& params) {
    Tensor out(params.out_channels, input.height, input.width);
    for (int oc = 0; oc < params.out_channels; ++oc)
        for (int y = 0; y < input.height; ++y)
            for (int x = 0; x < input.width; ++x) {
                double acc = 0.0;
                for (int ic = 0; ic < params.in_channels; ++ic)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int iy = y + ky - 1;
                            const int ix = x + kx - 1;
                            double v = 0.0;
                            if (iy >= 0 && iy < input.height && ix >= 0 && ix < input.width)
                                v = input.at(ic, iy, ix);
                            const float k =
                                params.kernel[((static_cast<std::size_t>(oc) * params.in_channels +
                                                ic) *
                                                   3 +
                                               ky) *
                                                  3 +
                                              kx];
                            acc += static_cast<double>(k) * v;
                        }
                out.at(oc, y, x) = static_cast<float>(acc);
            }
    return out;
}

Tensor batchnorm_naive(const Tensor& input, const WeightLayerParams& params) {
    Tensor out(input.channels, input.height, input.width);
    for (int c = 0; c < input.channels; ++c)
        for (int y = 0; y < input.height; ++y)
            for (int x = 0; x < input.width; ++x) {
                const double xv = input.at(c, y, x);
                const double yv = params.bn_gamma[c] * (xv - params.bn_mean[c]) /
                                      std::sqrt(static_cast<double>(params.bn_var[c]) +
                                                params.bn_eps) +
                                  params.bn_beta[c];
                out.at(c, y, x) = static_cast<float>(yv);
            }
    return out;
}

Tensor relu_naive(const Tensor& input) {
    Tensor out(input.channels, input.height, input.width);
    for (std::size_t i = 0; i < input.data.size(); ++i)
        out.data[i] = input.data[i] > 0.0f ? input.data[i] : 0.0f;
    return out;
}

Tensor bilinear_resize_naive(const Tensor& input, int out_h, int out_w) {
    Tensor out(input.channels, out_h, out_w);
    for (int c = 0; c < input.channels; ++c)
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                double sy = (y + 0.5) * input.height / static_cast<double>(out_h) - 0.5;
                double sx = (x + 0.5) * input.width / static_cast<double>(out_w) - 0.5;
                sy = std::clamp(sy, 0.0, input.height - 1.0);
                sx = std::clamp(sx, 0.0, input.width - 1.0);
                const int y0 = static_cast<int>(std::floor(sy));
                const int x0 = static_cast<int>(std::floor(sx));
                const int y1 = std::min(y0 + 1, input.height - 1);
                const int x1 = std::min(x0 + 1, input.width - 1);
                const double fy = sy - y0, fx = sx - x0;
                const double v = (1 - fy) * (1 - fx) * input.at(c, y0, x0) +
                                 (1 - fy) * fx * input.at(c, y0, x1) +
                                 fy * (1 - fx) * input.at(c, y1, x0) +
                                 fy * fx * input.at(c, y1, x1);
                out.at(c, y, x) = static_cast<float>(v);
            }
    return out;
}

Tensor maxpool2x2_naive(const Tensor& input) {
    Tensor out(input.channels, input.height / 2, input.width / 2);
    for (int c = 0; c < input.channels; ++c)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                float best = input.at(c, 2 * y, 2 * x);
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        best = std::max(best, input.at(c, 2 * y + dy, 2 * x + dx));
                out.at(c, y, x) = best;
            }
    return out;
}

Tensor ewise_naive(const Tensor& a, const Tensor& b, bool multiply) {
    Tensor out(a.channels, a.height, a.width);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        out.data[i] = multiply ? a.data[i] * b.data[i] : a.data[i] + b.data[i];
    return out;
}

int otsu_exhaustive(const DepthMap& depth) {
    std::int64_t hist[256] = {0};
    for (std::uint8_t v : depth.intensities) ++hist[v];

    int best_t = -1;
    double best_var = -1.0;
    for (int t = 0; t <= 255; ++t) {
        std::int64_t n0 = 0, s0 = 0, n1 = 0, s1 = 0;
        for (int v = 0; v < t; ++v) {
            n0 += hist[v];
            s0 += static_cast<std::int64_t>(v) * hist[v];
        }
        for (int v = t; v < 256; ++v) {
            n1 += hist[v];
            s1 += static_cast<std::int64_t>(v) * hist[v];
        }
        if (n0 == 0 || n1 == 0) continue;
        const double diff = static_cast<double>(s0 * n1 - s1 * n0);
        const double var = diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    if (best_t < 0) {
        // constant image: every candidate leaves one class empty
        for (int v = 0; v < 256; ++v)
            if (hist[v] > 0) return v;
    }
    return best_t;
}

std::vector<std::uint8_t> enhance_naive(const DepthMap& depth, double lambda1,
                                        double lambda2, int t_star) {
    std::vector<std::uint8_t> out(depth.intensities.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int v = depth.intensities[i];
        double s = (v < t_star ? lambda1 : lambda2) * v;
        s = std::floor(s + 0.5);
        out[i] = static_cast<std::uint8_t>(std::clamp(s, 0.0, 255.0));
    }
    return out;
}

std::vector<double> cs_weights_naive(const std::vector<std::uint8_t>& gt, int height,
                                     int width, int window) {
    const int r = window / 2;
    const double area = static_cast<double>(window) * window;
    std::vector<double> out(gt.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double num = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
                    if (!gt[static_cast<std::size_t>(yy) * width + xx]) continue;
                    // weight of this offset, recomputed from the definition
                    const int d2 = dy * dy + dx * dx;
                    int n_d = 0;
                    for (int ey = -r; ey <= r; ++ey)
                        for (int ex = -r; ex <= r; ++ex)
                            if (ey * ey + ex * ex == d2) ++n_d;
                    const double d = std::sqrt(static_cast<double>(d2));
                    num += (std::sin(M_PI * d / area - M_PI / 2.0) + 1.0) / (2.0 * n_d);
                }
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            out[i] = std::abs(num / area - static_cast<double>(gt[i]));
        }
    return out;
}

double cs_bce_naive(const PredGtPair& pair, const std::vector<double>& weights) {
    double acc = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        double p = pair.pred[i];
        p = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
        const double term = pair.gt[i] == 1 ? std::log(p) : std::log(1.0 - p);
        acc += (1.0 + weights[i]) * term;
        norm += 1.0 + weights[i];
    }
    return -acc / norm;
}

double w_iou_naive(const PredGtPair& pair, const std::vector<double>& weights) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double a = 1.0 + weights[i];
        const double g = pair.gt[i], p = pair.pred[i];
        inter += a * g * p;
        uni += a * (g + p - g * p);
    }
    return uni == 0.0 ? 0.0 : 1.0 - inter / uni;
}

std::vector<double> epa_gradient_fd(const PredGtPair& pair, const CsWeightConfig& cfg,
                                    double step) {
    std::vector<double> grad(pair.size());
    PredGtPair probe = pair;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double p0 = pair.pred[i];
        probe.pred[i] = p0 + step;
        const double up = epa(probe, cfg).epa;
        probe.pred[i] = p0 - step;
        const double down = epa(probe, cfg).epa;
        probe.pred[i] = p0;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double mae_naive(const EvalPair& pair) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const double d = pair.pred[i] - static_cast<double>(pair.gt[i]);
        sum += d < 0 ? -d : d;
    }
    return sum / static_cast<double>(pair.size());
}

CurveOracle curves_naive(const EvalPair& pair, double beta_sq) {
    CurveOracle out;
    std::int64_t n_gt = 0;
    for (std::uint8_t g : pair.gt) n_gt += g;
    const double n = static_cast<double>(pair.size());

    for (int t = 0; t < 256; ++t) {
        const double thr = t / 255.0;
        std::int64_t sel = 0, inter = 0;
        for (std::size_t i = 0; i < pair.size(); ++i) {
            const bool on = pair.pred[i] >= thr;
            if (on) {
                ++sel;
                if (pair.gt[i]) ++inter;
            }
        }
        const double p = sel > 0 ? static_cast<double>(inter) / sel : 0.0;
        const double r = n_gt > 0 ? static_cast<double>(inter) / n_gt : 0.0;
        out.precision[t] = p;
        out.recall[t] = r;
        double f = 0.0;
        if (n_gt > 0 && beta_sq * p + r > 0.0)
            f = (1.0 + beta_sq) * p * r / (beta_sq * p + r);
        out.f[t] = f;
        out.mean_f += f;

        double e;
        if (n_gt == 0) {
            e = 1.0 - sel / n;
        } else if (n_gt == static_cast<std::int64_t>(pair.size())) {
            e = sel / n;
        } else {
            const double mu_g = n_gt / n;
            const double mu_s = sel / n;
            double acc = 0.0;
            for (std::size_t i = 0; i < pair.size(); ++i) {
                const double pg = static_cast<double>(pair.gt[i]) - mu_g;
                const double ps = (pair.pred[i] >= thr ? 1.0 : 0.0) - mu_s;
                const double xi = 2.0 * pg * ps / (pg * pg + ps * ps + 1e-12);
                acc += (xi + 1.0) * (xi + 1.0) / 4.0;
            }
            e = acc / n;
        }
        out.e[t] = e;
        out.mean_e += e;
    }
    out.mean_f /= 256.0;
    out.mean_e /= 256.0;
    return out;
}

namespace {

struct Moments {
    std::int64_t n = 0;
    double sum_x = 0.0, sum_y = 0.0;
    double ss_x = 0.0, ss_y = 0.0, ss_xy = 0.0;
};

double ssim_from(const Moments& m) {
    if (m.n == 0) return 0.0;
    const double mx = m.sum_x / m.n, my = m.sum_y / m.n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    if (m.n > 1) {
        vx = (m.ss_x - m.n * mx * mx) / (m.n - 1);
        vy = (m.ss_y - m.n * my * my) / (m.n - 1);
        cxy = (m.ss_xy - m.n * mx * my) / (m.n - 1);
    }
    const double num = 4.0 * mx * my * cxy;
    const double den = (mx * mx + my * my) * (vx + vy);
    if (den == 0.0) return num == 0.0 ? 1.0 : 0.0;
    return num / den;
}

}  // namespace

double s_measure_naive(const EvalPair& pair, double alpha) {
    const double n = static_cast<double>(pair.size());
    std::int64_t n_fg = 0;
    double mean_pred = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        n_fg += pair.gt[i];
        mean_pred += pair.pred[i];
    }
    mean_pred /= n;
    if (n_fg == 0) return 1.0 - mean_pred;
    if (n_fg == static_cast<std::int64_t>(pair.size())) return mean_pred;

    // object term
    auto score = [](double mean, double sd) {
        return 2.0 * mean / (mean * mean + 1.0 + 2.0 * sd + 1e-12);
    };
    double fg_sum = 0.0, bg_sum = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i)
        (pair.gt[i] ? fg_sum : bg_sum) += pair.gt[i] ? pair.pred[i] : 1.0 - pair.pred[i];
    const std::int64_t n_bg = static_cast<std::int64_t>(pair.size()) - n_fg;
    const double fg_mean = fg_sum / n_fg;
    const double bg_mean = bg_sum / n_bg;
    double fg_ss = 0.0, bg_ss = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        if (pair.gt[i])
            fg_ss += (pair.pred[i] - fg_mean) * (pair.pred[i] - fg_mean);
        else
            bg_ss += (1.0 - pair.pred[i] - bg_mean) * (1.0 - pair.pred[i] - bg_mean);
    }
    const double fg_sd = n_fg > 1 ? std::sqrt(fg_ss / (n_fg - 1)) : 0.0;
    const double bg_sd = n_bg > 1 ? std::sqrt(bg_ss / (n_bg - 1)) : 0.0;
    const double mu = n_fg / n;
    const double s_o = mu * score(fg_mean, fg_sd) + (1.0 - mu) * score(bg_mean, bg_sd);

    // region term via accumulated moments
    double sx = 0.0, sy = 0.0;
    for (int y = 0; y < pair.height; ++y)
        for (int x = 0; x < pair.width; ++x)
            if (pair.gt[static_cast<std::size_t>(y) * pair.width + x]) {
                sx += x;
                sy += y;
            }
    const int split_x = std::clamp(static_cast<int>(std::lround(sx / n_fg)) + 1, 1, pair.width);
    const int split_y = std::clamp(static_cast<int>(std::lround(sy / n_fg)) + 1, 1, pair.height);

    Moments quad[4];
    for (int y = 0; y < pair.height; ++y)
        for (int x = 0; x < pair.width; ++x) {
            const int q = (y >= split_y ? 2 : 0) + (x >= split_x ? 1 : 0);
            const std::size_t i = static_cast<std::size_t>(y) * pair.width + x;
            Moments& m = quad[q];
            ++m.n;
            m.sum_x += pair.pred[i];
            m.sum_y += pair.gt[i];
            m.ss_x += pair.pred[i] * pair.pred[i];
            m.ss_y += static_cast<double>(pair.gt[i]) * pair.gt[i];
            m.ss_xy += pair.pred[i] * pair.gt[i];
        }
    double s_r = 0.0;
    for (const Moments& m : quad) s_r += (m.n / n) * ssim_from(m);

    const double s = alpha * s_o + (1.0 - alpha) * s_r;
    return s < 0.0 ? 0.0 : s;
}

}  // namespace sodkit::oracle
