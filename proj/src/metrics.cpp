#include "sodkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sodkit {

namespace {

constexpr double kEps = 1e-12;

const std::array<double, kThresholds>& threshold_values() {
    static const std::array<double, kThresholds> thr = [] {
        std::array<double, kThresholds> t{};
        for (int i = 0; i < kThresholds; ++i) t[i] = i / 255.0;
        return t;
    }();
    return thr;
}

// Largest t with pred >= t/255, computed with the exact same comparisons a
// per-threshold scan would use.
int bucket_of(double pred) {
    const auto& thr = threshold_values();
    int u = std::clamp(static_cast<int>(pred * 255.0), 0, 255);
    while (u < 255 && pred >= thr[u + 1]) ++u;
    while (u > 0 && pred < thr[u]) --u;
    return u;
}

struct ThresholdCounts {
    std::array<std::int64_t, kThresholds> selected{};
    std::array<std::int64_t, kThresholds> inter{};
    std::int64_t gt_count = 0;
    std::int64_t total = 0;
};

ThresholdCounts count_thresholds(const EvalPair& pair) {
    ThresholdCounts c;
    c.total = static_cast<std::int64_t>(pair.size());
    std::array<std::int64_t, kThresholds> hist_sel{}, hist_int{};
    for (std::size_t i = 0; i < pair.size(); ++i) {
        const int u = bucket_of(pair.pred[i]);
        ++hist_sel[u];
        if (pair.gt[i]) {
            ++hist_int[u];
            ++c.gt_count;
        }
    }
    std::int64_t run_sel = 0, run_int = 0;
    for (int t = kThresholds - 1; t >= 0; --t) {
        run_sel += hist_sel[t];
        run_int += hist_int[t];
        c.selected[t] = run_sel;
        c.inter[t] = run_int;
    }
    return c;
}

struct RegionStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double stdev = 0.0;  // n-1 divisor
};

RegionStats stats_of(const std::vector<double>& values) {
    RegionStats s;
    s.n = static_cast<std::int64_t>(values.size());
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stdev = std::sqrt(ss / (s.n - 1));
    }
    return s;
}

double object_score(const std::vector<double>& values) {
    const RegionStats s = stats_of(values);
    if (s.n == 0) return 0.0;
    return 2.0 * s.mean / (s.mean * s.mean + 1.0 + 2.0 * s.stdev + kEps);
}

double region_ssim(const EvalPair& pair, int y0, int y1, int x0, int x1) {
    // Closed rectangle [y0,y1) x [x0,x1); caller guarantees non-empty.
    const std::int64_t n = static_cast<std::int64_t>(y1 - y0) * (x1 - x0);
    double sx = 0.0, sy = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pair.width + x;
            sx += pair.pred[i];
            sy += pair.gt[i];
        }
    const double mx = sx / n, my = sy / n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * pair.width + x;
            const double dx = pair.pred[i] - mx;
            const double dy = pair.gt[i] - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    if (n > 1) {
        vx /= (n - 1);
        vy /= (n - 1);
        cxy /= (n - 1);
    } else {
        vx = vy = cxy = 0.0;
    }
    const double num = 4.0 * mx * my * cxy;
    const double den = (mx * mx + my * my) * (vx + vy);
    if (den == 0.0) return num == 0.0 ? 1.0 : 0.0;
    return num / den;
}

}  // namespace

EvalPair::EvalPair(int h, int w) : height(h), width(w) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("EvalPair: dims must be positive");
    pred.assign(static_cast<std::size_t>(h) * w, 0.0);
    gt.assign(static_cast<std::size_t>(h) * w, 0);
}

void EvalPair::validate() const {
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (pred.size() != n || gt.size() != n)
        throw std::invalid_argument("EvalPair: length mismatch");
    for (double p : pred)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("EvalPair: prediction outside [0,1]");
    for (std::uint8_t g : gt)
        if (g > 1) throw std::invalid_argument("EvalPair: ground truth not binary");
}

double mae(const EvalPair& pair) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i)
        sum += std::abs(pair.pred[i] - static_cast<double>(pair.gt[i]));
    return sum / static_cast<double>(pair.size());
}

double s_measure(const EvalPair& pair, const MetricConfig& cfg) {
    std::int64_t n_fg = 0;
    double pred_sum = 0.0;
    for (std::size_t i = 0; i < pair.size(); ++i) {
        n_fg += pair.gt[i];
        pred_sum += pair.pred[i];
    }
    const double pred_mean = pred_sum / static_cast<double>(pair.size());
    if (n_fg == 0) return 1.0 - pred_mean;
    if (n_fg == static_cast<std::int64_t>(pair.size())) return pred_mean;

    // Object-aware similarity: S on foreground, (1-S) on background, mixed
    // by the foreground fraction.
    std::vector<double> fg, bg;
    fg.reserve(n_fg);
    bg.reserve(pair.size() - n_fg);
    for (std::size_t i = 0; i < pair.size(); ++i) {
        if (pair.gt[i])
            fg.push_back(pair.pred[i]);
        else
            bg.push_back(1.0 - pair.pred[i]);
    }
    const double mu = static_cast<double>(n_fg) / static_cast<double>(pair.size());
    const double s_object = mu * object_score(fg) + (1.0 - mu) * object_score(bg);

    // Region-aware similarity: split at the ground-truth centroid.
    double sum_x = 0.0, sum_y = 0.0;
    for (int y = 0; y < pair.height; ++y)
        for (int x = 0; x < pair.width; ++x)
            if (pair.gt[static_cast<std::size_t>(y) * pair.width + x]) {
                sum_x += x;
                sum_y += y;
            }
    const int cx = static_cast<int>(std::lround(sum_x / n_fg));
    const int cy = static_cast<int>(std::lround(sum_y / n_fg));
    const int split_x = std::clamp(cx + 1, 1, pair.width);
    const int split_y = std::clamp(cy + 1, 1, pair.height);

    const double area = static_cast<double>(pair.size());
    double s_region = 0.0;
    const int xs[3] = {0, split_x, pair.width};
    const int ys[3] = {0, split_y, pair.height};
    for (int ry = 0; ry < 2; ++ry)
        for (int rx = 0; rx < 2; ++rx) {
            const int y0 = ys[ry], y1 = ys[ry + 1];
            const int x0 = xs[rx], x1 = xs[rx + 1];
            if (y1 <= y0 || x1 <= x0) continue;  // empty region gets zero weight
            const double weight = static_cast<double>(y1 - y0) * (x1 - x0) / area;
            s_region += weight * region_ssim(pair, y0, y1, x0, x1);
        }

    return std::max(0.0, cfg.alpha * s_object + (1.0 - cfg.alpha) * s_region);
}

void f_measure_curve(const EvalPair& pair, const MetricConfig& cfg, CurveSet& curves,
                     double& mean_f, bool& gt_empty) {
    const ThresholdCounts c = count_thresholds(pair);
    gt_empty = (c.gt_count == 0);
    double f_sum = 0.0;
    for (int t = 0; t < kThresholds; ++t) {
        const double p = c.selected[t] > 0
                             ? static_cast<double>(c.inter[t]) / static_cast<double>(c.selected[t])
                             : 0.0;
        const double r = c.gt_count > 0
                             ? static_cast<double>(c.inter[t]) / static_cast<double>(c.gt_count)
                             : 0.0;
        curves.precision[t] = p;
        curves.recall[t] = r;
        double f = 0.0;
        if (!gt_empty) {
            const double den = cfg.beta_sq * p + r;
            f = den > 0.0 ? (1.0 + cfg.beta_sq) * p * r / den : 0.0;
        }
        curves.f[t] = f;
        f_sum += f;
    }
    mean_f = f_sum / kThresholds;
}

void e_measure_curve(const EvalPair& pair, CurveSet& curves, double& mean_e) {
    const ThresholdCounts c = count_thresholds(pair);
    const double n = static_cast<double>(c.total);
    double e_sum = 0.0;
    for (int t = 0; t < kThresholds; ++t) {
        const double sel = static_cast<double>(c.selected[t]);
        double e;
        if (c.gt_count == 0) {
            e = 1.0 - sel / n;
        } else if (c.gt_count == c.total) {
            e = sel / n;
        } else {
            const double mu_g = static_cast<double>(c.gt_count) / n;
            const double mu_s = sel / n;
            auto phi_fm = [&](double g, double s) {
                const double pg = g - mu_g;
                const double ps = s - mu_s;
                const double xi = 2.0 * pg * ps / (pg * pg + ps * ps + kEps);
                return (xi + 1.0) * (xi + 1.0) / 4.0;
            };
            const double tp = static_cast<double>(c.inter[t]);
            const double fp = sel - tp;
            const double fn = static_cast<double>(c.gt_count) - tp;
            const double tn = n - sel - fn;
            e = (tp * phi_fm(1, 1) + fn * phi_fm(1, 0) + fp * phi_fm(0, 1) +
                 tn * phi_fm(0, 0)) /
                n;
        }
        curves.e[t] = e;
        e_sum += e;
    }
    mean_e = e_sum / kThresholds;
}

void pr_curve(const EvalPair& pair, CurveSet& curves) {
    double mean_f = 0.0;
    bool gt_empty = false;
    f_measure_curve(pair, MetricConfig{}, curves, mean_f, gt_empty);
}

MetricReport evaluate_pair(const EvalPair& pair, const MetricConfig& cfg) {
    pair.validate();
    MetricReport r;
    r.mae = mae(pair);
    r.s_alpha = s_measure(pair, cfg);
    f_measure_curve(pair, cfg, r.curves, r.mean_f, r.gt_empty);
    e_measure_curve(pair, r.curves, r.mean_e);
    std::int64_t n_fg = 0;
    for (std::uint8_t g : pair.gt) n_fg += g;
    r.gt_full = (n_fg == static_cast<std::int64_t>(pair.size()));
    return r;
}

MetricReport aggregate_reports(const std::vector<MetricReport>& reports) {
    if (reports.empty())
        throw std::invalid_argument("aggregate_reports: empty dataset");
    MetricReport agg;
    for (const MetricReport& r : reports) {
        agg.mae += r.mae;
        agg.s_alpha += r.s_alpha;
        agg.mean_f += r.mean_f;
        agg.mean_e += r.mean_e;
        for (int t = 0; t < kThresholds; ++t) {
            agg.curves.precision[t] += r.curves.precision[t];
            agg.curves.recall[t] += r.curves.recall[t];
            agg.curves.f[t] += r.curves.f[t];
            agg.curves.e[t] += r.curves.e[t];
        }
        agg.gt_empty = agg.gt_empty || r.gt_empty;
        agg.gt_full = agg.gt_full || r.gt_full;
    }
    const double n = static_cast<double>(reports.size());
    agg.mae /= n;
    agg.s_alpha /= n;
    agg.mean_f /= n;
    agg.mean_e /= n;
    for (int t = 0; t < kThresholds; ++t) {
        agg.curves.precision[t] /= n;
        agg.curves.recall[t] /= n;
        agg.curves.f[t] /= n;
        agg.curves.e[t] /= n;
    }
    return agg;
}

MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs, const MetricConfig& cfg) {
    std::vector<MetricReport> reports;
    reports.reserve(pairs.size());
    for (const EvalPair& p : pairs) reports.push_back(evaluate_pair(p, cfg));
    return aggregate_reports(reports);
}

}  // namespace sodkit
