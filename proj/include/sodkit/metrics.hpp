#ifndef SODKIT_METRICS_HPP
#define SODKIT_METRICS_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace sodkit {

// Prediction map in [0,1] and binary ground truth over the same grid.
struct EvalPair {
    int height = 0;
    int width = 0;
    std::vector<double> pred;
    std::vector<std::uint8_t> gt;

    EvalPair() = default;
    EvalPair(int h, int w);
    std::size_t size() const { return pred.size(); }
    void validate() const;
};

struct MetricConfig {
    double alpha = 0.5;    // S-measure balance
    double beta_sq = 0.3;  // F-measure beta^2
};

inline constexpr int kThresholds = 256;

struct CurveSet {
    std::array<double, kThresholds> precision{};
    std::array<double, kThresholds> recall{};
    std::array<double, kThresholds> f{};
    std::array<double, kThresholds> e{};
};

struct MetricReport {
    double mae = 0.0;
    double s_alpha = 0.0;
    double mean_f = 0.0;
    double mean_e = 0.0;
    CurveSet curves;
    bool gt_empty = false;  // G all-zero: F fixed to 0 by convention
    bool gt_full = false;
};

double mae(const EvalPair& pair);
double s_measure(const EvalPair& pair, const MetricConfig& cfg = {});

// Per-threshold precision/recall/F plus mean F; thresholds t/255, inclusive
// binarization S >= t/255, t in 0..255.
void f_measure_curve(const EvalPair& pair, const MetricConfig& cfg, CurveSet& curves,
                     double& mean_f, bool& gt_empty);

void e_measure_curve(const EvalPair& pair, CurveSet& curves, double& mean_e);

// Precision/recall only (shares the F-curve computation).
void pr_curve(const EvalPair& pair, CurveSet& curves);

MetricReport evaluate_pair(const EvalPair& pair, const MetricConfig& cfg = {});

// Arithmetic mean of per-image metrics and per-threshold curves, in input
// order.
MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs,
                              const MetricConfig& cfg = {});

MetricReport aggregate_reports(const std::vector<MetricReport>& reports);

}  // namespace sodkit

#endif
