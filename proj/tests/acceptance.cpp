// Acceptance gate: one self-contained check per shipped guarantee, each
// printed as a single [PASS]/[FAIL] line. argv[1] is the CLI binary, used by
// the end-to-end checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sodkit/depth.hpp"
#include "sodkit/fusion.hpp"
#include "sodkit/image_io.hpp"
#include "sodkit/loss.hpp"
#include "sodkit/metrics.hpp"

using namespace sodkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

bool approx_equal(const Tensor& a, const Tensor& b, double tol) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (std::abs(static_cast<double>(a.data[i]) - b.data[i]) > tol) return false;
    return true;
}

bool all_equal(const Tensor& t, float v) {
    for (float x : t.data)
        if (x != v) return false;
    return true;
}

Tensor rand_tensor(SplitMix64& rng, int c, int h, int w) {
    Tensor t(c, h, w);
    for (float& v : t.data) v = rng.next_uniform(1.0f);
    return t;
}

WeightLayerParams rand_layer(SplitMix64& rng, int in_c, int out_c) {
    WeightLayerParams p;
    p.in_channels = in_c;
    p.out_channels = out_c;
    p.kernel.resize(static_cast<std::size_t>(out_c) * in_c * 9);
    for (float& v : p.kernel) v = rng.next_uniform(0.5f);
    for (int i = 0; i < out_c; ++i) {
        p.bn_gamma.push_back(0.5f + static_cast<float>(rng.next_unit()));
        p.bn_beta.push_back(rng.next_uniform(1.0f));
        p.bn_mean.push_back(rng.next_uniform(1.0f));
        p.bn_var.push_back(static_cast<float>(rng.next_unit()) + 0.1f);
    }
    return p;
}

// --- criterion 1: tensor kernels vs naive loop oracles ---------------------

void check_tensor_oracles() {
    const auto start = Clock::now();
    SplitMix64 rng(1001);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const int c = 1 + static_cast<int>(rng.next() % 3);
        const int h = 2 * (1 + static_cast<int>(rng.next() % 4));  // even, <= 8
        const int w = 2 * (1 + static_cast<int>(rng.next() % 4));
        const Tensor in = rand_tensor(rng, c, h, w);
        const WeightLayerParams p = rand_layer(rng, c, c);

        if (!bit_equal(conv2d_3x3(in, p), oracle::conv2d_3x3_naive(in, p)))
            ok = false, detail = "conv mismatch";
        if (ok && !bit_equal(maxpool2x2(in), oracle::maxpool2x2_naive(in)))
            ok = false, detail = "pool mismatch";
        const Tensor other = rand_tensor(rng, c, h, w);
        if (ok && !bit_equal(ewise(in, other, EwiseOp::Mul),
                             oracle::ewise_naive(in, other, true)))
            ok = false, detail = "ewise mismatch";
        if (ok && !approx_equal(batchnorm_infer(in, p), oracle::batchnorm_naive(in, p), 1e-6))
            ok = false, detail = "bn beyond 1e-6";
        const int oh = 1 + static_cast<int>(rng.next() % 8);
        const int ow = 1 + static_cast<int>(rng.next() % 8);
        if (ok && !approx_equal(bilinear_resize(in, oh, ow),
                                oracle::bilinear_resize_naive(in, oh, ow), 1e-6))
            ok = false, detail = "resize beyond 1e-6";
    }
    const double secs = seconds_since(start);
    if (ok && secs >= 5.0) ok = false, detail = "too slow";
    report("tensor kernels match naive oracles on 100 seeded cases", ok,
           detail.empty() ? "bit-exact conv/pool/ewise, 1e-6 bn/resize, " +
                                std::to_string(secs) + "s"
                          : detail);
}

// --- criterion 2: threshold search vs exhaustive scan ----------------------

void check_otsu() {
    const auto start = Clock::now();
    SplitMix64 rng(1002);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        DepthMap d(16, 16);
        for (auto& v : d.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);
        if (otsu_threshold(d).threshold != oracle::otsu_exhaustive(d))
            ok = false, detail = "random map mismatch";
    }
    // two-spike histograms: every cut between the spikes scores equally, the
    // smallest winning threshold must be reported
    for (int hi : {255, 200, 64}) {
        DepthMap d(4, 4);
        for (int i = 0; i < 8; ++i) d.intensities[i] = 0;
        for (int i = 8; i < 16; ++i) d.intensities[i] = static_cast<std::uint8_t>(hi);
        const int t = otsu_threshold(d).threshold;
        if (ok && !(t == 1 && oracle::otsu_exhaustive(d) == 1))
            ok = false, detail = "tie-break not the smallest threshold";
    }
    const double secs = seconds_since(start);
    if (ok && secs >= 2.0) ok = false, detail = "too slow";
    report("threshold search equals the exhaustive 256-candidate scan", ok,
           detail.empty() ? "200 random maps + tie-break fixtures, " +
                                std::to_string(secs) + "s"
                          : detail);
}

// --- criterion 3: depth scaling fixtures -----------------------------------

void check_enhance_params() {
    bool ok = true;
    std::string detail;
    DepthMap d(1, 2);
    d.intensities = {100, 250};
    const DepthMap out = enhance_depth(d, EnhanceConfig{0.8, 1.2}, 128);
    if (out.intensities[0] != 80) ok = false, detail = "100 below threshold != 80";
    if (ok && out.intensities[1] != 255) ok = false, detail = "250 above threshold != 255";
    if (ok) {
        DepthMap all(16, 16);
        for (int i = 0; i < 256; ++i) all.intensities[i] = static_cast<std::uint8_t>(i);
        if (enhance_depth(all, EnhanceConfig{1.0, 1.0}, 100).intensities != all.intensities)
            ok = false, detail = "unit scales are not the identity";
    }
    report("depth scaling: 0.8/1.2 fixtures and unit-scale identity", ok, detail);
}

// --- criterion 4: identity-mode fusion hand fixtures -----------------------

void check_fusion_fixtures() {
    bool ok = true;
    std::string detail;
    WeightStore w(0, WeightInit::Identity);

    const Tensor two(4, 8, 8, 2.0f), three(4, 8, 8, 3.0f), four(4, 8, 8, 4.0f);
    // cross-modal stage: product of the two weight-layer outputs
    const Tensor fused = ewise(weight_layer(two, w.layer("f.a", 4, 4)),
                               weight_layer(three, w.layer("f.b", 4, 4)), EwiseOp::Mul);
    if (!all_equal(fused, 6.0f)) ok = false, detail = "cross-modal product != 6";
    if (ok && !all_equal(cmrm(two, three, w, "c", 4, 8, 8), 12.0f))
        ok = false, detail = "cross-modal output != 12";

    if (ok) {
        const MlfmResult r = mlfm({two, three, four}, w, "m", 8, 8);
        const Tensor prod = ewise(ewise(two, three, EwiseOp::Mul), four, EwiseOp::Mul);
        if (!all_equal(prod, 24.0f)) ok = false, detail = "three-way product != 24";
        if (ok && !all_equal(r.left, 26.0f)) ok = false, detail = "left flow != 26";
        if (ok && !all_equal(r.down, 28.0f)) ok = false, detail = "down flow != 28";
    }
    report("identity-weight fusion reproduces hand-computed constants", ok, detail);
}

// --- criterion 5: integration schedule trace -------------------------------

void check_integration_trace() {
    const auto start = Clock::now();
    bool ok = true;
    std::string detail;
    for (int p = 2; p <= 5 && ok; ++p) {
        WeightStore w(1005, WeightInit::Random);
        std::map<int, Tensor> features;
        SplitMix64 rng(2000 + p);
        int dim = 32;
        for (int level = 2; level <= p + 1; ++level) {
            Tensor t(3, dim, dim);
            for (float& v : t.data) v = static_cast<float>(rng.next_unit());
            features.emplace(level, std::move(t));
            dim /= 2;
        }
        IntegrateTrace trace;
        const SaliencyOutput out = integrate(features, w, p, &trace);
        if (trace.mlfm_calls != p * (p - 1) / 2)
            ok = false, detail = "fusion call count off at P=" + std::to_string(p);
        if (ok && trace.fim_calls != p - 1)
            ok = false, detail = "feedback module count off at P=" + std::to_string(p);
        if (ok && p == 4) {
            std::vector<int> expect{4, 3};
            if (trace.feedback_layers != expect)
                ok = false, detail = "feedback ran at the wrong layers";
            if (ok && (out.final_map.height != 32 || out.final_map.width != 32))
                ok = false, detail = "final map not at the shallowest resolution";
        }
    }
    const double secs = seconds_since(start);
    if (ok && secs >= 5.0) ok = false, detail = "too slow";
    report("integration schedule: call counts, feedback layers, output size", ok,
           detail.empty() ? std::to_string(secs) + "s" : detail);
}

// --- criterion 6: analytic gradient vs finite differences ------------------

void check_gradient() {
    const auto start = Clock::now();
    SplitMix64 rng(1006);
    const CsWeightConfig cfg{5};
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        PredGtPair p(6, 6);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.gt[i] = static_cast<std::uint8_t>(rng.next() % 2);
            p.pred[i] = 0.1 + 0.8 * rng.next_unit();
        }
        const std::vector<double> grad = loss_gradient(p, cfg);
        const std::vector<double> fd = oracle::epa_gradient_fd(p, cfg, 1e-3);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double rel = std::abs(grad[i] - fd[i]) /
                               std::max({1.0, std::abs(grad[i]), std::abs(fd[i])});
            worst = std::max(worst, rel);
            if (rel >= 1e-4) {
                ok = false;
                detail = "relative error " + std::to_string(rel);
                break;
            }
        }
    }
    const double secs = seconds_since(start);
    if (ok && secs >= 10.0) ok = false, detail = "too slow";
    report("analytic loss gradient matches central differences", ok,
           detail.empty() ? "max rel err " + std::to_string(worst) + ", " +
                                std::to_string(secs) + "s"
                          : detail);
}

// --- criterion 7: loss minimality and identities ---------------------------

void check_loss_identities() {
    bool ok = true;
    std::string detail;
    SplitMix64 rng(1007);
    const CsWeightConfig cfg{5};

    PredGtPair perfect(8, 8);
    for (std::size_t i = 0; i < perfect.size(); ++i) {
        perfect.gt[i] = static_cast<std::uint8_t>(rng.next() % 2);
        perfect.pred[i] = perfect.gt[i];
    }
    if (epa(perfect, cfg).epa > 1e-6) ok = false, detail = "loss at the target exceeds 1e-6";

    if (ok) {
        PredGtPair inverted = perfect;
        for (double& v : inverted.pred) v = 1.0 - v;
        const std::vector<double> w =
            center_surround_weights(inverted.gt, 8, 8, cfg);
        if (std::abs(w_iou(inverted, w) - 1.0) > 1e-12)
            ok = false, detail = "inverted overlap loss != 1";
    }
    if (ok) {
        PredGtPair p(6, 6);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.gt[i] = static_cast<std::uint8_t>(rng.next() % 2);
            p.pred[i] = 0.1 + 0.8 * rng.next_unit();
        }
        const double single = epa(p, cfg).epa;
        const double total = total_loss(p.gt, 6, 6, {p.pred, p.pred, p.pred}, cfg);
        if (std::abs(total - 1.75 * single) > 1e-12 * std::abs(total))
            ok = false, detail = "1 + 1/2 + 1/4 weighting broken";
    }
    report("loss minimality and weighting identities", ok, detail);
}

// --- criterion 8: metric oracle equivalence --------------------------------

void check_metric_oracles() {
    const auto start = Clock::now();
    SplitMix64 rng(1008);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        EvalPair p(8, 8);
        for (double& v : p.pred) v = rng.next_unit();
        for (auto& g : p.gt) g = static_cast<std::uint8_t>(rng.next() % 2);
        const MetricReport r = evaluate_pair(p);
        if (std::abs(r.mae - oracle::mae_naive(p)) > 1e-9) {
            ok = false, detail = "mae";
            break;
        }
        if (std::abs(r.s_alpha - oracle::s_measure_naive(p, 0.5)) > 1e-9) {
            ok = false, detail = "structure measure";
            break;
        }
        const oracle::CurveOracle o = oracle::curves_naive(p, 0.3);
        for (int t = 0; t < kThresholds && ok; ++t) {
            if (std::abs(r.curves.precision[t] - o.precision[t]) > 1e-9 ||
                std::abs(r.curves.recall[t] - o.recall[t]) > 1e-9 ||
                std::abs(r.curves.f[t] - o.f[t]) > 1e-9 ||
                std::abs(r.curves.e[t] - o.e[t]) > 1e-9)
                ok = false, detail = "curve at threshold " + std::to_string(t);
        }
    }
    if (ok) {
        EvalPair empty(4, 4);
        for (double& v : empty.pred) v = 0.5;
        const MetricReport r = evaluate_pair(empty);
        if (!r.gt_empty || r.mean_f != 0.0)
            ok = false, detail = "empty ground truth must pin F to 0";
        EvalPair full(4, 4);
        for (auto& g : full.gt) g = 1;
        for (double& v : full.pred) v = 0.6;
        const MetricReport rf = evaluate_pair(full);
        if (ok && (!rf.gt_full || std::abs(rf.s_alpha - 0.6) > 1e-12))
            ok = false, detail = "full ground truth must score the mean prediction";
    }
    const double secs = seconds_since(start);
    if (ok && secs >= 10.0) ok = false, detail = "too slow";
    report("metrics match brute-force oracles within 1e-9", ok,
           detail.empty() ? "100 seeded pairs + degenerate rules, " +
                                std::to_string(secs) + "s"
                          : detail);
}

// --- criteria 9 & 10: CLI end-to-end ---------------------------------------

std::string read_bytes(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

void check_cli_determinism(const std::string& cli) {
    bool ok = true;
    std::string detail;
    const fs::path dir = fs::temp_directory_path() / "sodkit_accept_det";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SplitMix64 rng(1009);
    ImageU8 rgb(3, 48, 48);
    for (auto& v : rgb.data) v = static_cast<std::uint8_t>(rng.next() % 256);
    ImageU8 depth(1, 48, 48);
    for (auto& v : depth.data) v = static_cast<std::uint8_t>(rng.next() % 256);
    write_image((dir / "in_rgb.ppm").string(), rgb);
    write_image((dir / "in_depth.pgm").string(), depth);

    const std::string base = "\"" + cli + "\" --seed 7 --input-size 64 --channel-width 8 "
                             "forward --rgb " + (dir / "in_rgb.ppm").string() +
                             " --depth " + (dir / "in_depth.pgm").string() + " --out ";
    if (run(base + (dir / "run1.png").string() + " > /dev/null") != 0 ||
        run(base + (dir / "run2.png").string() + " > /dev/null") != 0)
        ok = false, detail = "forward run failed";
    if (ok) {
        const std::string a = read_bytes(dir / "run1.png");
        if (a.empty() || a != read_bytes(dir / "run2.png"))
            ok = false, detail = "saliency PNG differs between runs";
    }

    if (ok) {
        // tiny dataset evaluated with 1 and 4 worker threads
        fs::create_directories(dir / "pred");
        fs::create_directories(dir / "gt");
        for (int i = 0; i < 6; ++i) {
            ImageU8 pred(1, 24, 24), gt(1, 24, 24);
            for (auto& v : pred.data) v = static_cast<std::uint8_t>(rng.next() % 256);
            for (auto& v : gt.data) v = (rng.next() % 2) ? 255 : 0;
            const std::string name = "img" + std::to_string(i);
            write_image((dir / "pred" / (name + ".pgm")).string(), pred);
            write_image((dir / "gt" / (name + ".pgm")).string(), gt);
        }
        const std::string eval_base = "\"" + cli + "\" eval --pred-dir " +
                                      (dir / "pred").string() + " --gt-dir " +
                                      (dir / "gt").string() + " --out-dir ";
        if (run(eval_base + (dir / "out1").string() + " --jobs 1 > /dev/null") != 0 ||
            run(eval_base + (dir / "out4").string() + " --jobs 4 > /dev/null") != 0)
            ok = false, detail = "eval run failed";
        for (const char* f : {"per_image.csv", "curves.csv", "aggregate.json"})
            if (ok && read_bytes(dir / "out1" / f) != read_bytes(dir / "out4" / f))
                ok = false, detail = std::string(f) + " differs across thread counts";
    }
    report("CLI output is byte-identical across runs and thread counts", ok, detail);
    fs::remove_all(dir);
}

void check_cli_throughput(const std::string& cli) {
    bool ok = true;
    std::string detail;
    const fs::path dir = fs::temp_directory_path() / "sodkit_accept_perf";
    fs::remove_all(dir);
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "gt");

    SplitMix64 rng(1010);
    for (int i = 0; i < 100; ++i) {
        ImageU8 pred(1, 352, 352), gt(1, 352, 352);
        for (auto& v : pred.data) v = static_cast<std::uint8_t>(rng.next() % 256);
        for (auto& v : gt.data) v = (rng.next() % 2) ? 255 : 0;
        const std::string name = "img" + std::to_string(i);
        write_image((dir / "pred" / (name + ".pgm")).string(), pred);
        write_image((dir / "gt" / (name + ".pgm")).string(), gt);
    }

    const auto start = Clock::now();
    const std::string cmd = "\"" + cli + "\" eval --jobs 4 --pred-dir " +
                            (dir / "pred").string() + " --gt-dir " + (dir / "gt").string() +
                            " --out-dir " + (dir / "out").string() + " > /dev/null";
    if (run(cmd) != 0) ok = false, detail = "eval run failed";
    const double secs = seconds_since(start);
    if (ok && secs >= 60.0) ok = false, detail = std::to_string(secs) + "s, limit 60";
    report("dataset evaluation: 100 full-size pairs inside the time budget", ok,
           detail.empty() ? std::to_string(secs) + "s for 100 x 352x352" : detail);
    fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: sodkit_acceptance <path-to-cli>\n";
        return 2;
    }
    const std::string cli = argv[1];

    check_tensor_oracles();
    check_otsu();
    check_enhance_params();
    check_fusion_fixtures();
    check_integration_trace();
    check_gradient();
    check_loss_identities();
    check_metric_oracles();
    check_cli_determinism(cli);
    check_cli_throughput(cli);

    if (g_failures) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
