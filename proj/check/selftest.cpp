#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "sodkit/fusion.hpp"
#include "sodkit/loss.hpp"
#include "sodkit/metrics.hpp"
#include "sodkit/weights.hpp"

namespace sodkit::selftest {

namespace {

Tensor random_tensor(SplitMix64& rng, int c, int h, int w, float lo = -1.0f,
                     float hi = 1.0f) {
    Tensor t(c, h, w);
    for (float& v : t.data)
        v = lo + static_cast<float>(rng.next_unit()) * (hi - lo);
    return t;
}

WeightLayerParams random_layer(SplitMix64& rng, int in_c, int out_c) {
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
    p.bn_eps = 1e-5f;
    return p;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    return m;
}

SuiteResult tensor_suite(std::uint64_t seed) {
    SuiteResult r{"tensor_oracles", true, ""};
    SplitMix64 rng(seed ^ 0x101);
    for (int trial = 0; trial < 100 && r.passed; ++trial) {
        const int c = 1 + static_cast<int>(rng.next() % 3);
        const int oc = 1 + static_cast<int>(rng.next() % 3);
        const int h = 2 * (1 + static_cast<int>(rng.next() % 4));
        const int w = 2 * (1 + static_cast<int>(rng.next() % 4));
        const Tensor in = random_tensor(rng, c, h, w);
        const WeightLayerParams params = random_layer(rng, c, oc);

        if (!bit_equal(conv2d_3x3(in, params), oracle::conv2d_3x3_naive(in, params))) {
            r.passed = false;
            r.detail = "conv mismatch";
        }
        const WeightLayerParams bn_params = random_layer(rng, c, c);
        if (max_abs_diff(batchnorm_infer(in, bn_params),
                         oracle::batchnorm_naive(in, bn_params)) > 1e-6) {
            r.passed = false;
            r.detail = "batchnorm mismatch";
        }
        if (!bit_equal(relu(in), oracle::relu_naive(in))) {
            r.passed = false;
            r.detail = "relu mismatch";
        }
        if (!bit_equal(maxpool2x2(in), oracle::maxpool2x2_naive(in))) {
            r.passed = false;
            r.detail = "maxpool mismatch";
        }
        const Tensor other = random_tensor(rng, c, h, w);
        if (!bit_equal(ewise(in, other, EwiseOp::Mul), oracle::ewise_naive(in, other, true)) ||
            !bit_equal(ewise(in, other, EwiseOp::Add), oracle::ewise_naive(in, other, false))) {
            r.passed = false;
            r.detail = "ewise mismatch";
        }
        const int oh = 1 + static_cast<int>(rng.next() % 8);
        const int ow = 1 + static_cast<int>(rng.next() % 8);
        if (max_abs_diff(bilinear_resize(in, oh, ow),
                         oracle::bilinear_resize_naive(in, oh, ow)) > 1e-6) {
            r.passed = false;
            r.detail = "resize mismatch";
        }
    }
    return r;
}

SuiteResult otsu_suite(std::uint64_t seed) {
    SuiteResult r{"otsu_exhaustive_scan", true, ""};
    SplitMix64 rng(seed ^ 0x202);
    for (int trial = 0; trial < 200; ++trial) {
        DepthMap d(16, 16);
        for (auto& v : d.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);
        const OtsuResult got = otsu_threshold(d);
        const int want = oracle::otsu_exhaustive(d);
        if (got.threshold != want) {
            r.passed = false;
            std::ostringstream os;
            os << "trial " << trial << ": got " << got.threshold << " want " << want;
            r.detail = os.str();
            return r;
        }
    }
    return r;
}

SuiteResult loss_weights_suite(std::uint64_t seed) {
    SuiteResult r{"surround_weight_oracle", true, ""};
    SplitMix64 rng(seed ^ 0x303);
    for (int trial = 0; trial < 20; ++trial) {
        const int h = 4 + static_cast<int>(rng.next() % 5);
        const int w = 4 + static_cast<int>(rng.next() % 5);
        std::vector<std::uint8_t> gt(static_cast<std::size_t>(h) * w);
        for (auto& g : gt) g = static_cast<std::uint8_t>(rng.next() % 2);
        const int window = (trial % 2) ? 3 : 5;
        const auto got = center_surround_weights(gt, h, w, CsWeightConfig{window});
        const auto want = oracle::cs_weights_naive(gt, h, w, window);
        for (std::size_t i = 0; i < got.size(); ++i)
            if (std::abs(got[i] - want[i]) > 1e-9) {
                r.passed = false;
                r.detail = "weight map mismatch";
                return r;
            }
    }
    return r;
}

SuiteResult gradient_suite(std::uint64_t seed) {
    SuiteResult r{"loss_gradient_fd", true, ""};
    SplitMix64 rng(seed ^ 0x404);
    const CsWeightConfig cfg{5};
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        PredGtPair pair(6, 6);
        for (std::size_t i = 0; i < pair.size(); ++i) {
            pair.gt[i] = static_cast<std::uint8_t>(rng.next() % 2);
            pair.pred[i] = 0.1 + 0.8 * rng.next_unit();
        }
        const auto analytic = loss_gradient(pair, cfg);
        const auto fd = oracle::epa_gradient_fd(pair, cfg, 1e-3);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double rel = std::abs(analytic[i] - fd[i]) /
                               std::max(std::abs(fd[i]), 1e-8);
            worst = std::max(worst, rel);
        }
    }
    std::ostringstream os;
    os << "max relative error " << worst;
    r.detail = os.str();
    r.passed = worst < 1e-4;
    return r;
}

SuiteResult metric_suite(std::uint64_t seed) {
    SuiteResult r{"metric_oracles", true, ""};
    SplitMix64 rng(seed ^ 0x505);
    const MetricConfig cfg;
    for (int trial = 0; trial < 100; ++trial) {
        EvalPair pair(8, 8);
        for (std::size_t i = 0; i < pair.size(); ++i) {
            pair.gt[i] = static_cast<std::uint8_t>(rng.next() % 2);
            pair.pred[i] = rng.next_unit();
        }
        const MetricReport got = evaluate_pair(pair, cfg);
        const oracle::CurveOracle want = oracle::curves_naive(pair, cfg.beta_sq);
        bool ok = std::abs(got.mae - oracle::mae_naive(pair)) <= 1e-9 &&
                  std::abs(got.s_alpha - oracle::s_measure_naive(pair, cfg.alpha)) <= 1e-9 &&
                  std::abs(got.mean_f - want.mean_f) <= 1e-9 &&
                  std::abs(got.mean_e - want.mean_e) <= 1e-9;
        for (int t = 0; t < 256 && ok; ++t)
            ok = std::abs(got.curves.precision[t] - want.precision[t]) <= 1e-9 &&
                 std::abs(got.curves.recall[t] - want.recall[t]) <= 1e-9 &&
                 std::abs(got.curves.f[t] - want.f[t]) <= 1e-9 &&
                 std::abs(got.curves.e[t] - want.e[t]) <= 1e-9;
        if (!ok) {
            r.passed = false;
            r.detail = "metric oracle mismatch at trial " + std::to_string(trial);
            return r;
        }
    }
    return r;
}

SuiteResult algorithm_trace_suite(std::uint64_t seed) {
    SuiteResult r{"integration_trace", true, ""};
    for (int p = 2; p <= 5; ++p) {
        WeightStore w(seed, WeightInit::Random);
        std::map<int, Tensor> features;
        int dim = 32;
        SplitMix64 rng(seed ^ (0x606 + p));
        for (int level = 2; level <= p + 1; ++level) {
            features.emplace(level, random_tensor(rng, 4, dim, dim, 0.0f, 1.0f));
            dim /= 2;
        }
        IntegrateTrace trace;
        const SaliencyOutput out = integrate(features, w, p, &trace);
        const bool counts_ok = trace.mlfm_calls == p * (p - 1) / 2 &&
                               trace.fim_calls == p - 1 && trace.left_reuse_hits == 0;
        const bool shape_ok = out.final_map.height == 32 && out.final_map.width == 32 &&
                              out.final_map.channels == 1;
        if (!counts_ok || !shape_ok) {
            r.passed = false;
            r.detail = "trace mismatch for P=" + std::to_string(p);
            return r;
        }
    }
    return r;
}

SuiteResult forward_suite(std::uint64_t seed, const std::string& weights_path) {
    SuiteResult r{"forward_weights", true, ""};
    try {
        ForwardConfig cfg;
        cfg.input_h = cfg.input_w = 32;
        cfg.channel_width = 4;
        cfg.seed = seed;

        ImageU8 rgb(3, 32, 32);
        DepthMap depth(32, 32);
        SplitMix64 rng(seed ^ 0x707);
        for (auto& v : rgb.data) v = static_cast<std::uint8_t>(rng.next() % 256);
        for (auto& v : depth.intensities) v = static_cast<std::uint8_t>(rng.next() % 256);

        WeightStore w(seed, WeightInit::Random);
        const ForwardResult a = forward_full(rgb, depth, w, cfg);

        // round-trip the populated store through the container format
        std::string path = weights_path;
        const bool temp = path.empty();
        if (temp)
            path = (std::filesystem::temp_directory_path() /
                    ("sodkit_selftest_" + std::to_string(seed) + ".mciw"))
                       .string();
        if (temp || !std::filesystem::exists(path)) w.save(path);
        WeightStore loaded = WeightStore::load(path);
        const ForwardResult b = forward_full(rgb, depth, loaded, cfg);
        if (temp) std::remove(path.c_str());

        if (!bit_equal(a.saliency.final_map, b.saliency.final_map)) {
            r.passed = false;
            r.detail = "forward pass differs after container round trip";
        }
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("container error: ") + e.what();
    }
    return r;
}

}  // namespace

std::vector<SuiteResult> run_all(std::uint64_t seed, const std::string& weights_path) {
    return {
        tensor_suite(seed),      otsu_suite(seed),           loss_weights_suite(seed),
        gradient_suite(seed),    metric_suite(seed),         algorithm_trace_suite(seed),
        forward_suite(seed, weights_path),
    };
}

}  // namespace sodkit::selftest
