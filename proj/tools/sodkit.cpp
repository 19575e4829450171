#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>
#include <vector>

#include "selftest.hpp"
#include "sodkit/depth.hpp"
#include "sodkit/fusion.hpp"
#include "sodkit/image_io.hpp"
#include "sodkit/loss.hpp"
#include "sodkit/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct GlobalOpts {
    double lambda1 = 0.8;
    double lambda2 = 1.2;
    int window = 31;
    std::uint64_t seed = 0;
    int input_size = 352;
    int channel_width = 64;
    bool identity_weights = false;
    bool resize_pred = false;
    int jobs = 0;  // 0 = logical cores
    int gt_threshold = 128;
};

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void apply_config_file(GlobalOpts& g, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    json cfg = json::parse(is);
    if (cfg.contains("lambda1")) g.lambda1 = cfg["lambda1"].get<double>();
    if (cfg.contains("lambda2")) g.lambda2 = cfg["lambda2"].get<double>();
    if (cfg.contains("window")) g.window = cfg["window"].get<int>();
    if (cfg.contains("seed")) g.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("input_size")) g.input_size = cfg["input_size"].get<int>();
    if (cfg.contains("channel_width")) g.channel_width = cfg["channel_width"].get<int>();
    if (cfg.contains("identity_weights")) g.identity_weights = cfg["identity_weights"].get<bool>();
    if (cfg.contains("resize_pred")) g.resize_pred = cfg["resize_pred"].get<bool>();
    if (cfg.contains("jobs")) g.jobs = cfg["jobs"].get<int>();
    if (cfg.contains("gt_threshold")) g.gt_threshold = cfg["gt_threshold"].get<int>();
}

json run_metadata(const GlobalOpts& g) {
    return json{{"tool", "sodkit"},
                {"version", "1.0.0"},
                {"seed", g.seed},
                {"lambda1", g.lambda1},
                {"lambda2", g.lambda2},
                {"window", g.window},
                {"input_size", g.input_size},
                {"channel_width", g.channel_width},
                {"identity_weights", g.identity_weights}};
}

sodkit::ImageU8 saliency_to_image(const sodkit::Tensor& map) {
    sodkit::ImageU8 img(1, map.height, map.width);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            const double v = std::clamp(static_cast<double>(map.at(0, y, x)), 0.0, 1.0);
            img.at(y, x, 0) = static_cast<std::uint8_t>(std::lround(255.0 * v));
        }
    return img;
}

std::vector<double> load_pred(const std::string& path, int gt_h, int gt_w,
                              bool resize_ok) {
    sodkit::ImageU8 img = sodkit::read_image(path);
    sodkit::DepthMap gray = sodkit::to_depth(img);
    if (gray.height != gt_h || gray.width != gt_w) {
        if (!resize_ok)
            throw std::runtime_error("prediction size mismatch (use --resize-pred): " + path);
        gray = sodkit::to_depth(
            sodkit::resize_bilinear_u8(sodkit::to_image(gray), gt_h, gt_w));
    }
    std::vector<double> pred(gray.intensities.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        pred[i] = gray.intensities[i] / 255.0;
    return pred;
}

std::vector<std::uint8_t> load_gt(const std::string& path, int threshold, int& h, int& w) {
    sodkit::DepthMap gray = sodkit::to_depth(sodkit::read_image(path));
    h = gray.height;
    w = gray.width;
    std::vector<std::uint8_t> gt(gray.intensities.size());
    for (std::size_t i = 0; i < gt.size(); ++i)
        gt[i] = gray.intensities[i] >= threshold ? 1 : 0;
    return gt;
}

int cmd_enhance(const GlobalOpts& g, const std::string& depth_path,
                const std::string& out_path) {
    const sodkit::DepthMap depth = sodkit::to_depth(sodkit::read_image(depth_path));
    const sodkit::EnhanceConfig cfg{g.lambda1, g.lambda2};
    cfg.validate();
    const sodkit::HhaPipelineResult result = sodkit::hha_e_pipeline(depth, cfg);
    sodkit::write_image(out_path, sodkit::to_image(result.hha));

    json sidecar = run_metadata(g);
    sidecar["input"] = depth_path;
    sidecar["threshold"] = result.otsu.threshold;
    sidecar["degenerate"] = result.otsu.degenerate;
    sidecar["zero_depth_pixels"] = result.hha.zero_depth_pixels;
    std::ofstream os(out_path + ".json");
    os << sidecar.dump(2) << "\n";
    std::cout << "enhanced " << depth_path << " -> " << out_path
              << " (T*=" << result.otsu.threshold
              << (result.otsu.degenerate ? ", degenerate" : "") << ")\n";
    return kExitOk;
}

int cmd_forward(const GlobalOpts& g, const std::string& rgb_path,
                const std::string& depth_path, const std::string& weights_path,
                bool seed_given, const std::string& out_path,
                const std::string& save_weights) {
    if (weights_path.empty() && !seed_given && !g.identity_weights)
        throw std::runtime_error("forward needs --weights, --seed, or --identity-weights");

    sodkit::WeightStore store =
        !weights_path.empty()
            ? sodkit::WeightStore::load(weights_path)
            : sodkit::WeightStore(g.seed, g.identity_weights ? sodkit::WeightInit::Identity
                                                             : sodkit::WeightInit::Random);

    const sodkit::ImageU8 rgb = sodkit::read_image(rgb_path);
    const sodkit::DepthMap depth = sodkit::to_depth(sodkit::read_image(depth_path));

    sodkit::ForwardConfig cfg;
    cfg.input_h = cfg.input_w = g.input_size;
    cfg.channel_width = g.channel_width;
    cfg.enhance = {g.lambda1, g.lambda2};
    cfg.seed = g.seed;
    const sodkit::ForwardResult result = sodkit::forward_full(rgb, depth, store, cfg);

    sodkit::write_image(out_path, saliency_to_image(result.saliency.final_map));
    const fs::path base(out_path);
    const std::string stem = (base.parent_path() / base.stem()).string();
    for (std::size_t i = 0; i < result.saliency.side_maps.size(); ++i)
        sodkit::write_image(stem + "_side" + std::to_string(i) + ".png",
                            saliency_to_image(result.saliency.side_maps[i]));
    if (!save_weights.empty()) store.save(save_weights);

    json meta = run_metadata(g);
    meta["rgb"] = rgb_path;
    meta["depth"] = depth_path;
    meta["weights"] = weights_path.empty() ? json(nullptr) : json(weights_path);
    meta["threshold"] = result.otsu.threshold;
    meta["side_maps"] = result.saliency.side_maps.size();
    std::ofstream os(stem + ".json");
    os << meta.dump(2) << "\n";
    std::cout << "saliency map written to " << out_path << "\n";
    return kExitOk;
}

int cmd_loss(const GlobalOpts& g, const std::vector<std::string>& pred_paths,
             const std::string& gt_path, const std::string& out_path) {
    if (pred_paths.empty() || pred_paths.size() > 3)
        throw std::runtime_error("loss expects 1 to 3 predictions");
    int h = 0, w = 0;
    const std::vector<std::uint8_t> gt = load_gt(gt_path, g.gt_threshold, h, w);
    const sodkit::CsWeightConfig cfg{g.window};

    json out = run_metadata(g);
    out["gt"] = gt_path;
    json terms = json::array();
    std::vector<std::vector<double>> preds;
    for (const std::string& p : pred_paths) {
        preds.push_back(load_pred(p, h, w, g.resize_pred));
        sodkit::PredGtPair pair;
        pair.height = h;
        pair.width = w;
        pair.pred = preds.back();
        pair.gt = gt;
        const sodkit::LossBreakdown b = sodkit::epa(pair, cfg);
        terms.push_back({{"pred", p},
                         {"cs_bce", b.cs_bce},
                         {"w_iou", b.w_iou},
                         {"epa", b.epa}});
        std::cout << p << ": epa=" << fmt6(b.epa) << " cs_bce=" << fmt6(b.cs_bce)
                  << " w_iou=" << fmt6(b.w_iou) << "\n";
    }
    out["terms"] = terms;
    if (preds.size() == 3) {
        const double total = sodkit::total_loss(gt, h, w, preds, cfg);
        out["total"] = total;
        std::cout << "total=" << fmt6(total) << "\n";
    }
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        os << out.dump(2) << "\n";
    }
    return kExitOk;
}

std::map<std::string, fs::path> index_by_stem(const std::string& dir) {
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext != ".png" && ext != ".pgm" && ext != ".ppm") continue;
        out[entry.path().stem().string()] = entry.path();
    }
    return out;
}

int cmd_eval(const GlobalOpts& g, const std::string& pred_dir, const std::string& gt_dir,
             const std::string& out_dir) {
    const auto preds = index_by_stem(pred_dir);
    const auto gts = index_by_stem(gt_dir);

    std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> matched;
    int warnings = 0;
    for (const auto& [stem, path] : preds) {
        auto it = gts.find(stem);
        if (it == gts.end()) {
            std::cerr << "warning: no ground truth for " << path << "\n";
            ++warnings;
        } else {
            matched.emplace_back(stem, std::make_pair(path, it->second));
        }
    }
    for (const auto& [stem, path] : gts)
        if (!preds.count(stem)) {
            std::cerr << "warning: no prediction for " << path << "\n";
            ++warnings;
        }
    if (matched.empty())
        throw std::runtime_error("no filename-matched prediction/ground-truth pairs");

    int jobs = g.jobs;
    if (const char* env = std::getenv("SODKIT_JOBS")) jobs = std::atoi(env);
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(matched.size())));

    const sodkit::MetricConfig mcfg;
    std::vector<sodkit::MetricReport> reports(matched.size());
    std::vector<std::string> errors(matched.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= matched.size()) return;
            try {
                sodkit::EvalPair pair;
                pair.gt = load_gt(matched[i].second.second.string(), g.gt_threshold,
                                  pair.height, pair.width);
                pair.pred = load_pred(matched[i].second.first.string(), pair.height,
                                      pair.width, g.resize_pred);
                reports[i] = sodkit::evaluate_pair(pair, mcfg);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < matched.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error(matched[i].first + ": " + errors[i]);

    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "per_image.csv");
        csv << "name,mae,s_measure,mean_f,mean_e,gt_empty\n";
        for (std::size_t i = 0; i < matched.size(); ++i) {
            const auto& r = reports[i];
            csv << matched[i].first << "," << r.mae << "," << r.s_alpha << "," << r.mean_f
                << "," << r.mean_e << "," << (r.gt_empty ? 1 : 0) << "\n";
        }
    }
    const sodkit::MetricReport agg = sodkit::aggregate_reports(reports);
    {
        std::ofstream csv(fs::path(out_dir) / "curves.csv");
        csv << "threshold,precision,recall,f,e\n";
        for (int t = 0; t < sodkit::kThresholds; ++t)
            csv << t << "," << agg.curves.precision[t] << "," << agg.curves.recall[t] << ","
                << agg.curves.f[t] << "," << agg.curves.e[t] << "\n";
    }
    json out = run_metadata(g);
    out["images"] = matched.size();
    out["warnings"] = warnings;
    out["mae"] = agg.mae;
    out["s_measure"] = agg.s_alpha;
    out["mean_f"] = agg.mean_f;
    out["mean_e"] = agg.mean_e;
    {
        std::ofstream os(fs::path(out_dir) / "aggregate.json");
        os << out.dump(2) << "\n";
    }
    std::cout << "images=" << matched.size() << " warnings=" << warnings
              << " MAE=" << fmt6(agg.mae) << " S=" << fmt6(agg.s_alpha)
              << " meanF=" << fmt6(agg.mean_f) << " meanE=" << fmt6(agg.mean_e) << "\n";
    return kExitOk;
}

int cmd_selftest(const GlobalOpts& g, const std::string& weights_path) {
    const auto results = sodkit::selftest::run_all(g.seed, weights_path);
    bool all_ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
        std::cout << "\n";
        all_ok = all_ok && r.passed;
    }
    return all_ok ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RGB-D saliency pipeline: depth enhancement, fusion forward pass, "
                 "losses, and evaluation metrics"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global options after the subcommand too

    GlobalOpts g;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with option defaults");
    app.add_option("--lambda1", g.lambda1, "scale for depths below the threshold");
    app.add_option("--lambda2", g.lambda2, "scale for depths at/above the threshold");
    app.add_option("--window", g.window, "surround window size (odd)");
    bool seed_given = false;
    app.add_option("--seed", g.seed, "RNG seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--input-size", g.input_size, "network input side length");
    app.add_option("--channel-width", g.channel_width, "internal fusion channel width");
    app.add_flag("--identity-weights", g.identity_weights, "use identity test-mode weights");
    app.add_flag("--resize-pred", g.resize_pred, "resize predictions to ground truth");
    app.add_option("--jobs", g.jobs, "worker threads for eval (env SODKIT_JOBS overrides)");
    app.add_option("--gt-threshold", g.gt_threshold, "ground-truth binarization level");

    auto* enhance = app.add_subcommand("enhance", "depth enhancement + HHA encoding");
    std::string depth_path, out_path;
    enhance->add_option("--depth", depth_path, "input depth image")->required();
    enhance->add_option("--out", out_path, "output 3-channel image")->required();

    auto* forward = app.add_subcommand("forward", "full saliency forward pass");
    std::string rgb_path, fwd_depth, weights_path, fwd_out, save_weights;
    forward->add_option("--rgb", rgb_path, "RGB image")->required();
    forward->add_option("--depth", fwd_depth, "depth image")->required();
    forward->add_option("--weights", weights_path, "weight container file");
    forward->add_option("--out", fwd_out, "output saliency PNG")->required();
    forward->add_option("--save-weights", save_weights, "write the weight container here");

    auto* loss = app.add_subcommand("loss", "EPA loss between predictions and ground truth");
    std::vector<std::string> pred_paths;
    std::string gt_path, loss_out;
    loss->add_option("--pred", pred_paths, "prediction maps (1-3, final first)")->required();
    loss->add_option("--gt", gt_path, "binary ground truth")->required();
    loss->add_option("--out", loss_out, "JSON output file");

    auto* eval = app.add_subcommand("eval", "dataset metric evaluation");
    std::string pred_dir, gt_dir, eval_out;
    eval->add_option("--pred-dir", pred_dir, "prediction directory")->required();
    eval->add_option("--gt-dir", gt_dir, "ground-truth directory")->required();
    eval->add_option("--out-dir", eval_out, "report output directory")->required();

    auto* selftest = app.add_subcommand("selftest", "run all oracle suites");
    std::string selftest_weights;
    selftest->add_option("--weights", selftest_weights,
                         "verify this weight container in the forward suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(g, config_path);
        if (enhance->parsed()) return cmd_enhance(g, depth_path, out_path);
        if (forward->parsed())
            return cmd_forward(g, rgb_path, fwd_depth, weights_path, seed_given, fwd_out,
                               save_weights);
        if (loss->parsed()) return cmd_loss(g, pred_paths, gt_path, loss_out);
        if (eval->parsed()) return cmd_eval(g, pred_dir, gt_dir, eval_out);
        if (selftest->parsed()) return cmd_selftest(g, selftest_weights);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInput;
}
