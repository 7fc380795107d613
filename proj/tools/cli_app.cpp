#include "cli_app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "degraf/csv_io.hpp"
#include "degraf/flow_io.hpp"
#include "degraf/image_io.hpp"
#include "degraf/metrics.hpp"
#include "degraf/pipeline.hpp"

namespace degraf::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct AppOptions {
    PipelineConfig config;
    std::string config_path;
    std::string out_dir = ".";
};

// Flags land here first so the config file (applied after parsing) cannot
// clobber them; set flags are re-applied on top.
struct FlagOverrides {
    std::optional<int> window;
    std::optional<int> step;
    std::optional<int> k;
    std::optional<double> lambda;
    std::optional<double> sigma;
    std::optional<int> levels;
    std::optional<int> threads;
    std::optional<int> track_radius;
    bool no_fb_filter = false;

    void apply(PipelineConfig& c) const {
        if (window) {
            c.detector.window_w = *window;
            c.detector.window_h = *window;
        }
        if (step) c.detector.step = *step;
        if (k) c.interp.k = *k;
        if (lambda) c.interp.lambda = *lambda;
        if (sigma) c.interp.sigma = *sigma;
        if (levels) c.tracker.pyramid_levels = *levels;
        if (threads) c.threads = *threads;
        if (track_radius) c.tracker.window_radius = *track_radius;
        if (no_fb_filter) c.fb_filter = false;
    }
};

json config_to_json(const PipelineConfig& c) {
    return json{
        {"detector",
         {{"window_w", c.detector.window_w},
          {"window_h", c.detector.window_h},
          {"step", c.detector.step},
          {"kind", to_string(c.detector_kind)}}},
        {"tracker",
         {{"window_radius", c.tracker.window_radius},
          {"pyramid_levels", c.tracker.pyramid_levels},
          {"max_iterations", c.tracker.max_iterations},
          {"convergence_eps", c.tracker.convergence_eps},
          {"min_eigenvalue", c.tracker.min_eigenvalue},
          {"robust_norm", c.tracker.robust_norm},
          {"illumination_model", c.tracker.illumination_model},
          {"fb_threshold", c.tracker.fb_threshold},
          {"pyramid_scale", c.tracker.pyramid_scale},
          {"huber_delta", c.tracker.huber_delta}}},
        {"interp",
         {{"k", c.interp.k},
          {"lambda", c.interp.lambda},
          {"sigma", c.interp.sigma},
          {"eight_connectivity", c.interp.eight_connectivity}}},
        {"threads", c.threads},
        {"fb_filter", c.fb_filter},
    };
}

void config_from_json(const json& j, PipelineConfig& c) {
    if (j.contains("detector")) {
        const json& d = j["detector"];
        c.detector.window_w = d.value("window_w", c.detector.window_w);
        c.detector.window_h = d.value("window_h", c.detector.window_h);
        c.detector.step = d.value("step", c.detector.step);
        if (d.contains("kind") &&
            !detector_kind_from_string(d["kind"].get<std::string>(), c.detector_kind)) {
            throw std::runtime_error("config: unknown detector kind");
        }
    }
    if (j.contains("tracker")) {
        const json& t = j["tracker"];
        c.tracker.window_radius = t.value("window_radius", c.tracker.window_radius);
        c.tracker.pyramid_levels = t.value("pyramid_levels", c.tracker.pyramid_levels);
        c.tracker.max_iterations = t.value("max_iterations", c.tracker.max_iterations);
        c.tracker.convergence_eps = t.value("convergence_eps", c.tracker.convergence_eps);
        c.tracker.min_eigenvalue = t.value("min_eigenvalue", c.tracker.min_eigenvalue);
        c.tracker.robust_norm = t.value("robust_norm", c.tracker.robust_norm);
        c.tracker.illumination_model =
            t.value("illumination_model", c.tracker.illumination_model);
        c.tracker.fb_threshold = t.value("fb_threshold", c.tracker.fb_threshold);
        c.tracker.pyramid_scale = t.value("pyramid_scale", c.tracker.pyramid_scale);
        c.tracker.huber_delta = t.value("huber_delta", c.tracker.huber_delta);
    }
    if (j.contains("interp")) {
        const json& i = j["interp"];
        c.interp.k = i.value("k", c.interp.k);
        c.interp.lambda = i.value("lambda", c.interp.lambda);
        c.interp.sigma = i.value("sigma", c.interp.sigma);
        c.interp.eight_connectivity =
            i.value("eight_connectivity", c.interp.eight_connectivity);
    }
    c.threads = j.value("threads", c.threads);
    c.fb_filter = j.value("fb_filter", c.fb_filter);
}

void load_config_file(AppOptions& opts) {
    if (opts.config_path.empty()) return;
    std::ifstream in(opts.config_path);
    if (!in) throw std::runtime_error(opts.config_path + ": cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(opts.config_path + ": " + e.what());
    }
    config_from_json(j, opts.config);
}

void write_effective_config(const AppOptions& opts) {
    fs::create_directories(opts.out_dir);
    std::ofstream out(fs::path(opts.out_dir) / "config.json");
    out << config_to_json(opts.config).dump(2) << "\n";
}

void add_common_options(CLI::App* cmd, AppOptions& opts, FlagOverrides& flags) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--window", flags.window, "Detector window size (square)");
    cmd->add_option("--step", flags.step, "Detector step");
    cmd->add_option("--k", flags.k, "Interpolation support size");
    cmd->add_option("--lambda", flags.lambda, "Edge penalty strength");
    cmd->add_option("--sigma", flags.sigma, "Fit weight distance scale");
    cmd->add_option("--levels", flags.levels, "Tracker pyramid levels");
    cmd->add_option("--threads", flags.threads, "Worker threads");
    cmd->add_option("--track-radius", flags.track_radius, "Tracker window radius");
    cmd->add_flag("--no-fb-filter", flags.no_fb_filter,
                  "Disable the forward-backward consistency filter");
    cmd->add_option("--out-dir", opts.out_dir, "Output directory");
}

RgbImage keypoint_overlay(const GrayImage& image, std::span<const Point2> points) {
    RgbImage out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const auto v = static_cast<std::uint8_t>(
                std::lround(std::clamp(image.at(x, y), 0.0f, 255.0f)));
            std::uint8_t* px = out.pixel(x, y);
            px[0] = px[1] = px[2] = v;
        }
    }
    for (const Point2& p : points) {
        const int cx = static_cast<int>(std::lround(p.x));
        const int cy = static_cast<int>(std::lround(p.y));
        for (int t = -1; t <= 1; ++t) {
            if (cx + t >= 0 && cx + t < out.width && cy >= 0 && cy < out.height) {
                std::uint8_t* px = out.pixel(cx + t, cy);
                px[0] = 255;
                px[1] = 32;
                px[2] = 32;
            }
            if (cy + t >= 0 && cy + t < out.height && cx >= 0 && cx < out.width) {
                std::uint8_t* px = out.pixel(cx, cy + t);
                px[0] = 255;
                px[1] = 32;
                px[2] = 32;
            }
        }
    }
    return out;
}

std::string metrics_csv_row(const std::string& frame, const FlowMetrics& m) {
    auto field = [](const std::optional<double>& v) {
        if (!v) return std::string("nan");
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6f", *v);
        return std::string(buf);
    };
    char density[40];
    std::snprintf(density, sizeof(density), "%.6f", m.density);
    return frame + "," + field(m.epe_noc) + "," + field(m.epe_all) + "," +
           field(m.out_noc) + "," + field(m.out_all) + "," + density;
}

json metrics_to_json(const FlowMetrics& m) {
    auto field = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return json{{"epe_noc", field(m.epe_noc)},   {"epe_all", field(m.epe_all)},
                {"out_noc", field(m.out_noc)},   {"out_all", field(m.out_all)},
                {"evaluated_pixels", m.evaluated_pixel_count},
                {"density", m.density}};
}

json timings_to_json(const StageTimings& t) {
    return json{{"detect_s", t.detect_s},
                {"track_s", t.track_s},
                {"filter_s", t.filter_s},
                {"interp_s", t.interp_s},
                {"total_s", t.total_s}};
}

// ---- subcommand payloads ---------------------------------------------

int cmd_detect(const AppOptions& opts, const std::string& image_path,
               const std::string& out_csv, const std::string& overlay_path) {
    const GrayImage image = load_gray(image_path);
    apply_thread_count(opts.config.threads);

    KeypointGrid grid;
    switch (opts.config.detector_kind) {
        case DetectorKind::grid: grid = regular_grid(image, opts.config.detector); break;
        case DetectorKind::gradmax:
            grid = gradient_maxima_grid(image, opts.config.detector);
            break;
        default: grid = detect_grid(image, opts.config.detector); break;
    }

    fs::create_directories(opts.out_dir);
    const std::string csv_path =
        out_csv.empty() ? (fs::path(opts.out_dir) / "keypoints.csv").string() : out_csv;
    write_keypoints_csv(grid.points, csv_path);
    if (!overlay_path.empty()) {
        write_rgb_png(keypoint_overlay(image, grid.points), overlay_path);
    }
    write_effective_config(opts);
    std::cout << "detected " << grid.points.size() << " keypoints -> " << csv_path
              << "\n";
    return kExitOk;
}

int cmd_flow(const AppOptions& opts, const std::string& frame1_path,
             const std::string& frame2_path, const std::string& matches_csv) {
    const GrayImage frame1 = load_gray(frame1_path);
    const GrayImage frame2 = load_gray(frame2_path);
    if (!frame1.same_size(frame2)) {
        throw std::runtime_error("flow: frames have different sizes");
    }

    fs::create_directories(opts.out_dir);
    PipelineResult result;
    if (!matches_csv.empty()) {
        // Third-party matches: interpolate only.
        apply_thread_count(opts.config.threads);
        const SparseFlow sparse = read_sparse_flow_csv(matches_csv);
        const auto start = std::chrono::steady_clock::now();
        result.dense = interpolate(sparse, frame1, opts.config.interp);
        result.timings.interp_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        result.timings.total_s = result.timings.interp_s;
        result.sparse = sparse;
    } else {
        result = run_pipeline(frame1, frame2, opts.config);
    }

    write_flow_kitti(result.dense, (fs::path(opts.out_dir) / "flow.png").string());
    write_sparse_flow_csv(result.sparse, (fs::path(opts.out_dir) / "sparse.csv").string());
    write_rgb_png(flow_to_color(result.dense),
                  (fs::path(opts.out_dir) / "flow_vis.png").string());
    {
        std::ofstream out(fs::path(opts.out_dir) / "timings.json");
        out << timings_to_json(result.timings).dump(2) << "\n";
    }
    write_effective_config(opts);

    const StageTimings& t = result.timings;
    std::printf("keypoints: %zu  tracked valid: %zu\n", result.keypoints.points.size(),
                result.sparse.count(TrackStatus::valid));
    std::printf(
        "timings: detect %.3fs  track %.3fs  filter %.3fs  interp %.3fs  total %.3fs\n",
        t.detect_s, t.track_s, t.filter_s, t.interp_s, t.total_s);
    return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_noc_path,
             const std::string& gt_occ_path, const std::string& csv_path,
             const std::string& json_path, const std::string& frame_name) {
    const FlowField pred = read_flow_kitti(pred_path);
    const FlowField gt_noc = read_flow_kitti(gt_noc_path);
    std::optional<FlowField> gt_occ;
    if (!gt_occ_path.empty()) gt_occ = read_flow_kitti(gt_occ_path);

    const FlowMetrics metrics =
        compute_metrics(pred, gt_noc, gt_occ ? &*gt_occ : nullptr);

    const std::string header = "frame,epe_noc,epe_all,out_noc,out_all,density";
    const std::string row = metrics_csv_row(frame_name, metrics);
    std::cout << header << "\n" << row << "\n";
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        out << header << "\n" << row << "\n";
    }
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << metrics_to_json(metrics).dump(2) << "\n";
    }
    return kExitOk;
}

struct BenchPair {
    std::string frame1, frame2, gt;
};

int cmd_bench(const AppOptions& opts, const std::vector<BenchPair>& pairs,
              const std::vector<std::string>& detector_names,
              const std::vector<std::string>& external_specs) {
    struct Row {
        std::string detector;
        std::size_t points = 0;
        double detect_s = 0.0;
        double total_s = 0.0;
        double epe = 0.0;
        double out3 = 0.0;
    };
    std::vector<Row> rows;

    struct Choice {
        std::string name;
        DetectorKind kind;
        std::vector<Point2> external;
    };
    std::vector<Choice> choices;
    for (const std::string& name : detector_names) {
        DetectorKind kind;
        if (!detector_kind_from_string(name, kind) || kind == DetectorKind::external) {
            throw std::runtime_error("bench: unknown detector '" + name + "'");
        }
        choices.push_back({name, kind, {}});
    }
    for (const std::string& spec : external_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("bench: --keypoints expects name=path.csv");
        }
        choices.push_back({spec.substr(0, eq), DetectorKind::external,
                           read_keypoints_csv(spec.substr(eq + 1))});
    }
    if (choices.empty()) {
        throw std::runtime_error("bench: no detectors selected");
    }

    for (const Choice& choice : choices) {
        Row row;
        row.detector = choice.name;
        double epe_sum = 0.0, out_sum = 0.0;
        for (const BenchPair& pair : pairs) {
            const GrayImage f1 = load_gray(pair.frame1);
            const GrayImage f2 = load_gray(pair.frame2);
            const FlowField gt = read_flow_kitti(pair.gt);

            PipelineConfig config = opts.config;
            config.detector_kind = choice.kind;
            const PipelineResult result = run_pipeline(
                f1, f2, config,
                choice.kind == DetectorKind::external ? &choice.external : nullptr);
            const FlowMetrics metrics = compute_metrics(result.dense, gt);

            row.points += result.keypoints.points.size();
            row.detect_s += result.timings.detect_s;
            row.total_s += result.timings.total_s;
            epe_sum += metrics.epe_all.value_or(0.0);
            out_sum += metrics.out_all.value_or(0.0);
        }
        const double n = static_cast<double>(pairs.size());
        row.points = static_cast<std::size_t>(std::llround(row.points / n));
        row.detect_s /= n;
        row.total_s /= n;
        row.epe = epe_sum / n;
        row.out3 = out_sum / n;
        rows.push_back(row);
    }

    std::printf("%-12s %10s %12s %10s %10s %10s\n", "detector", "points", "detect(s)",
                "total(s)", "epe(px)", "out3");
    for (const Row& row : rows) {
        std::printf("%-12s %10zu %12.4f %10.3f %10.3f %10.4f\n", row.detector.c_str(),
                    row.points, row.detect_s, row.total_s, row.epe, row.out3);
    }

    if (opts.out_dir != ".") {
        fs::create_directories(opts.out_dir);
        std::ofstream out(fs::path(opts.out_dir) / "bench.csv");
        out << "detector,points,detect_s,total_s,epe,out3\n";
        for (const Row& row : rows) {
            char buf[200];
            std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f\n",
                          row.detector.c_str(), row.points, row.detect_s, row.total_s,
                          row.epe, row.out3);
            out << buf;
        }
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"DeGraF-Flow: sparse-to-dense optical flow"};
    app.require_subcommand(1);

    AppOptions opts;
    FlagOverrides flags;

    // detect
    std::string detect_image, detect_csv, detect_overlay;
    CLI::App* detect = app.add_subcommand("detect", "Detect keypoints on one image");
    detect->add_option("image", detect_image, "Input image (PNG or PGM)")->required();
    detect->add_option("--out", detect_csv, "Keypoint CSV path");
    detect->add_option("--overlay", detect_overlay, "Write a keypoint overlay PNG");
    std::string detect_kind;
    detect->add_option("--detector", detect_kind, "degraf|grid|gradmax");
    add_common_options(detect, opts, flags);

    // flow
    std::string flow_f1, flow_f2, flow_matches;
    CLI::App* flow = app.add_subcommand("flow", "Dense flow for a frame pair");
    flow->add_option("frame1", flow_f1, "First frame")->required();
    flow->add_option("frame2", flow_f2, "Second frame")->required();
    flow->add_option("--matches", flow_matches,
                     "Sparse flow CSV to interpolate instead of tracking");
    add_common_options(flow, opts, flags);

    // eval
    std::string eval_pred, eval_noc, eval_occ, eval_csv, eval_json, eval_frame = "0";
    CLI::App* eval = app.add_subcommand("eval", "Score a flow against ground truth");
    eval->add_option("pred", eval_pred, "Predicted flow PNG")->required();
    eval->add_option("gt_noc", eval_noc, "Non-occluded ground truth PNG")->required();
    eval->add_option("gt_occ", eval_occ, "All-pixels ground truth PNG");
    eval->add_option("--csv", eval_csv, "Write metrics CSV here");
    eval->add_option("--json", eval_json, "Write metrics JSON here");
    eval->add_option("--frame", eval_frame, "Frame name for the CSV row");
    add_common_options(eval, opts, flags);

    // bench
    std::vector<std::string> bench_args;
    std::string bench_list, bench_detectors = "degraf,grid,gradmax";
    std::vector<std::string> bench_external;
    CLI::App* bench = app.add_subcommand("bench", "Compare detectors on frame pairs");
    bench->add_option("pair", bench_args, "frame1 frame2 gt (single pair)")->expected(0, 3);
    bench->add_option("--list", bench_list, "File of 'frame1 frame2 gt' lines");
    bench->add_option("--detectors", bench_detectors, "Comma-separated detector names");
    bench->add_option("--keypoints", bench_external,
                      "External keypoints as name=path.csv (repeatable)");
    add_common_options(bench, opts, flags);

    std::vector<const char*> argv;
    argv.push_back("degraf_flow");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        load_config_file(opts);
        flags.apply(opts.config);

        if (detect->parsed()) {
            if (!detect_kind.empty() &&
                !detector_kind_from_string(detect_kind, opts.config.detector_kind)) {
                throw std::runtime_error("detect: unknown detector '" + detect_kind + "'");
            }
            return cmd_detect(opts, detect_image, detect_csv, detect_overlay);
        }
        if (flow->parsed()) {
            return cmd_flow(opts, flow_f1, flow_f2, flow_matches);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_pred, eval_noc, eval_occ, eval_csv, eval_json,
                            eval_frame);
        }
        if (bench->parsed()) {
            std::vector<BenchPair> pairs;
            if (!bench_args.empty()) {
                if (bench_args.size() != 3) {
                    throw std::runtime_error("bench: expected frame1 frame2 gt");
                }
                pairs.push_back({bench_args[0], bench_args[1], bench_args[2]});
            }
            if (!bench_list.empty()) {
                std::ifstream in(bench_list);
                if (!in) throw std::runtime_error(bench_list + ": cannot open list file");
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty() || line[0] == '#') continue;
                    std::istringstream ss(line);
                    BenchPair pair;
                    if (!(ss >> pair.frame1 >> pair.frame2 >> pair.gt)) {
                        throw std::runtime_error(bench_list + ": bad line: " + line);
                    }
                    pairs.push_back(pair);
                }
            }
            if (pairs.empty()) {
                throw std::runtime_error("bench: no frame pairs given");
            }
            std::vector<std::string> names;
            std::stringstream ss(bench_detectors);
            std::string name;
            while (std::getline(ss, name, ',')) {
                if (!name.empty()) names.push_back(name);
            }
            return cmd_bench(opts, pairs, names, bench_external);
        }
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace degraf::cli
