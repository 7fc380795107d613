#include "degraf/pipeline.hpp"

#include <chrono>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace degraf {

const char* to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::degraf: return "degraf";
        case DetectorKind::grid: return "grid";
        case DetectorKind::gradmax: return "gradmax";
        case DetectorKind::external: return "external";
    }
    return "unknown";
}

bool detector_kind_from_string(const std::string& token, DetectorKind& out) {
    if (token == "degraf") out = DetectorKind::degraf;
    else if (token == "grid") out = DetectorKind::grid;
    else if (token == "gradmax") out = DetectorKind::gradmax;
    else if (token == "external") out = DetectorKind::external;
    else return false;
    return true;
}

void apply_thread_count(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PipelineResult run_pipeline(const GrayImage& frame1, const GrayImage& frame2,
                            const PipelineConfig& config,
                            const std::vector<Point2>* external_points) {
    if (!frame1.same_size(frame2)) {
        throw std::invalid_argument("pipeline: frame dimensions differ");
    }
    apply_thread_count(config.threads);

    PipelineResult result;
    const auto total_start = std::chrono::steady_clock::now();

    auto start = std::chrono::steady_clock::now();
    switch (config.detector_kind) {
        case DetectorKind::degraf:
            result.keypoints = detect_grid(frame1, config.detector);
            break;
        case DetectorKind::grid:
            result.keypoints = regular_grid(frame1, config.detector);
            break;
        case DetectorKind::gradmax:
            result.keypoints = gradient_maxima_grid(frame1, config.detector);
            break;
        case DetectorKind::external:
            if (!external_points) {
                throw std::invalid_argument("pipeline: external detector needs keypoints");
            }
            result.keypoints.points = *external_points;
            result.keypoints.params = config.detector;
            break;
    }
    result.timings.detect_s = seconds_since(start);

    start = std::chrono::steady_clock::now();
    result.sparse = track_points(frame1, frame2, result.keypoints.points, config.tracker);
    result.timings.track_s = seconds_since(start);

    if (config.fb_filter) {
        start = std::chrono::steady_clock::now();
        result.sparse = forward_backward_filter(result.sparse, frame1, frame2, config.tracker);
        result.timings.filter_s = seconds_since(start);
    }

    start = std::chrono::steady_clock::now();
    result.dense = interpolate(result.sparse, frame1, config.interp);
    result.timings.interp_s = seconds_since(start);

    result.timings.total_s = seconds_since(total_start);
    return result;
}

}  // namespace degraf
