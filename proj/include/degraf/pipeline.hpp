#pragma once

#include <optional>
#include <vector>

#include "degraf/detector.hpp"
#include "degraf/image.hpp"
#include "degraf/interp.hpp"
#include "degraf/tracker.hpp"

namespace degraf {

enum class DetectorKind {
    degraf,    // dense-gradient centroid keypoints
    grid,      // window centers
    gradmax,   // per-window gradient-magnitude maxima
    external,  // caller-supplied keypoints
};

const char* to_string(DetectorKind kind);
bool detector_kind_from_string(const std::string& token, DetectorKind& out);

struct PipelineConfig {
    DetectorParams detector;
    TrackParams tracker;
    InterpParams interp;
    DetectorKind detector_kind = DetectorKind::degraf;
    bool fb_filter = true;
    int threads = 0;  // 0 = library default
};

/// Per-stage wall-clock seconds, measured around the compute calls only
/// (no image I/O inside any stage).
struct StageTimings {
    double detect_s = 0.0;
    double track_s = 0.0;
    double filter_s = 0.0;
    double interp_s = 0.0;
    double total_s = 0.0;
};

struct PipelineResult {
    KeypointGrid keypoints;
    SparseFlow sparse;    // after forward-backward filtering when enabled
    FlowField dense;
    StageTimings timings;
};

/// Runs detect -> track -> filter -> interpolate on one frame pair.
/// external_points are required (and used verbatim) when
/// config.detector_kind == DetectorKind::external.
PipelineResult run_pipeline(const GrayImage& frame1, const GrayImage& frame2,
                            const PipelineConfig& config,
                            const std::vector<Point2>* external_points = nullptr);

/// Applies config.threads to the OpenMP runtime (no-op for threads <= 0).
void apply_thread_count(int threads);

}  // namespace degraf
