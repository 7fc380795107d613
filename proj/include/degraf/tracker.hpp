#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "degraf/image.hpp"

namespace degraf {

enum class TrackStatus : std::uint8_t {
    valid,
    lost_texture,
    diverged,
    out_of_bounds,
    fb_failed,
};

const char* to_string(TrackStatus status);
bool track_status_from_string(const std::string& token, TrackStatus& out);

/// Pyramidal least-squares tracker configuration.
///
/// robust_norm enables Huber reweighting of per-pixel residuals;
/// illumination_model adds per-window gain/bias unknowns to the solve.
struct TrackParams {
    int window_radius = 10;
    int pyramid_levels = 4;
    int max_iterations = 30;
    double convergence_eps = 0.01;
    double min_eigenvalue = 1e-4;
    bool robust_norm = true;
    bool illumination_model = true;
    double fb_threshold = 1.0;
    double pyramid_scale = 0.5;
    double huber_delta = 10.0;  // residual scale of the Huber weight, intensity units
};

/// One tracked correspondence: frame-1 origin plus displacement in pixels.
struct FlowRecord {
    Point2 origin;
    double du = 0.0;
    double dv = 0.0;
    TrackStatus status = TrackStatus::valid;

    Point2 endpoint() const { return {origin.x + du, origin.y + dv}; }
};

/// Sparse flow: the stage-2 output and the interchange unit between the
/// tracker and the interpolator.
struct SparseFlow {
    std::vector<FlowRecord> records;

    std::size_t count(TrackStatus status) const;
};

/// Tracks each point from frame1 to frame2 by coarse-to-fine iterative
/// least squares over the brightness-constancy linearization. Per-point
/// work is independent and runs in parallel; results are bit-exact
/// regardless of scheduling.
///
/// Throws std::invalid_argument when frame dimensions differ or params
/// violate their invariants.
SparseFlow track_points(const GrayImage& frame1, const GrayImage& frame2,
                        std::span<const Point2> points, const TrackParams& params);

/// Re-tracks each valid endpoint from frame2 back to frame1 and re-marks
/// records whose round-trip error exceeds params.fb_threshold (or whose
/// backward track fails outright) as fb_failed. All other records pass
/// through unchanged.
SparseFlow forward_backward_filter(const SparseFlow& forward, const GrayImage& frame1,
                                   const GrayImage& frame2, const TrackParams& params);

}  // namespace degraf
