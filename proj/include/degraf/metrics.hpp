#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "degraf/image.hpp"

namespace degraf {

/// Per-pixel evaluation mask; a metric only counts pixels where pass != 0.
struct OcclusionMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pass;

    OcclusionMask() = default;
    OcclusionMask(int w, int h, std::uint8_t fill = 1)
        : width(w), height(h), pass(static_cast<std::size_t>(w) * h, fill) {}

    static OcclusionMask from_validity(const FlowField& field);
};

/// Mean Euclidean distance between predicted and ground-truth vectors over
/// pixels where gt is valid and the mask passes. Pass mask = nullptr to
/// evaluate everywhere gt is valid.
///
/// Throws std::invalid_argument on dimension mismatch or an empty
/// evaluation set.
double end_point_error(const FlowField& pred, const FlowField& gt,
                       const OcclusionMask* mask = nullptr);

/// Fraction of evaluated pixels whose error strictly exceeds the threshold.
double outlier_rate(const FlowField& pred, const FlowField& gt,
                    const OcclusionMask* mask = nullptr, double threshold_px = 3.0);

/// Aggregate metrics over one frame pair. Fields are absent (not 0) when
/// their evaluation set is empty.
struct FlowMetrics {
    std::optional<double> epe_all;
    std::optional<double> epe_noc;
    std::optional<double> out_all;
    std::optional<double> out_noc;
    std::size_t evaluated_pixel_count = 0;  // pixels of the all-mask
    double density = 0.0;                   // valid prediction fraction
};

/// Noc metrics use gt_noc validity as the mask; all-pixel metrics use
/// gt_occ when provided, otherwise gt_noc serves both roles.
FlowMetrics compute_metrics(const FlowField& pred, const FlowField& gt_noc,
                            const FlowField* gt_occ = nullptr,
                            double outlier_threshold_px = 3.0);

}  // namespace degraf
