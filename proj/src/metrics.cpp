#include "degraf/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace degraf {

OcclusionMask OcclusionMask::from_validity(const FlowField& field) {
    OcclusionMask mask(field.width, field.height, 0);
    mask.pass = field.valid;
    return mask;
}

namespace {

struct ErrorStats {
    double epe_sum = 0.0;
    std::size_t outliers = 0;
    std::size_t count = 0;
};

ErrorStats accumulate_errors(const FlowField& pred, const FlowField& gt,
                             const OcclusionMask* mask, double threshold_px) {
    if (!pred.same_size(gt)) {
        throw std::invalid_argument("flow metrics: field dimensions differ");
    }
    if (mask && (mask->width != gt.width || mask->height != gt.height)) {
        throw std::invalid_argument("flow metrics: mask dimensions differ");
    }

    ErrorStats stats;
    const std::size_t n = gt.valid.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!gt.valid[i]) continue;
        if (mask && !mask->pass[i]) continue;
        const double du = static_cast<double>(pred.u[i]) - gt.u[i];
        const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
        const double err = std::sqrt(du * du + dv * dv);
        stats.epe_sum += err;
        if (err > threshold_px) ++stats.outliers;
        ++stats.count;
    }
    return stats;
}

}  // namespace

double end_point_error(const FlowField& pred, const FlowField& gt,
                       const OcclusionMask* mask) {
    const ErrorStats stats = accumulate_errors(pred, gt, mask, 3.0);
    if (stats.count == 0) {
        throw std::invalid_argument("end_point_error: empty evaluation set");
    }
    return stats.epe_sum / static_cast<double>(stats.count);
}

double outlier_rate(const FlowField& pred, const FlowField& gt,
                    const OcclusionMask* mask, double threshold_px) {
    const ErrorStats stats = accumulate_errors(pred, gt, mask, threshold_px);
    if (stats.count == 0) {
        throw std::invalid_argument("outlier_rate: empty evaluation set");
    }
    return static_cast<double>(stats.outliers) / static_cast<double>(stats.count);
}

FlowMetrics compute_metrics(const FlowField& pred, const FlowField& gt_noc,
                            const FlowField* gt_occ, double outlier_threshold_px) {
    FlowMetrics metrics;
    const FlowField& gt_all = gt_occ ? *gt_occ : gt_noc;

    const ErrorStats all = accumulate_errors(pred, gt_all, nullptr, outlier_threshold_px);
    if (all.count > 0) {
        metrics.epe_all = all.epe_sum / static_cast<double>(all.count);
        metrics.out_all = static_cast<double>(all.outliers) / static_cast<double>(all.count);
    }
    metrics.evaluated_pixel_count = all.count;

    const ErrorStats noc = accumulate_errors(pred, gt_noc, nullptr, outlier_threshold_px);
    if (noc.count > 0) {
        metrics.epe_noc = noc.epe_sum / static_cast<double>(noc.count);
        metrics.out_noc = static_cast<double>(noc.outliers) / static_cast<double>(noc.count);
    }

    std::size_t pred_valid = 0;
    for (std::uint8_t v : pred.valid) pred_valid += v ? 1 : 0;
    metrics.density = pred.valid.empty()
                          ? 0.0
                          : static_cast<double>(pred_valid) / static_cast<double>(pred.valid.size());
    return metrics;
}

}  // namespace degraf
