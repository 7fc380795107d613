#pragma once

#include <utility>
#include <vector>

#include "degraf/image.hpp"

namespace degraf {

/// Sliding-window configuration of the dense-gradient keypoint detector.
struct DetectorParams {
    int window_w = 3;
    int window_h = 3;
    int step = 9;
};

/// Positive/negative intensity centroids of one window, in window-local
/// (x, y) coordinates, together with their mass sums.
struct CentroidPair {
    Point2 c_pos;
    Point2 c_neg;
    double s_pos = 0.0;
    double s_neg = 0.0;
};

/// Subpixel keypoints on a regular window grid, in full-image coordinates.
/// Window origins advance by params.step; points are emitted row-major
/// over window positions.
struct KeypointGrid {
    std::vector<Point2> points;
    DetectorParams params;
    int grid_cols = 0;
    int grid_rows = 0;
};

/// Number of window positions along one dimension: floor((extent - window) / step) + 1.
inline int grid_positions(int extent, int window, int step) {
    return (extent - window) / step + 1;
}

/// Intensity-weighted mean coordinate of the window with origin (x0, y0),
/// returned window-local, plus the intensity mass. An all-zero window
/// falls back to the window center with mass 0.
std::pair<Point2, double> positive_centroid(const GrayImage& image, int x0, int y0,
                                            int w, int h);

/// Centroid of inverted intensities 1 + m - I, where m is the window
/// maximum; the +1 offset keeps every weight at least 1, so the mass is
/// always >= w * h and no degenerate branch exists.
std::pair<Point2, double> negative_centroid(const GrayImage& image, int x0, int y0,
                                            int w, int h, float region_max);

/// Both centroids of one window.
CentroidPair window_centroids(const GrayImage& image, int x0, int y0, int w, int h);

/// Stability rule: the centroid with the larger mass wins; ties go to the
/// positive centroid. Returns full-image coordinates.
Point2 select_keypoint(const CentroidPair& pair, const Point2& window_origin);

/// Detects one keypoint per window position. Windows that would extend
/// past the image are dropped (no padding). Window sums come from
/// summed-area tables, so each window costs O(window area) only for the
/// max query. Window evaluations run in parallel.
///
/// Throws std::invalid_argument when the image is smaller than the window
/// or params violate their invariants.
KeypointGrid detect_grid(const GrayImage& image, const DetectorParams& params);

/// Baseline: keypoints at window centers, same grid geometry as detect_grid.
KeypointGrid regular_grid(const GrayImage& image, const DetectorParams& params);

/// Baseline: per window, the pixel with the largest gradient magnitude.
KeypointGrid gradient_maxima_grid(const GrayImage& image, const DetectorParams& params);

}  // namespace degraf
