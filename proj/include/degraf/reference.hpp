#pragma once

#include <span>
#include <vector>

#include "degraf/detector.hpp"
#include "degraf/image.hpp"
#include "degraf/interp.hpp"
#include "degraf/tracker.hpp"

// Serial reference implementations kept for testing and benchmarking.
// Everything here favors directness over speed: plain double loops and
// exhaustive searches, independent of the optimized paths in the main
// library. Linked by the test and benchmark targets only.
namespace degraf::reference {

/// Direct double-loop window sum.
double window_sum(const GrayImage& image, int x0, int y0, int w, int h);

/// Direct evaluation of both window centroids (window-local coordinates).
CentroidPair window_centroids(const GrayImage& image, int x0, int y0, int w, int h);

/// Serial central/one-sided difference gradients.
void gradient(const GrayImage& image, FloatImage& gx, FloatImage& gy);

/// Naive serial detector: per-window double loops, no integral images.
KeypointGrid detect_grid(const GrayImage& image, const DetectorParams& params);

/// Serial single-threaded tracking driver (same per-point math).
SparseFlow track_points_serial(const GrayImage& frame1, const GrayImage& frame2,
                               std::span<const Point2> points,
                               const TrackParams& params);

/// Exhaustive geodesic distances: one full-grid Dijkstra per seed.
/// result[s][pixel] is the exact geodesic distance from seed s.
/// Intended for small instances only.
std::vector<std::vector<double>> seed_distances(const EdgeCostMap& cost,
                                                std::span<const Point2> seeds,
                                                double lambda,
                                                bool eight_connectivity = false);

/// Exhaustive sparse-to-dense interpolation: per-pixel exact k nearest
/// seeds (from seed_distances) and a per-pixel affine fit. Small
/// instances only.
FlowField interpolate_exhaustive(const SparseFlow& sparse, const GrayImage& image,
                                 const InterpParams& params);

}  // namespace degraf::reference
