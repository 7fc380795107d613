#pragma once

#include <span>
#include <vector>

#include "degraf/image.hpp"
#include "degraf/tracker.hpp"

namespace degraf {

/// Per-pixel edge-crossing cost in [0, 1]: gradient magnitude normalized
/// by its image-wide maximum (identically 0 for constant images).
using EdgeCostMap = FloatImage;

EdgeCostMap edge_cost_map(const GrayImage& image);

struct InterpParams {
    int k = 128;
    double lambda = 100.0;  // edge-penalty strength in the geodesic weight
    double sigma = 10.0;    // distance scale of the fitting weights
    bool eight_connectivity = false;
};

/// Geodesic neighborhood structure built by multi-source shortest paths.
///
/// label/nearest_distance give each pixel's geodesically nearest seed.
/// Per-seed neighbor lists approximate each pixel's k nearest seeds
/// through the seed adjacency graph induced by the label map: a pixel's
/// neighborhood is its nearest seed's list, at distance
/// nearest_distance(pixel) + graph distance(seed, other).
struct SeedNeighborhood {
    int width = 0;
    int height = 0;
    int k = 0;
    std::vector<int> label;                // per pixel, nearest seed id
    std::vector<double> nearest_distance;  // per pixel, its geodesic distance

    struct Neighbor {
        int seed = -1;
        double distance = 0.0;  // graph distance from the owning seed
    };
    /// Per seed: itself first (distance 0), then up to k-1 nearest seeds
    /// by graph distance, nondecreasing.
    std::vector<std::vector<Neighbor>> seed_neighbors;

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }

    /// Materializes the k nearest seeds of one pixel: ids plus full
    /// geodesic distances, sorted nondecreasing; the first entry's
    /// distance equals nearest_distance at that pixel.
    std::vector<Neighbor> pixel_neighbors(int x, int y) const;
};

/// Multi-source Dijkstra over the pixel grid with edge weight
/// 1 + lambda * (cost(p) + cost(q)) / 2 between adjacent pixels
/// (scaled by sqrt(2) on diagonals when eight_connectivity is set),
/// followed by per-seed Dijkstra over the induced seed graph.
/// Effective k is min(k, seed count). Ties in the label map resolve to
/// the lowest seed id.
///
/// Throws std::invalid_argument for an empty seed list, k < 1, or seeds
/// out of bounds.
SeedNeighborhood geodesic_nearest_seeds(const EdgeCostMap& cost,
                                        std::span<const Point2> seeds, int k,
                                        double lambda = 100.0,
                                        bool eight_connectivity = false);

/// One interpolation support record: a seed's position, flow and distance.
struct SeedRecord {
    Point2 position;
    double u = 0.0;
    double v = 0.0;
    double distance = 0.0;
};

/// Local flow model u(x, y) = au[0]*x + au[1]*y + au[2] (v likewise).
struct AffineModel {
    double au[3] = {0.0, 0.0, 0.0};
    double av[3] = {0.0, 0.0, 0.0};
    bool constant_fallback = false;

    Point2 evaluate(double x, double y) const {
        return {au[0] * x + au[1] * y + au[2], av[0] * x + av[1] * y + av[2]};
    }
};

/// Weighted least-squares affine fit with weights exp(-distance / sigma).
/// Falls back to the weighted mean when fewer than 3 neighbors are given
/// or the normalized normal matrix has condition number above 1e8.
///
/// Throws std::invalid_argument for an empty neighbor list.
AffineModel fit_local_affine(std::span<const SeedRecord> neighbors, double sigma);

/// Sparse-to-dense interpolation: seeds are the valid sparse records, one
/// affine model is fitted per seed neighborhood, and every pixel evaluates
/// the model of its geodesically nearest seed at its own coordinates.
/// A uniform weight factor exp(-nearest_distance/sigma) cancels out of the
/// weighted fit, so sharing the fit across a seed's pixels is exact.
/// The output is fully dense (all pixels valid).
///
/// Throws std::invalid_argument when no valid record exists or the image
/// is smaller than 3x3.
FlowField interpolate(const SparseFlow& sparse, const GrayImage& image,
                      const InterpParams& params);

}  // namespace degraf
