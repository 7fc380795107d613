#pragma once

#include <vector>

#include "degraf/image.hpp"

namespace degraf {

/// Coarse-to-fine image stack. levels[0] is the full-resolution input;
/// level L+1 dimensions are floor(level L dimensions * scale).
struct Pyramid {
    std::vector<GrayImage> levels;
    double scale = 0.5;

    int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Builds a pyramid by 5-tap binomial low-pass filtering followed by
/// center-aligned bilinear subsampling.
///
/// Throws std::invalid_argument when levels < 1, scale is outside (0, 1),
/// or the coarsest level would shrink below 4x4.
Pyramid build_pyramid(const GrayImage& image, int levels, double scale = 0.5);

/// Maps a full-resolution coordinate onto a pyramid level under the
/// center-aligned subsampling convention used by build_pyramid.
inline Point2 to_level(const Point2& p, double scale, int level) {
    double s = 1.0;
    for (int i = 0; i < level; ++i) s *= scale;
    return {(p.x + 0.5) * s - 0.5, (p.y + 0.5) * s - 0.5};
}

}  // namespace degraf
