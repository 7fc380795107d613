#pragma once

#include <utility>

#include "degraf/image.hpp"

namespace degraf {

/// Image gradients: central differences in the interior, one-sided
/// differences on the border rows/columns. Outputs match the input size.
///
/// Throws std::invalid_argument for images smaller than 3x3.
std::pair<FloatImage, FloatImage> gradient(const GrayImage& image);

/// Gradient magnitude sqrt(gx^2 + gy^2).
FloatImage gradient_magnitude(const GrayImage& image);

}  // namespace degraf
