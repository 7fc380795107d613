#pragma once

#include <string>

#include "degraf/image.hpp"

namespace degraf {

/// Loads an 8-bit grayscale image from PNG or PGM (P5/P2). Color PNGs are
/// converted with the luma formula 0.299 R + 0.587 G + 0.114 B.
///
/// Throws std::runtime_error on missing files, undecodable content or
/// unsupported bit depth.
GrayImage load_gray(const std::string& path);

void write_gray_png(const GrayImage& image, const std::string& path);
void write_gray_pgm(const GrayImage& image, const std::string& path);
void write_rgb_png(const RgbImage& image, const std::string& path);

}  // namespace degraf
