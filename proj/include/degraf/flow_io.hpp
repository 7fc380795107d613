#pragma once

#include <string>

#include "degraf/image.hpp"

namespace degraf {

/// Reads a KITTI-format flow PNG: 16-bit, 3 channels, u = (R - 2^15)/64,
/// v = (G - 2^15)/64, valid = B != 0.
///
/// Throws std::runtime_error on unreadable files or wrong bit depth /
/// channel count.
FlowField read_flow_kitti(const std::string& path);

/// Exact inverse of read_flow_kitti with round-to-nearest quantization.
/// Valid pixels whose encoded value leaves [0, 65535] raise
/// std::runtime_error; invalid pixels are clamped instead (their values
/// carry no meaning).
void write_flow_kitti(const FlowField& field, const std::string& path);

/// Standard flow color wheel: hue from atan2(v, u), saturation from
/// magnitude / max_magnitude clipped to 1. Zero flow renders white,
/// invalid pixels black. max_magnitude <= 0 selects the field maximum.
RgbImage flow_to_color(const FlowField& field, double max_magnitude = 0.0);

}  // namespace degraf
