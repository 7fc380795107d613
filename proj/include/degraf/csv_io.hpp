#pragma once

#include <span>
#include <string>
#include <vector>

#include "degraf/image.hpp"
#include "degraf/tracker.hpp"

namespace degraf {

/// Keypoint list: header "x,y", one subpixel point per row, 4 decimals.
void write_keypoints_csv(std::span<const Point2> points, const std::string& path);
std::vector<Point2> read_keypoints_csv(const std::string& path);

/// Sparse flow interchange: header "x,y,u,v,status", 4 decimals. This is
/// the seam that lets third-party matches feed the interpolator.
void write_sparse_flow_csv(const SparseFlow& flow, const std::string& path);
SparseFlow read_sparse_flow_csv(const std::string& path);

}  // namespace degraf
