#pragma once

#include <vector>

#include "degraf/image.hpp"

namespace degraf {

/// Integral images over intensity, row-weighted intensity (y * I) and
/// column-weighted intensity (x * I), accumulated in double precision.
/// Any rectangle query costs four table lookups.
class SummedAreaTable {
public:
    explicit SummedAreaTable(const GrayImage& image);

    int width() const { return width_; }
    int height() const { return height_; }

    /// Sum of I over the window [x0, x0+w) x [y0, y0+h).
    double sum(int x0, int y0, int w, int h) const {
        return rect(plain_, x0, y0, w, h);
    }

    /// Sum of y * I(x, y) over the window, y in absolute image rows.
    double row_weighted_sum(int x0, int y0, int w, int h) const {
        return rect(row_weighted_, x0, y0, w, h);
    }

    /// Sum of x * I(x, y) over the window, x in absolute image columns.
    double col_weighted_sum(int x0, int y0, int w, int h) const {
        return rect(col_weighted_, x0, y0, w, h);
    }

private:
    double rect(const std::vector<double>& t, int x0, int y0, int w, int h) const {
        const std::size_t stride = width_ + 1;
        const std::size_t a = static_cast<std::size_t>(y0) * stride + x0;
        const std::size_t b = static_cast<std::size_t>(y0 + h) * stride + x0;
        return t[b + w] - t[b] - t[a + w] + t[a];
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> plain_;
    std::vector<double> row_weighted_;
    std::vector<double> col_weighted_;
};

}  // namespace degraf
