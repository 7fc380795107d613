#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace degraf {

/// Subpixel image coordinate. x runs along columns, y along rows.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Row-major single-channel raster of 32-bit floats.
///
/// Used both for grayscale intensities (range [0, 255], enforced at the
/// I/O boundary) and for derived signed rasters such as gradients and
/// edge costs.
class FloatImage {
public:
    FloatImage() = default;
    FloatImage(int width, int height, float fill = 0.0f)
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    const float* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
    float* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    /// True when (x, y) can be sampled bilinearly without leaving the raster.
    bool in_bounds_subpixel(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x <= width_ - 1.0 && y <= height_ - 1.0;
    }

    /// Bilinear sample at subpixel coordinates. Caller guarantees
    /// in_bounds_subpixel(x, y).
    float bilinear(double x, double y) const {
        int x0 = static_cast<int>(x);
        int y0 = static_cast<int>(y);
        if (x0 > width_ - 2) x0 = width_ - 2;
        if (y0 > height_ - 2) y0 = height_ - 2;
        if (x0 < 0) x0 = 0;
        if (y0 < 0) y0 = 0;
        const double fx = x - x0;
        const double fy = y - y0;
        const float* r0 = row(y0);
        const float* r1 = row(y0 + 1);
        const double top = r0[x0] + fx * (r0[x0 + 1] - r0[x0]);
        const double bot = r1[x0] + fx * (r1[x0 + 1] - r1[x0]);
        return static_cast<float>(top + fy * (bot - top));
    }

    bool same_size(const FloatImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Grayscale intensity raster, values in [0, 255].
using GrayImage = FloatImage;

/// Dense per-pixel flow field with validity mask. Also serves as the
/// container for semi-dense ground truth (valid = 0 where no truth exists).
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;
    std::vector<float> v;
    std::vector<std::uint8_t> valid;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h),
          u(static_cast<std::size_t>(w) * h, 0.0f),
          v(static_cast<std::size_t>(w) * h, 0.0f),
          valid(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }

    void set(int x, int y, float fu, float fv, bool ok = true) {
        const std::size_t i = index(x, y);
        u[i] = fu;
        v[i] = fv;
        valid[i] = ok ? 1 : 0;
    }

    bool same_size(const FlowField& other) const {
        return width == other.width && height == other.height;
    }
};

/// Interleaved 8-bit RGB raster for visualization output.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // r,g,b per pixel, row-major

    RgbImage() = default;
    RgbImage(int w, int h)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* pixel(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
};

}  // namespace degraf
