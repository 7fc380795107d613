#include "degraf/pyramid.hpp"

#include <cmath>
#include <stdexcept>

namespace degraf {

namespace {

// 5-tap binomial [1 4 6 4 1]/16, separable, clamped borders.
FloatImage binomial_smooth(const FloatImage& src) {
    const int w = src.width();
    const int h = src.height();
    static const float kernel[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

    FloatImage tmp(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* in = src.row(y);
        float* out = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int t = -2; t <= 2; ++t) {
                int xs = x + t;
                if (xs < 0) xs = 0;
                if (xs > w - 1) xs = w - 1;
                acc += kernel[t + 2] * in[xs];
            }
            out[x] = acc;
        }
    }

    FloatImage dst(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        float* out = dst.row(y);
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int t = -2; t <= 2; ++t) {
                int ys = y + t;
                if (ys < 0) ys = 0;
                if (ys > h - 1) ys = h - 1;
                acc += kernel[t + 2] * tmp.at(x, ys);
            }
            out[x] = acc;
        }
    }
    return dst;
}

// Center-aligned bilinear subsampling of a pre-smoothed image.
FloatImage subsample(const FloatImage& src, int out_w, int out_h, double scale) {
    FloatImage dst(out_w, out_h);
    const double inv = 1.0 / scale;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * inv - 0.5;
        float* out = dst.row(y);
        for (int x = 0; x < out_w; ++x) {
            const double sx = (x + 0.5) * inv - 0.5;
            out[x] = src.bilinear(sx, sy);
        }
    }
    return dst;
}

}  // namespace

Pyramid build_pyramid(const GrayImage& image, int levels, double scale) {
    if (levels < 1) {
        throw std::invalid_argument("build_pyramid: levels must be >= 1");
    }
    if (!(scale > 0.0 && scale < 1.0)) {
        throw std::invalid_argument("build_pyramid: scale must lie in (0, 1)");
    }

    // Validate the full level geometry before any work.
    int w = image.width();
    int h = image.height();
    if (w < 4 || h < 4) {
        throw std::invalid_argument("build_pyramid: image smaller than 4x4");
    }
    for (int level = 1; level < levels; ++level) {
        w = static_cast<int>(std::floor(w * scale));
        h = static_cast<int>(std::floor(h * scale));
        if (w < 4 || h < 4) {
            throw std::invalid_argument(
                "build_pyramid: requested levels would shrink below 4x4");
        }
    }

    Pyramid pyr;
    pyr.scale = scale;
    pyr.levels.reserve(levels);
    pyr.levels.push_back(image);
    for (int level = 1; level < levels; ++level) {
        const FloatImage& prev = pyr.levels.back();
        const int out_w = static_cast<int>(std::floor(prev.width() * scale));
        const int out_h = static_cast<int>(std::floor(prev.height() * scale));
        pyr.levels.push_back(subsample(binomial_smooth(prev), out_w, out_h, scale));
    }
    return pyr;
}

}  // namespace degraf
