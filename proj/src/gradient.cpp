#include "degraf/gradient.hpp"

#include <cmath>
#include <stdexcept>

namespace degraf {

std::pair<FloatImage, FloatImage> gradient(const GrayImage& image) {
    const int w = image.width();
    const int h = image.height();
    if (w < 3 || h < 3) {
        throw std::invalid_argument("gradient: image must be at least 3x3");
    }

    FloatImage gx(w, h);
    FloatImage gy(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* cur = image.row(y);
        const float* up = image.row(y > 0 ? y - 1 : 0);
        const float* dn = image.row(y < h - 1 ? y + 1 : h - 1);
        float* ox = gx.row(y);
        float* oy = gy.row(y);

        ox[0] = cur[1] - cur[0];
        for (int x = 1; x < w - 1; ++x) {
            ox[x] = 0.5f * (cur[x + 1] - cur[x - 1]);
        }
        ox[w - 1] = cur[w - 1] - cur[w - 2];

        if (y == 0) {
            for (int x = 0; x < w; ++x) oy[x] = dn[x] - cur[x];
        } else if (y == h - 1) {
            for (int x = 0; x < w; ++x) oy[x] = cur[x] - up[x];
        } else {
            for (int x = 0; x < w; ++x) oy[x] = 0.5f * (dn[x] - up[x]);
        }
    }
    return {std::move(gx), std::move(gy)};
}

FloatImage gradient_magnitude(const GrayImage& image) {
    auto [gx, gy] = gradient(image);
    const int w = image.width();
    const int h = image.height();
    FloatImage mag(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* rx = gx.row(y);
        const float* ry = gy.row(y);
        float* out = mag.row(y);
        for (int x = 0; x < w; ++x) {
            out[x] = std::sqrt(rx[x] * rx[x] + ry[x] * ry[x]);
        }
    }
    return mag;
}

}  // namespace degraf
