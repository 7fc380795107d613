#include "degraf/detector.hpp"

#include <stdexcept>

#include "degraf/gradient.hpp"
#include "degraf/integral.hpp"

namespace degraf {

namespace {

void validate_params(const DetectorParams& p) {
    if (p.window_w < 2 || p.window_h < 2) {
        throw std::invalid_argument("detector: window must be at least 2x2");
    }
    if (p.step < 1) {
        throw std::invalid_argument("detector: step must be >= 1");
    }
}

void validate_image(const GrayImage& image, const DetectorParams& p) {
    if (image.width() < p.window_w || image.height() < p.window_h) {
        throw std::invalid_argument("detector: image smaller than the window");
    }
}

float window_max(const GrayImage& image, int x0, int y0, int w, int h) {
    float m = image.at(x0, y0);
    for (int y = y0; y < y0 + h; ++y) {
        const float* r = image.row(y);
        for (int x = x0; x < x0 + w; ++x) {
            if (r[x] > m) m = r[x];
        }
    }
    return m;
}

KeypointGrid make_grid(const GrayImage& image, const DetectorParams& params) {
    KeypointGrid grid;
    grid.params = params;
    grid.grid_cols = grid_positions(image.width(), params.window_w, params.step);
    grid.grid_rows = grid_positions(image.height(), params.window_h, params.step);
    grid.points.resize(static_cast<std::size_t>(grid.grid_cols) * grid.grid_rows);
    return grid;
}

}  // namespace

std::pair<Point2, double> positive_centroid(const GrayImage& image, int x0, int y0,
                                            int w, int h) {
    double mass = 0.0, row_acc = 0.0, col_acc = 0.0;
    for (int i = 0; i < h; ++i) {
        const float* r = image.row(y0 + i);
        for (int j = 0; j < w; ++j) {
            const double v = r[x0 + j];
            mass += v;
            row_acc += i * v;
            col_acc += j * v;
        }
    }
    if (mass <= 0.0) {
        // All-black window: the weighted mean is undefined, fall back to
        // the window center.
        return {Point2{(w - 1) * 0.5, (h - 1) * 0.5}, 0.0};
    }
    return {Point2{col_acc / mass, row_acc / mass}, mass};
}

std::pair<Point2, double> negative_centroid(const GrayImage& image, int x0, int y0,
                                            int w, int h, float region_max) {
    const double offset = 1.0 + region_max;
    double mass = 0.0, row_acc = 0.0, col_acc = 0.0;
    for (int i = 0; i < h; ++i) {
        const float* r = image.row(y0 + i);
        for (int j = 0; j < w; ++j) {
            const double v = offset - r[x0 + j];  // >= 1 by construction
            mass += v;
            row_acc += i * v;
            col_acc += j * v;
        }
    }
    return {Point2{col_acc / mass, row_acc / mass}, mass};
}

CentroidPair window_centroids(const GrayImage& image, int x0, int y0, int w, int h) {
    const float m = window_max(image, x0, y0, w, h);
    CentroidPair pair;
    auto [cp, sp] = positive_centroid(image, x0, y0, w, h);
    auto [cn, sn] = negative_centroid(image, x0, y0, w, h, m);
    pair.c_pos = cp;
    pair.s_pos = sp;
    pair.c_neg = cn;
    pair.s_neg = sn;
    return pair;
}

Point2 select_keypoint(const CentroidPair& pair, const Point2& window_origin) {
    const Point2& local = pair.s_neg > pair.s_pos ? pair.c_neg : pair.c_pos;
    return {window_origin.x + local.x, window_origin.y + local.y};
}

KeypointGrid detect_grid(const GrayImage& image, const DetectorParams& params) {
    validate_params(params);
    validate_image(image, params);

    const int w = params.window_w;
    const int h = params.window_h;
    const int step = params.step;
    KeypointGrid grid = make_grid(image, params);

    const SummedAreaTable sat(image);
    // Window-local weighted sums of the constant weight fields, used to
    // derive the inverted-intensity sums from the positive ones.
    const double area = static_cast<double>(w) * h;
    const double row_index_sum = static_cast<double>(w) * h * (h - 1) * 0.5;
    const double col_index_sum = static_cast<double>(h) * w * (w - 1) * 0.5;
    const double half_x = (w - 1) * 0.5;
    const double half_y = (h - 1) * 0.5;

#pragma omp parallel for schedule(static)
    for (int gy = 0; gy < grid.grid_rows; ++gy) {
        const int y0 = gy * step;
        for (int gx = 0; gx < grid.grid_cols; ++gx) {
            const int x0 = gx * step;

            const double s_pos = sat.sum(x0, y0, w, h);
            const double row_pos = sat.row_weighted_sum(x0, y0, w, h) - y0 * s_pos;
            const double col_pos = sat.col_weighted_sum(x0, y0, w, h) - x0 * s_pos;

            const double offset = 1.0 + window_max(image, x0, y0, w, h);
            const double s_neg = area * offset - s_pos;
            const double row_neg = row_index_sum * offset - row_pos;
            const double col_neg = col_index_sum * offset - col_pos;

            Point2 local;
            if (s_neg > s_pos) {
                local = {col_neg / s_neg, row_neg / s_neg};
            } else if (s_pos > 0.0) {
                local = {col_pos / s_pos, row_pos / s_pos};
            } else {
                local = {half_x, half_y};
            }
            grid.points[static_cast<std::size_t>(gy) * grid.grid_cols + gx] = {
                x0 + local.x, y0 + local.y};
        }
    }
    return grid;
}

KeypointGrid regular_grid(const GrayImage& image, const DetectorParams& params) {
    validate_params(params);
    validate_image(image, params);

    KeypointGrid grid = make_grid(image, params);
    const double half_x = (params.window_w - 1) * 0.5;
    const double half_y = (params.window_h - 1) * 0.5;
    for (int gy = 0; gy < grid.grid_rows; ++gy) {
        for (int gx = 0; gx < grid.grid_cols; ++gx) {
            grid.points[static_cast<std::size_t>(gy) * grid.grid_cols + gx] = {
                gx * params.step + half_x, gy * params.step + half_y};
        }
    }
    return grid;
}

KeypointGrid gradient_maxima_grid(const GrayImage& image, const DetectorParams& params) {
    validate_params(params);
    validate_image(image, params);
    if (image.width() < 3 || image.height() < 3) {
        throw std::invalid_argument("gradient_maxima_grid: image must be at least 3x3");
    }

    const FloatImage mag = gradient_magnitude(image);
    KeypointGrid grid = make_grid(image, params);

#pragma omp parallel for schedule(static)
    for (int gy = 0; gy < grid.grid_rows; ++gy) {
        const int y0 = gy * params.step;
        for (int gx = 0; gx < grid.grid_cols; ++gx) {
            const int x0 = gx * params.step;
            int best_x = x0, best_y = y0;
            float best = mag.at(x0, y0);
            for (int y = y0; y < y0 + params.window_h; ++y) {
                const float* r = mag.row(y);
                for (int x = x0; x < x0 + params.window_w; ++x) {
                    if (r[x] > best) {
                        best = r[x];
                        best_x = x;
                        best_y = y;
                    }
                }
            }
            grid.points[static_cast<std::size_t>(gy) * grid.grid_cols + gx] = {
                static_cast<double>(best_x), static_cast<double>(best_y)};
        }
    }
    return grid;
}

}  // namespace degraf
