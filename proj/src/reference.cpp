#include "degraf/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace degraf::reference {

double window_sum(const GrayImage& image, int x0, int y0, int w, int h) {
    double acc = 0.0;
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            acc += image.at(x, y);
        }
    }
    return acc;
}

CentroidPair window_centroids(const GrayImage& image, int x0, int y0, int w, int h) {
    float m = image.at(x0, y0);
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            m = std::max(m, image.at(x, y));
        }
    }

    CentroidPair pair;
    double pos_r = 0.0, pos_c = 0.0, neg_r = 0.0, neg_c = 0.0;
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const double v = image.at(x0 + j, y0 + i);
            const double inv = 1.0 + m - v;
            pair.s_pos += v;
            pos_r += i * v;
            pos_c += j * v;
            pair.s_neg += inv;
            neg_r += i * inv;
            neg_c += j * inv;
        }
    }
    if (pair.s_pos > 0.0) {
        pair.c_pos = {pos_c / pair.s_pos, pos_r / pair.s_pos};
    } else {
        pair.c_pos = {(w - 1) * 0.5, (h - 1) * 0.5};
    }
    pair.c_neg = {neg_c / pair.s_neg, neg_r / pair.s_neg};
    return pair;
}

void gradient(const GrayImage& image, FloatImage& gx, FloatImage& gy) {
    const int w = image.width();
    const int h = image.height();
    if (w < 3 || h < 3) {
        throw std::invalid_argument("reference::gradient: image must be at least 3x3");
    }
    gx = FloatImage(w, h);
    gy = FloatImage(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int xl = x > 0 ? x - 1 : 0;
            const int xr = x < w - 1 ? x + 1 : w - 1;
            const int yu = y > 0 ? y - 1 : 0;
            const int yd = y < h - 1 ? y + 1 : h - 1;
            const float sx = x > 0 && x < w - 1 ? 0.5f : 1.0f;
            const float sy = y > 0 && y < h - 1 ? 0.5f : 1.0f;
            gx.at(x, y) = sx * (image.at(xr, y) - image.at(xl, y));
            gy.at(x, y) = sy * (image.at(x, yd) - image.at(x, yu));
        }
    }
}

KeypointGrid detect_grid(const GrayImage& image, const DetectorParams& params) {
    if (image.width() < params.window_w || image.height() < params.window_h) {
        throw std::invalid_argument("reference::detect_grid: image smaller than the window");
    }
    KeypointGrid grid;
    grid.params = params;
    grid.grid_cols = grid_positions(image.width(), params.window_w, params.step);
    grid.grid_rows = grid_positions(image.height(), params.window_h, params.step);
    grid.points.reserve(static_cast<std::size_t>(grid.grid_cols) * grid.grid_rows);
    for (int gy = 0; gy < grid.grid_rows; ++gy) {
        for (int gx = 0; gx < grid.grid_cols; ++gx) {
            const int x0 = gx * params.step;
            const int y0 = gy * params.step;
            const CentroidPair pair = reference::window_centroids(
                image, x0, y0, params.window_w, params.window_h);
            grid.points.push_back(select_keypoint(
                pair, {static_cast<double>(x0), static_cast<double>(y0)}));
        }
    }
    return grid;
}

SparseFlow track_points_serial(const GrayImage& frame1, const GrayImage& frame2,
                               std::span<const Point2> points,
                               const TrackParams& params) {
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    SparseFlow out = track_points(frame1, frame2, points, params);
    omp_set_num_threads(saved);
    return out;
#else
    return track_points(frame1, frame2, points, params);
#endif
}

std::vector<std::vector<double>> seed_distances(const EdgeCostMap& cost,
                                                std::span<const Point2> seeds,
                                                double lambda,
                                                bool eight_connectivity) {
    const int w = cost.width();
    const int h = cost.height();
    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    const double inf = std::numeric_limits<double>::infinity();

    struct Step {
        int dx, dy;
        double base;
    };
    std::vector<Step> steps = {{1, 0, 1.0}, {-1, 0, 1.0}, {0, 1, 1.0}, {0, -1, 1.0}};
    if (eight_connectivity) {
        const double s2 = std::sqrt(2.0);
        steps.insert(steps.end(), {{1, 1, s2}, {1, -1, s2}, {-1, 1, s2}, {-1, -1, s2}});
    }

    std::vector<std::vector<double>> result(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        auto& dist = result[s];
        dist.assign(pixels, inf);
        int px = static_cast<int>(std::lround(seeds[s].x));
        int py = static_cast<int>(std::lround(seeds[s].y));
        px = std::clamp(px, 0, w - 1);
        py = std::clamp(py, 0, h - 1);

        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
        dist[static_cast<std::size_t>(py) * w + px] = 0.0;
        pq.push({0.0, py * w + px});
        while (!pq.empty()) {
            const auto [d, pix] = pq.top();
            pq.pop();
            if (d != dist[pix]) continue;
            const int x = pix % w;
            const int y = pix / w;
            const double cost_p = cost.at(x, y);
            for (const Step& st : steps) {
                const int qx = x + st.dx;
                const int qy = y + st.dy;
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                const int q = qy * w + qx;
                const double edge =
                    st.base * (1.0 + lambda * 0.5 * (cost_p + cost.at(qx, qy)));
                if (d + edge < dist[q]) {
                    dist[q] = d + edge;
                    pq.push({d + edge, q});
                }
            }
        }
    }
    return result;
}

FlowField interpolate_exhaustive(const SparseFlow& sparse, const GrayImage& image,
                                 const InterpParams& params) {
    std::vector<Point2> positions;
    std::vector<Point2> flows;
    for (const FlowRecord& rec : sparse.records) {
        if (rec.status != TrackStatus::valid) continue;
        positions.push_back(rec.origin);
        flows.push_back({rec.du, rec.dv});
    }
    if (positions.empty()) {
        throw std::invalid_argument("interpolate_exhaustive: no valid sparse records");
    }

    const EdgeCostMap cost = edge_cost_map(image);
    const auto dist = seed_distances(cost, positions, params.lambda,
                                     params.eight_connectivity);
    const int num_seeds = static_cast<int>(positions.size());
    const int k = std::min(params.k, num_seeds);

    const int w = image.width();
    const int h = image.height();
    FlowField out(w, h);
    std::vector<int> order(num_seeds);
    std::vector<SeedRecord> records;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t pix = static_cast<std::size_t>(y) * w + x;
            for (int s = 0; s < num_seeds; ++s) order[s] = s;
            // Exact k nearest by true geodesic distance; ties by seed id.
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return dist[a][pix] < dist[b][pix];
            });
            records.clear();
            for (int j = 0; j < k; ++j) {
                const int s = order[j];
                records.push_back({positions[s], flows[s].x, flows[s].y, dist[s][pix]});
            }
            const AffineModel model = fit_local_affine(records, params.sigma);
            const Point2 flow = model.evaluate(x, y);
            out.set(x, y, static_cast<float>(flow.x), static_cast<float>(flow.y));
        }
    }
    return out;
}

}  // namespace degraf::reference
