#include "degraf/interp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "degraf/gradient.hpp"

namespace degraf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kConditionLimit = 1e8;

struct GridNeighbor {
    int dx, dy;
    double base;  // geometric length of the step
};

// 4-connected steps first; the diagonal tail is used only under
// eight-connectivity.
constexpr GridNeighbor kSteps[8] = {
    {1, 0, 1.0},  {-1, 0, 1.0},  {0, 1, 1.0},  {0, -1, 1.0},
    {1, 1, kSqrt2}, {1, -1, kSqrt2}, {-1, 1, kSqrt2}, {-1, -1, kSqrt2},
};

inline int clamp_pixel(double v, int limit) {
    int p = static_cast<int>(std::lround(v));
    if (p < 0) p = 0;
    if (p > limit - 1) p = limit - 1;
    return p;
}

}  // namespace

EdgeCostMap edge_cost_map(const GrayImage& image) {
    FloatImage mag = gradient_magnitude(image);  // throws for images < 3x3
    float max_mag = 0.0f;
    const std::size_t n = mag.size();
    const float* m = mag.data();
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i] > max_mag) max_mag = m[i];
    }
    if (max_mag <= 0.0f) {
        return FloatImage(image.width(), image.height(), 0.0f);
    }
    const float inv = 1.0f / max_mag;
    float* out = mag.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        out[i] *= inv;
    }
    return mag;
}

std::vector<SeedNeighborhood::Neighbor> SeedNeighborhood::pixel_neighbors(int x,
                                                                          int y) const {
    const std::size_t i = index(x, y);
    const int owner = label[i];
    const double base = nearest_distance[i];
    std::vector<Neighbor> out;
    const auto& list = seed_neighbors[owner];
    out.reserve(list.size());
    for (const Neighbor& nb : list) {
        out.push_back({nb.seed, base + nb.distance});
    }
    return out;
}

SeedNeighborhood geodesic_nearest_seeds(const EdgeCostMap& cost,
                                        std::span<const Point2> seeds, int k,
                                        double lambda, bool eight_connectivity) {
    if (seeds.empty()) {
        throw std::invalid_argument("geodesic_nearest_seeds: empty seed list");
    }
    if (k < 1) {
        throw std::invalid_argument("geodesic_nearest_seeds: k must be >= 1");
    }
    const int w = cost.width();
    const int h = cost.height();
    for (const Point2& s : seeds) {
        if (!cost.in_bounds_subpixel(s.x, s.y)) {
            throw std::invalid_argument("geodesic_nearest_seeds: seed out of bounds");
        }
    }

    const int num_seeds = static_cast<int>(seeds.size());
    const int num_steps = eight_connectivity ? 8 : 4;
    const std::size_t pixels = static_cast<std::size_t>(w) * h;

    SeedNeighborhood out;
    out.width = w;
    out.height = h;
    out.k = std::min(k, num_seeds);
    out.label.assign(pixels, -1);
    out.nearest_distance.assign(pixels, kInf);

    // Multi-source Dijkstra for the geodesic label map. Ties on distance
    // resolve to the lowest seed id; an equal-distance lower label is
    // re-pushed so the lexicographic (distance, label) fixpoint is exact.
    using Entry = std::pair<double, std::pair<int, int>>;  // (dist, (label, pixel))
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

    // Seeds sharing a pixel after rounding: the lowest id claims it.
    for (int s = 0; s < num_seeds; ++s) {
        const int px = clamp_pixel(seeds[s].x, w);
        const int py = clamp_pixel(seeds[s].y, h);
        const std::size_t i = static_cast<std::size_t>(py) * w + px;
        if (out.label[i] == -1) {
            out.nearest_distance[i] = 0.0;
            out.label[i] = s;
        }
    }
    for (std::size_t i = 0; i < pixels; ++i) {
        if (out.label[i] != -1) {
            queue.push({0.0, {out.label[i], static_cast<int>(i)}});
        }
    }

    const float* c = cost.data();
    while (!queue.empty()) {
        const auto [dist, rest] = queue.top();
        queue.pop();
        const auto [lab, pix] = rest;
        if (dist != out.nearest_distance[pix] || lab != out.label[pix]) continue;
        const int px = pix % w;
        const int py = pix / w;
        const double cost_p = c[pix];
        for (int t = 0; t < num_steps; ++t) {
            const int qx = px + kSteps[t].dx;
            const int qy = py + kSteps[t].dy;
            if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
            const std::size_t q = static_cast<std::size_t>(qy) * w + qx;
            const double edge =
                kSteps[t].base * (1.0 + lambda * 0.5 * (cost_p + c[q]));
            const double nd = dist + edge;
            if (nd < out.nearest_distance[q] ||
                (nd == out.nearest_distance[q] && lab < out.label[q])) {
                out.nearest_distance[q] = nd;
                out.label[q] = lab;
                queue.push({nd, {lab, static_cast<int>(q)}});
            }
        }
    }

    // Seed adjacency graph induced by the label map: neighboring pixels
    // with different labels connect their seeds at the cheapest observed
    // crossing D(p) + w(p,q) + D(q).
    std::unordered_map<std::uint64_t, double> edge_min;
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const std::size_t p = static_cast<std::size_t>(py) * w + px;
            for (int t = 0; t < num_steps; ++t) {
                // Forward steps only, each pair visited once.
                if (kSteps[t].dx < 0 || (kSteps[t].dx == 0 && kSteps[t].dy < 0)) continue;
                const int qx = px + kSteps[t].dx;
                const int qy = py + kSteps[t].dy;
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                const std::size_t q = static_cast<std::size_t>(qy) * w + qx;
                const int la = out.label[p];
                const int lb = out.label[q];
                if (la == lb) continue;
                const double edge =
                    kSteps[t].base * (1.0 + lambda * 0.5 * (c[p] + c[q]));
                const double through = out.nearest_distance[p] + edge +
                                       out.nearest_distance[q];
                const std::uint64_t key =
                    la < lb ? (static_cast<std::uint64_t>(la) << 32) | static_cast<std::uint32_t>(lb)
                            : (static_cast<std::uint64_t>(lb) << 32) | static_cast<std::uint32_t>(la);
                auto [it, inserted] = edge_min.try_emplace(key, through);
                if (!inserted && through < it->second) it->second = through;
            }
        }
    }

    std::vector<std::vector<std::pair<int, double>>> adjacency(num_seeds);
    for (const auto& [key, weight] : edge_min) {
        const int a = static_cast<int>(key >> 32);
        const int b = static_cast<int>(key & 0xffffffffu);
        adjacency[a].push_back({b, weight});
        adjacency[b].push_back({a, weight});
    }

    // k nearest seeds of every seed by Dijkstra over the seed graph,
    // stopped after k settles. Seeds are independent; run them in parallel.
    out.seed_neighbors.assign(num_seeds, {});
#pragma omp parallel
    {
        std::vector<double> dist(num_seeds);
        std::vector<std::uint8_t> done(num_seeds);
        using SeedEntry = std::pair<double, int>;
        std::priority_queue<SeedEntry, std::vector<SeedEntry>, std::greater<>> pq;
#pragma omp for schedule(dynamic, 32)
        for (int s = 0; s < num_seeds; ++s) {
            std::fill(dist.begin(), dist.end(), kInf);
            std::fill(done.begin(), done.end(), 0);
            while (!pq.empty()) pq.pop();

            auto& list = out.seed_neighbors[s];
            list.reserve(out.k);
            dist[s] = 0.0;
            pq.push({0.0, s});
            while (!pq.empty() && static_cast<int>(list.size()) < out.k) {
                const auto [d, v] = pq.top();
                pq.pop();
                if (done[v] || d != dist[v]) continue;
                done[v] = 1;
                list.push_back({v, d});
                for (const auto& [to, weight] : adjacency[v]) {
                    if (done[to]) continue;
                    const double nd = d + weight;
                    if (nd < dist[to]) {
                        dist[to] = nd;
                        pq.push({nd, to});
                    }
                }
            }
        }
    }
    return out;
}

AffineModel fit_local_affine(std::span<const SeedRecord> neighbors, double sigma) {
    if (neighbors.empty()) {
        throw std::invalid_argument("fit_local_affine: no neighbors");
    }

    const std::size_t n = neighbors.size();
    std::vector<double> weight(n);
    double wsum = 0.0, mean_u = 0.0, mean_v = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SeedRecord& r = neighbors[i];
        const double w = std::exp(-r.distance / sigma);
        weight[i] = w;
        wsum += w;
        mean_u += w * r.u;
        mean_v += w * r.v;
        cx += w * r.position.x;
        cy += w * r.position.y;
    }
    mean_u /= wsum;
    mean_v /= wsum;
    cx /= wsum;
    cy /= wsum;

    AffineModel constant;
    constant.au[2] = mean_u;
    constant.av[2] = mean_v;
    constant.constant_fallback = true;
    if (n < 3) return constant;

    // Center and scale positions so the conditioning test is independent
    // of where in the image the neighborhood sits.
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = neighbors[i].position.x - cx;
        const double ey = neighbors[i].position.y - cy;
        spread += weight[i] * (ex * ex + ey * ey);
    }
    spread = std::sqrt(spread / wsum);
    if (!(spread > 0.0)) return constant;  // all neighbors at one position
    const double inv_s = 1.0 / spread;

    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs_u = Eigen::Vector3d::Zero();
    Eigen::Vector3d rhs_v = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weight[i];
        const Eigen::Vector3d row((neighbors[i].position.x - cx) * inv_s,
                                  (neighbors[i].position.y - cy) * inv_s, 1.0);
        normal.noalias() += w * row * row.transpose();
        rhs_u.noalias() += w * neighbors[i].u * row;
        rhs_v.noalias() += w * neighbors[i].v * row;
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(2);
    if (!(lo > 0.0) || hi / lo > kConditionLimit) return constant;

    const Eigen::Vector3d tu = eig.eigenvectors() *
                               (eig.eigenvectors().transpose() * rhs_u).cwiseQuotient(
                                   eig.eigenvalues());
    const Eigen::Vector3d tv = eig.eigenvectors() *
                               (eig.eigenvectors().transpose() * rhs_v).cwiseQuotient(
                                   eig.eigenvalues());

    AffineModel model;
    model.au[0] = tu[0] * inv_s;
    model.au[1] = tu[1] * inv_s;
    model.au[2] = tu[2] - model.au[0] * cx - model.au[1] * cy;
    model.av[0] = tv[0] * inv_s;
    model.av[1] = tv[1] * inv_s;
    model.av[2] = tv[2] - model.av[0] * cx - model.av[1] * cy;
    return model;
}

FlowField interpolate(const SparseFlow& sparse, const GrayImage& image,
                      const InterpParams& params) {
    std::vector<Point2> positions;
    std::vector<Point2> flows;
    positions.reserve(sparse.records.size());
    flows.reserve(sparse.records.size());
    for (const FlowRecord& rec : sparse.records) {
        if (rec.status != TrackStatus::valid) continue;
        positions.push_back(rec.origin);
        flows.push_back({rec.du, rec.dv});
    }
    if (positions.empty()) {
        throw std::invalid_argument("interpolate: no valid sparse records");
    }

    const EdgeCostMap cost = edge_cost_map(image);
    const SeedNeighborhood hood = geodesic_nearest_seeds(
        cost, positions, params.k, params.lambda, params.eight_connectivity);

    // One affine fit per seed. Pixels sharing a nearest seed share its
    // neighbor set, and their common weight factor exp(-D(p)/sigma)
    // cancels out of the weighted least squares, so the per-seed model is
    // exact for every pixel it serves.
    const int num_seeds = static_cast<int>(positions.size());
    std::vector<AffineModel> models(num_seeds);
#pragma omp parallel
    {
        std::vector<SeedRecord> records;
#pragma omp for schedule(dynamic, 32)
        for (int s = 0; s < num_seeds; ++s) {
            const auto& list = hood.seed_neighbors[s];
            records.clear();
            records.reserve(list.size());
            for (const auto& nb : list) {
                records.push_back({positions[nb.seed], flows[nb.seed].x,
                                   flows[nb.seed].y, nb.distance});
            }
            models[s] = fit_local_affine(records, params.sigma);
        }
    }

    const int w = image.width();
    const int h = image.height();
    FlowField out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = out.index(x, y);
            const AffineModel& m = models[hood.label[i]];
            const Point2 flow = m.evaluate(x, y);
            out.u[i] = static_cast<float>(flow.x);
            out.v[i] = static_cast<float>(flow.y);
            out.valid[i] = 1;
        }
    }
    return out;
}

}  // namespace degraf
