#include "degraf/tracker.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "degraf/gradient.hpp"
#include "degraf/pyramid.hpp"

namespace degraf {

const char* to_string(TrackStatus status) {
    switch (status) {
        case TrackStatus::valid: return "valid";
        case TrackStatus::lost_texture: return "lost_texture";
        case TrackStatus::diverged: return "diverged";
        case TrackStatus::out_of_bounds: return "out_of_bounds";
        case TrackStatus::fb_failed: return "fb_failed";
    }
    return "unknown";
}

bool track_status_from_string(const std::string& token, TrackStatus& out) {
    if (token == "valid") out = TrackStatus::valid;
    else if (token == "lost_texture") out = TrackStatus::lost_texture;
    else if (token == "diverged") out = TrackStatus::diverged;
    else if (token == "out_of_bounds") out = TrackStatus::out_of_bounds;
    else if (token == "fb_failed") out = TrackStatus::fb_failed;
    else return false;
    return true;
}

std::size_t SparseFlow::count(TrackStatus status) const {
    std::size_t n = 0;
    for (const FlowRecord& r : records) {
        if (r.status == status) ++n;
    }
    return n;
}

namespace {

void validate_params(const TrackParams& p) {
    if (p.window_radius < 2) throw std::invalid_argument("tracker: window_radius must be >= 2");
    if (p.pyramid_levels < 1) throw std::invalid_argument("tracker: pyramid_levels must be >= 1");
    if (p.max_iterations < 1) throw std::invalid_argument("tracker: max_iterations must be >= 1");
    if (!(p.convergence_eps > 0.0)) throw std::invalid_argument("tracker: convergence_eps must be > 0");
    if (p.min_eigenvalue < 0.0) throw std::invalid_argument("tracker: min_eigenvalue must be >= 0");
    if (!(p.pyramid_scale > 0.0 && p.pyramid_scale < 1.0)) {
        throw std::invalid_argument("tracker: pyramid_scale must lie in (0, 1)");
    }
}

// Largest level count (capped at requested) whose coarsest level stays >= 4x4.
int feasible_levels(int width, int height, double scale, int requested) {
    int levels = 1;
    double w = width, h = height;
    while (levels < requested) {
        w = std::floor(w * scale);
        h = std::floor(h * scale);
        if (w < 4 || h < 4) break;
        ++levels;
    }
    return levels;
}

// Template frame with per-level gradients, target frame as intensities only.
struct TrackContext {
    Pyramid tmpl;
    Pyramid target;
    std::vector<FloatImage> gx;
    std::vector<FloatImage> gy;
    TrackParams params;
};

TrackContext make_context(const GrayImage& tmpl_frame, const GrayImage& target_frame,
                          const TrackParams& params) {
    TrackContext ctx;
    ctx.params = params;
    const int levels = feasible_levels(tmpl_frame.width(), tmpl_frame.height(),
                                       params.pyramid_scale, params.pyramid_levels);
    ctx.tmpl = build_pyramid(tmpl_frame, levels, params.pyramid_scale);
    ctx.target = build_pyramid(target_frame, levels, params.pyramid_scale);
    ctx.gx.reserve(levels);
    ctx.gy.reserve(levels);
    for (int level = 0; level < levels; ++level) {
        auto [gx, gy] = gradient(ctx.tmpl.levels[level]);
        ctx.gx.push_back(std::move(gx));
        ctx.gy.push_back(std::move(gy));
    }
    return ctx;
}

struct PointScratch {
    std::vector<float> ti, tgx, tgy, ji;
    std::vector<std::uint8_t> tvalid, jvalid;
    std::vector<double> weight;

    explicit PointScratch(int window_pixels)
        : ti(window_pixels), tgx(window_pixels), tgy(window_pixels), ji(window_pixels),
          tvalid(window_pixels), jvalid(window_pixels), weight(window_pixels) {}
};

inline double huber_weight(double residual, double delta) {
    const double a = std::abs(residual);
    return a <= delta ? 1.0 : delta / a;
}

FlowRecord track_single(const TrackContext& ctx, const Point2& origin,
                        PointScratch& scratch) {
    const TrackParams& p = ctx.params;
    const int r = p.window_radius;
    const int side = 2 * r + 1;
    const int wpix = side * side;
    const int top = ctx.tmpl.num_levels() - 1;

    FlowRecord rec;
    rec.origin = origin;

    if (!ctx.tmpl.levels[0].in_bounds_subpixel(origin.x, origin.y)) {
        rec.status = TrackStatus::out_of_bounds;
        return rec;
    }

    double dx = 0.0, dy = 0.0;  // displacement in current-level pixels
    for (int level = top; level >= 0; --level) {
        if (level != top) {
            dx /= p.pyramid_scale;
            dy /= p.pyramid_scale;
        }
        const GrayImage& I = ctx.tmpl.levels[level];
        const GrayImage& J = ctx.target.levels[level];
        const FloatImage& GX = ctx.gx[level];
        const FloatImage& GY = ctx.gy[level];
        const Point2 c = to_level(origin, ctx.tmpl.scale, level);

        // Sample the template window; pixels off the raster are excluded
        // from all sums (clipped window).
        int tcount = 0;
        int idx = 0;
        for (int oy = -r; oy <= r; ++oy) {
            const double sy = c.y + oy;
            for (int ox = -r; ox <= r; ++ox, ++idx) {
                const double sx = c.x + ox;
                if (I.in_bounds_subpixel(sx, sy)) {
                    scratch.tvalid[idx] = 1;
                    scratch.ti[idx] = I.bilinear(sx, sy);
                    scratch.tgx[idx] = GX.bilinear(sx, sy);
                    scratch.tgy[idx] = GY.bilinear(sx, sy);
                    ++tcount;
                } else {
                    scratch.tvalid[idx] = 0;
                }
            }
        }
        if (tcount * 2 < wpix) {
            if (level == 0) {
                rec.du = dx;
                rec.dv = dy;
                rec.status = TrackStatus::out_of_bounds;
                return rec;
            }
            continue;  // too little support here, carry the estimate down
        }

        // Texture gate: minimum eigenvalue of the gradient structure
        // tensor, normalized by the number of contributing pixels.
        double gxx = 0.0, gxy = 0.0, gyy = 0.0;
        for (int i = 0; i < wpix; ++i) {
            if (!scratch.tvalid[i]) continue;
            const double gx = scratch.tgx[i];
            const double gy = scratch.tgy[i];
            gxx += gx * gx;
            gxy += gx * gy;
            gyy += gy * gy;
        }
        const double half_trace = 0.5 * (gxx + gyy);
        const double det = gxx * gyy - gxy * gxy;
        const double disc = std::sqrt(std::max(0.0, half_trace * half_trace - det));
        const double min_eig = (half_trace - disc) / tcount;
        if (min_eig < p.min_eigenvalue || det <= 0.0) {
            if (level == 0) {
                rec.du = dx;
                rec.dv = dy;
                rec.status = TrackStatus::lost_texture;
                return rec;
            }
            continue;
        }

        double alpha = 1.0, beta = 0.0;
        for (int iter = 0; iter < p.max_iterations; ++iter) {
            // Sample the target window at the current displacement.
            int pcount = 0;
            idx = 0;
            for (int oy = -r; oy <= r; ++oy) {
                const double sy = c.y + dy + oy;
                for (int ox = -r; ox <= r; ++ox, ++idx) {
                    if (!scratch.tvalid[idx]) {
                        scratch.jvalid[idx] = 0;
                        continue;
                    }
                    const double sx = c.x + dx + ox;
                    if (J.in_bounds_subpixel(sx, sy)) {
                        scratch.jvalid[idx] = 1;
                        scratch.ji[idx] = J.bilinear(sx, sy);
                        ++pcount;
                    } else {
                        scratch.jvalid[idx] = 0;
                    }
                }
            }
            if (pcount * 2 < wpix) {
                if (level == 0) {
                    rec.du = dx;
                    rec.dv = dy;
                    rec.status = TrackStatus::out_of_bounds;
                    return rec;
                }
                break;
            }

            for (int i = 0; i < wpix; ++i) {
                if (!scratch.jvalid[i]) continue;
                const double resid = scratch.ji[i] - (alpha * scratch.ti[i] + beta);
                scratch.weight[i] = p.robust_norm ? huber_weight(resid, p.huber_delta) : 1.0;
            }

            double step_x = 0.0, step_y = 0.0;
            bool solved = false;
            if (p.illumination_model) {
                // Gauss-Newton over (dx, dy, alpha, beta) with template
                // gradients standing in for the warped target gradients.
                Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
                Eigen::Vector4d b = Eigen::Vector4d::Zero();
                for (int i = 0; i < wpix; ++i) {
                    if (!scratch.jvalid[i]) continue;
                    const double w = scratch.weight[i];
                    const Eigen::Vector4d a(scratch.tgx[i], scratch.tgy[i],
                                            -static_cast<double>(scratch.ti[i]), -1.0);
                    A.noalias() += w * a * a.transpose();
                    b.noalias() -= w * static_cast<double>(scratch.ji[i]) * a;
                }
                const Eigen::Vector4d u = A.ldlt().solve(b);
                if (u.allFinite()) {
                    step_x = u[0];
                    step_y = u[1];
                    alpha = u[2];
                    beta = u[3];
                    solved = true;
                }
            }
            if (!solved) {
                double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
                for (int i = 0; i < wpix; ++i) {
                    if (!scratch.jvalid[i]) continue;
                    const double w = scratch.weight[i];
                    const double gx = scratch.tgx[i];
                    const double gy = scratch.tgy[i];
                    const double di = scratch.ji[i] - (alpha * scratch.ti[i] + beta);
                    a11 += w * gx * gx;
                    a12 += w * gx * gy;
                    a22 += w * gy * gy;
                    b1 -= w * di * gx;
                    b2 -= w * di * gy;
                }
                const double d = a11 * a22 - a12 * a12;
                if (d <= 0.0) {
                    if (level == 0) {
                        rec.du = dx;
                        rec.dv = dy;
                        rec.status = TrackStatus::lost_texture;
                        return rec;
                    }
                    break;
                }
                step_x = (a22 * b1 - a12 * b2) / d;
                step_y = (a11 * b2 - a12 * b1) / d;
            }

            dx += step_x;
            dy += step_y;
            const double step_norm = std::sqrt(step_x * step_x + step_y * step_y);
            if (step_norm > r) {
                // A step beyond the integration window means the
                // linearization left its support.
                rec.du = dx;
                rec.dv = dy;
                rec.status = TrackStatus::diverged;
                return rec;
            }
            if (step_norm < p.convergence_eps) break;
        }
    }

    rec.du = dx;
    rec.dv = dy;
    const Point2 end = rec.endpoint();
    rec.status = ctx.target.levels[0].in_bounds_subpixel(end.x, end.y)
                     ? TrackStatus::valid
                     : TrackStatus::out_of_bounds;
    return rec;
}

}  // namespace

SparseFlow track_points(const GrayImage& frame1, const GrayImage& frame2,
                        std::span<const Point2> points, const TrackParams& params) {
    validate_params(params);
    if (!frame1.same_size(frame2)) {
        throw std::invalid_argument("track_points: frame dimensions differ");
    }

    const TrackContext ctx = make_context(frame1, frame2, params);
    const int side = 2 * params.window_radius + 1;

    SparseFlow out;
    out.records.resize(points.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
    {
        PointScratch scratch(side * side);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out.records[i] = track_single(ctx, points[i], scratch);
        }
    }
    return out;
}

SparseFlow forward_backward_filter(const SparseFlow& forward, const GrayImage& frame1,
                                   const GrayImage& frame2, const TrackParams& params) {
    validate_params(params);
    if (!frame1.same_size(frame2)) {
        throw std::invalid_argument("forward_backward_filter: frame dimensions differ");
    }

    const TrackContext back_ctx = make_context(frame2, frame1, params);
    const int side = 2 * params.window_radius + 1;

    SparseFlow out = forward;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.records.size());
#pragma omp parallel
    {
        PointScratch scratch(side * side);
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            FlowRecord& rec = out.records[i];
            if (rec.status != TrackStatus::valid) continue;
            const FlowRecord back = track_single(back_ctx, rec.endpoint(), scratch);
            if (back.status != TrackStatus::valid) {
                rec.status = TrackStatus::fb_failed;
                continue;
            }
            const Point2 round_trip = back.endpoint();
            const double ex = round_trip.x - rec.origin.x;
            const double ey = round_trip.y - rec.origin.y;
            if (std::sqrt(ex * ex + ey * ey) > params.fb_threshold) {
                rec.status = TrackStatus::fb_failed;
            }
        }
    }
    return out;
}

}  // namespace degraf
