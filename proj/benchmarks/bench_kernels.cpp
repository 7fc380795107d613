// Kernel benchmark: serial reference implementations vs the OpenMP-parallel
// production kernels, plus the naive-vs-integral-image detector comparison.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "degraf/detector.hpp"
#include "degraf/gradient.hpp"
#include "degraf/interp.hpp"
#include "degraf/pipeline.hpp"
#include "degraf/reference.hpp"
#include "degraf/tracker.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace degraf;

namespace {

// Multi-octave texture, duplicated from the test utilities so the
// benchmark target stays free of test headers.
GrayImage textured(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
    for (int period : {32, 16, 8, 4, 2}) {
        const int gw = w / period + 2;
        const int gh = h / period + 2;
        std::vector<float> grid(static_cast<std::size_t>(gw) * gh);
        for (float& g : grid) g = dist(rng);
        const double amp = std::sqrt(static_cast<double>(period));
        for (int y = 0; y < h; ++y) {
            const double gy = static_cast<double>(y) / period;
            const int y0 = static_cast<int>(gy);
            const double fy = gy - y0;
            for (int x = 0; x < w; ++x) {
                const double gx = static_cast<double>(x) / period;
                const int x0 = static_cast<int>(gx);
                const double fx = gx - x0;
                const float* g0 = grid.data() + static_cast<std::size_t>(y0) * gw + x0;
                const float* g1 = g0 + gw;
                const double top = g0[0] + fx * (g0[1] - g0[0]);
                const double bot = g1[0] + fx * (g1[1] - g1[0]);
                acc[static_cast<std::size_t>(y) * w + x] += amp * (top + fy * (bot - top));
            }
        }
    }
    double mn = acc[0], mx = acc[0];
    for (double v : acc) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    GrayImage img(w, h);
    for (std::size_t i = 0; i < acc.size(); ++i) {
        img.data()[i] = static_cast<float>(10.0 + 235.0 * (acc[i] - mn) / (mx - mn));
    }
    return img;
}

GrayImage translated(const GrayImage& in, double dx, double dy) {
    GrayImage out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y) {
        for (int x = 0; x < in.width(); ++x) {
            const double sx = std::clamp(x - dx, 0.0, in.width() - 1.0);
            const double sy = std::clamp(y - dy, 0.0, in.height() - 1.0);
            out.at(x, y) = in.bilinear(sx, sy);
        }
    }
    return out;
}

template <typename F>
double best_of(int repeats, F&& fn) {
    fn();  // warm-up, untimed
    double best = 1e30;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        best = std::min(best, s);
    }
    return best;
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

void report(const char* kernel, const char* serial_desc, double serial_s,
            const char* parallel_desc, double parallel_s) {
    std::printf("%-14s %-26s %9.2f ms   %-22s %9.2f ms   speedup %5.2fx\n", kernel,
                serial_desc, serial_s * 1e3, parallel_desc, parallel_s * 1e3,
                serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
    int width = 1242, height = 375, repeats = 3, threads = 0;
    CLI::App app{"degraf kernel benchmarks: serial reference vs parallel"};
    app.add_option("--width", width, "Frame width");
    app.add_option("--height", height, "Frame height");
    app.add_option("--repeat", repeats, "Repetitions (best-of)");
    app.add_option("--threads", threads, "Parallel thread count (0 = default)");
    CLI11_PARSE(app, argc, argv);

    int max_threads = 1;
#ifdef _OPENMP
    max_threads = threads > 0 ? threads : omp_get_max_threads();
#endif
    std::printf("frame %dx%d, best of %d, %d thread(s) for parallel kernels\n\n", width,
                height, repeats, max_threads);

    const GrayImage frame1 = textured(width, height, 1);
    const GrayImage frame2 = translated(frame1, 3.0, -2.0);
    const DetectorParams det{3, 3, 9};

    // Detection: naive double loops vs integral-image windows. At the
    // default step 9 the windows touch ~11% of pixels and the naive loop
    // is competitive; at step 1 the integral tables carry the day.
    const DetectorParams dense{3, 3, 1};
    set_threads(1);
    const double det_naive = best_of(repeats, [&] { reference::detect_grid(frame1, det); });
    const double det_fast1 = best_of(repeats, [&] { detect_grid(frame1, det); });
    const double det_naive_d =
        best_of(repeats, [&] { reference::detect_grid(frame1, dense); });
    const double det_fast1_d = best_of(repeats, [&] { detect_grid(frame1, dense); });
    set_threads(max_threads);
    const double det_fastN = best_of(repeats, [&] { detect_grid(frame1, det); });
    const double det_fastN_d = best_of(repeats, [&] { detect_grid(frame1, dense); });
    report("detect s9", "naive serial", det_naive, "integral serial", det_fast1);
    report("detect s9", "integral serial", det_fast1, "integral parallel", det_fastN);
    report("detect s1", "naive serial", det_naive_d, "integral serial", det_fast1_d);
    report("detect s1", "integral serial", det_fast1_d, "integral parallel", det_fastN_d);

    // Gradients.
    set_threads(1);
    const double grad1 = best_of(repeats, [&] { gradient(frame1); });
    set_threads(max_threads);
    const double gradN = best_of(repeats, [&] { gradient(frame1); });
    report("gradient", "serial", grad1, "parallel", gradN);

    // Tracking.
    const KeypointGrid grid = detect_grid(frame1, det);
    const TrackParams track;
    const double track1 = best_of(repeats, [&] {
        reference::track_points_serial(frame1, frame2, grid.points, track);
    });
    set_threads(max_threads);
    const double trackN =
        best_of(repeats, [&] { track_points(frame1, frame2, grid.points, track); });
    report("track", "serial driver", track1, "parallel driver", trackN);

    // Interpolation.
    const SparseFlow sparse = track_points(frame1, frame2, grid.points, track);
    const InterpParams interp;
    set_threads(1);
    const double interp1 = best_of(repeats, [&] { interpolate(sparse, frame1, interp); });
    set_threads(max_threads);
    const double interpN = best_of(repeats, [&] { interpolate(sparse, frame1, interp); });
    report("interpolate", "serial", interp1, "parallel", interpN);

    // Full pipeline at both thread counts.
    PipelineConfig config;
    config.threads = 1;
    const double pipe1 =
        best_of(repeats, [&] { run_pipeline(frame1, frame2, config); });
    config.threads = max_threads;
    const double pipeN =
        best_of(repeats, [&] { run_pipeline(frame1, frame2, config); });
    report("pipeline", "1 thread", pipe1, "all threads", pipeN);

    return 0;
}
