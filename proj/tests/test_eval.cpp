#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <png.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>

#include "degraf/flow_io.hpp"
#include "degraf/image_io.hpp"
#include "degraf/metrics.hpp"
#include "testutil.hpp"

using namespace degraf;
using testutil::constant_flow;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

FlowField random_quantized_flow(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> q(-511 * 64, 511 * 64);
    std::uniform_int_distribution<int> coin(0, 3);
    FlowField f(w, h);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
        f.u[i] = static_cast<float>(q(rng)) / 64.0f;
        f.v[i] = static_cast<float>(q(rng)) / 64.0f;
        f.valid[i] = coin(rng) != 0 ? 1 : 0;
    }
    return f;
}

// Raw 16-bit sample triplet of one pixel, straight from libpng.
std::array<std::uint16_t, 3> read_raw_pixel(const std::string& path, int x, int y) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_read_info(png, info);
    REQUIRE(png_get_bit_depth(png, info) == 16);
    REQUIRE(png_get_color_type(png, info) == PNG_COLOR_TYPE_RGB);
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 6);
    for (int r = 0; r <= y && r < height; ++r) {
        png_read_row(png, row.data(), nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    // Network byte order in the file.
    auto sample = [&](int c) {
        const std::size_t o = static_cast<std::size_t>(x) * 6 + c * 2;
        return static_cast<std::uint16_t>((row[o] << 8) | row[o + 1]);
    };
    return {sample(0), sample(1), sample(2)};
}

}  // namespace

TEST_CASE("EPE is zero for identical fields") {
    const FlowField gt = constant_flow(8, 6, 2.0f, -1.0f);
    CHECK(end_point_error(gt, gt) == 0.0);
}

TEST_CASE("EPE of a uniform (3,4) offset is exactly 5") {
    const FlowField gt = constant_flow(10, 10, 1.0f, 1.0f);
    FlowField pred = gt;
    for (std::size_t i = 0; i < pred.u.size(); ++i) {
        pred.u[i] += 3.0f;
        pred.v[i] += 4.0f;
    }
    CHECK(end_point_error(pred, gt) == 5.0);
}

TEST_CASE("EPE matches the double-loop oracle on random fields") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> dist(-10.0f, 10.0f);
    std::uniform_int_distribution<int> coin(0, 1);
    FlowField pred(9, 7), gt(9, 7);
    for (std::size_t i = 0; i < gt.u.size(); ++i) {
        pred.u[i] = dist(rng);
        pred.v[i] = dist(rng);
        pred.valid[i] = 1;
        gt.u[i] = dist(rng);
        gt.v[i] = dist(rng);
        gt.valid[i] = coin(rng);
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 9; ++x) {
            const std::size_t i = gt.index(x, y);
            if (!gt.valid[i]) continue;
            const double du = static_cast<double>(pred.u[i]) - gt.u[i];
            const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
            acc += std::sqrt(du * du + dv * dv);
            ++n;
        }
    }
    REQUIRE(n > 0);
    CHECK(end_point_error(pred, gt) == doctest::Approx(acc / n).epsilon(1e-9));
}

TEST_CASE("outlier rate: uniform and boundary behavior") {
    const FlowField gt = constant_flow(10, 10, 0.0f, 0.0f);

    FlowField pred = constant_flow(10, 10, 5.0f, 0.0f);
    CHECK(outlier_rate(pred, gt) == 1.0);

    CHECK(outlier_rate(gt, gt) == 0.0);

    // Exactly 3.0 px error is not an outlier under the strict comparison.
    pred = constant_flow(10, 10, 3.0f, 0.0f);
    CHECK(outlier_rate(pred, gt) == 0.0);
    pred = constant_flow(10, 10, 3.0f + 1e-4f, 0.0f);
    CHECK(outlier_rate(pred, gt) == 1.0);
}

TEST_CASE("outlier rate: constructed half-and-half field") {
    const FlowField gt = constant_flow(10, 10, 0.0f, 0.0f);
    FlowField pred = gt;
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 10; ++x) pred.u[pred.index(x, y)] = 4.0f;
    }
    CHECK(outlier_rate(pred, gt) == 0.5);
}

TEST_CASE("outlier rate is monotone nonincreasing in the threshold") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<float> dist(-8.0f, 8.0f);
    FlowField pred(12, 12), gt(12, 12);
    for (std::size_t i = 0; i < gt.u.size(); ++i) {
        pred.u[i] = dist(rng);
        pred.v[i] = dist(rng);
        pred.valid[i] = gt.valid[i] = 1;
        gt.u[i] = dist(rng);
        gt.v[i] = dist(rng);
    }
    double prev = 1.1;
    for (double t : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0}) {
        const double rate = outlier_rate(pred, gt, nullptr, t);
        CHECK(rate <= prev);
        prev = rate;
    }
}

TEST_CASE("metrics are local to the mask") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
    FlowField pred(8, 8), gt(8, 8);
    for (std::size_t i = 0; i < gt.u.size(); ++i) {
        pred.u[i] = dist(rng);
        pred.v[i] = dist(rng);
        pred.valid[i] = gt.valid[i] = 1;
        gt.u[i] = dist(rng);
        gt.v[i] = dist(rng);
    }
    OcclusionMask mask(8, 8, 0);
    for (int y = 2; y < 6; ++y) {
        for (int x = 2; x < 6; ++x) mask.pass[static_cast<std::size_t>(y) * 8 + x] = 1;
    }
    const double before = end_point_error(pred, gt, &mask);

    // Corrupting pixels outside the mask changes nothing.
    FlowField corrupted = pred;
    for (int x = 0; x < 8; ++x) corrupted.u[x] = 500.0f / 64.0f;
    CHECK(end_point_error(corrupted, gt, &mask) == before);
}

TEST_CASE("empty evaluation sets are errors, absent in aggregate metrics") {
    const FlowField pred = constant_flow(6, 6, 0.0f, 0.0f);
    FlowField gt = pred;
    std::fill(gt.valid.begin(), gt.valid.end(), std::uint8_t{0});
    CHECK_THROWS_AS(end_point_error(pred, gt), std::invalid_argument);
    CHECK_THROWS_AS(outlier_rate(pred, gt), std::invalid_argument);

    const FlowMetrics metrics = compute_metrics(pred, gt);
    CHECK(!metrics.epe_all.has_value());
    CHECK(!metrics.epe_noc.has_value());
    CHECK(metrics.evaluated_pixel_count == 0);
    CHECK(metrics.density == 1.0);
}

TEST_CASE("compute_metrics separates noc and all ground truths") {
    const FlowField pred = constant_flow(6, 6, 1.0f, 0.0f);
    FlowField gt_noc = constant_flow(6, 6, 1.0f, 0.0f);
    FlowField gt_occ = constant_flow(6, 6, 1.0f, 0.0f);
    // Occluded column: present only in the all-pixels truth, with error 5.
    for (int y = 0; y < 6; ++y) {
        gt_noc.valid[gt_noc.index(5, y)] = 0;
        gt_occ.u[gt_occ.index(5, y)] = -4.0f;
        gt_occ.v[gt_occ.index(5, y)] = 0.0f;
    }
    const FlowMetrics m = compute_metrics(pred, gt_noc, &gt_occ);
    REQUIRE(m.epe_noc.has_value());
    REQUIRE(m.epe_all.has_value());
    CHECK(*m.epe_noc == 0.0);
    CHECK(*m.epe_all == doctest::Approx(5.0 * 6 / 36.0));
    CHECK(*m.out_noc == 0.0);
    CHECK(*m.out_all == doctest::Approx(6 / 36.0));
    CHECK(m.evaluated_pixel_count == 36);
}

TEST_CASE("dimension mismatches are rejected") {
    const FlowField a = constant_flow(6, 6, 0.0f, 0.0f);
    const FlowField b = constant_flow(6, 5, 0.0f, 0.0f);
    CHECK_THROWS_AS(end_point_error(a, b), std::invalid_argument);
}

TEST_CASE("KITTI flow encoding: zero point and worked example") {
    const std::string path = temp_path("degraf_eval_flow1.png");

    FlowField f(3, 2);
    f.set(0, 0, 0.0f, 0.0f);
    f.set(1, 0, 1.0f, -0.5f);
    f.set(2, 0, 10.25f, 100.0f);
    write_flow_kitti(f, path);

    const FlowField back = read_flow_kitti(path);
    CHECK(back.u[0] == 0.0f);
    CHECK(back.v[0] == 0.0f);
    CHECK(back.valid[0] == 1);
    CHECK(back.u[1] == 1.0f);
    CHECK(back.v[1] == -0.5f);
    CHECK(back.valid[3] == 0);  // never set

    // Wire format: u = 1.0 -> 64 + 2^15 = 32832, v = -0.5 -> 32736.
    const auto px = read_raw_pixel(path, 1, 0);
    CHECK(px[0] == 32832);
    CHECK(px[1] == 32736);
    CHECK(px[2] == 1);
    const auto origin = read_raw_pixel(path, 0, 0);
    CHECK(origin[0] == 32768);
    CHECK(origin[1] == 32768);
    std::remove(path.c_str());
}

TEST_CASE("KITTI flow write-read round trip is exact on quantized fields") {
    const std::string path = temp_path("degraf_eval_flow2.png");
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        const FlowField f = random_quantized_flow(13, 9, seed);
        write_flow_kitti(f, path);
        const FlowField back = read_flow_kitti(path);
        REQUIRE(back.width == f.width);
        REQUIRE(back.height == f.height);
        for (std::size_t i = 0; i < f.u.size(); ++i) {
            CHECK(back.valid[i] == f.valid[i]);
            if (!f.valid[i]) continue;
            CHECK(back.u[i] == f.u[i]);
            CHECK(back.v[i] == f.v[i]);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("KITTI flow write rejects unencodable values") {
    const std::string path = temp_path("degraf_eval_flow3.png");
    FlowField f(2, 2);
    f.set(0, 0, 600.0f, 0.0f);  // 600 * 64 + 2^15 > 65535
    CHECK_THROWS_AS(write_flow_kitti(f, path), std::runtime_error);
}

TEST_CASE("KITTI flow read rejects non-flow PNGs") {
    const std::string path = temp_path("degraf_eval_gray.png");
    // An 8-bit grayscale PNG is not a flow file.
    GrayImage img(4, 4, 100.0f);
    write_gray_png(img, path);
    CHECK_THROWS_AS(read_flow_kitti(path), std::runtime_error);
    CHECK_THROWS_AS(read_flow_kitti("/nonexistent/flow.png"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("flow color wheel conventions") {
    FlowField f(4, 1);
    f.set(0, 0, 0.0f, 0.0f);
    f.set(1, 0, 8.0f, 0.0f);   // max magnitude, hue 0
    f.set(2, 0, -8.0f, 0.0f);  // opposite hue
    // pixel 3 stays invalid
    const RgbImage img = flow_to_color(f, 8.0);

    const std::uint8_t* zero = img.pixel(0, 0);
    CHECK(zero[0] == 255);
    CHECK(zero[1] == 255);
    CHECK(zero[2] == 255);

    const std::uint8_t* right = img.pixel(1, 0);
    CHECK(right[0] == 255);
    CHECK(right[1] == 0);
    CHECK(right[2] == 0);

    const std::uint8_t* left = img.pixel(2, 0);
    CHECK(left[0] == 0);
    CHECK(left[1] == 255);
    CHECK(left[2] == 255);

    const std::uint8_t* invalid = img.pixel(3, 0);
    CHECK(invalid[0] == 0);
    CHECK(invalid[1] == 0);
    CHECK(invalid[2] == 0);
}
