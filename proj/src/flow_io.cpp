#include "degraf/flow_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace degraf {

namespace {

constexpr double kFlowScale = 64.0;
constexpr double kFlowOffset = 32768.0;  // 2^15

struct FileHandle {
    FILE* fp = nullptr;
    explicit FileHandle(const std::string& path, const char* mode)
        : fp(std::fopen(path.c_str(), mode)) {}
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::uint16_t encode_component(double value, bool clamp, const std::string& path) {
    const double enc = std::round(value * kFlowScale + kFlowOffset);
    if (enc < 0.0 || enc > 65535.0) {
        if (!clamp) fail(path, "flow value overflows the 16-bit encoding");
        return static_cast<std::uint16_t>(kFlowOffset);
    }
    return static_cast<std::uint16_t>(enc);
}

}  // namespace

FlowField read_flow_kitti(const std::string& path) {
    FileHandle file(path, "rb");
    if (!file.fp) fail(path, "cannot open file");

    png_byte header[8];
    if (std::fread(header, 1, 8, file.fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        fail(path, "not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng initialization failed");
    }

    std::vector<std::uint16_t> samples;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "PNG decode error");
    }

    png_init_io(png, file.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "expected a 16-bit 3-channel flow PNG");
    }
    png_set_swap(png);  // file samples are big-endian
    png_read_update_info(png, info);

    samples.resize(static_cast<std::size_t>(width) * height * 3);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(samples.data() +
                                              static_cast<std::size_t>(y) * width * 3);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    FlowField out(static_cast<int>(width), static_cast<int>(height));
    for (std::size_t i = 0; i < static_cast<std::size_t>(width) * height; ++i) {
        const std::uint16_t ue = samples[i * 3];
        const std::uint16_t ve = samples[i * 3 + 1];
        const std::uint16_t valid = samples[i * 3 + 2];
        out.u[i] = static_cast<float>((ue - kFlowOffset) / kFlowScale);
        out.v[i] = static_cast<float>((ve - kFlowOffset) / kFlowScale);
        out.valid[i] = valid != 0 ? 1 : 0;
    }
    return out;
}

void write_flow_kitti(const FlowField& field, const std::string& path) {
    const std::size_t pixels = static_cast<std::size_t>(field.width) * field.height;
    std::vector<std::uint16_t> samples(pixels * 3);
    for (std::size_t i = 0; i < pixels; ++i) {
        const bool valid = field.valid[i] != 0;
        samples[i * 3] = encode_component(field.u[i], !valid, path);
        samples[i * 3 + 1] = encode_component(field.v[i], !valid, path);
        samples[i * 3 + 2] = valid ? 1 : 0;
    }

    FileHandle file(path, "wb");
    if (!file.fp) fail(path, "cannot open file for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "PNG encode error");
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, field.width, field.height, 16, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);
    std::vector<png_bytep> rows(field.height);
    for (int y = 0; y < field.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(samples.data() +
                                              static_cast<std::size_t>(y) * field.width * 3);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RgbImage flow_to_color(const FlowField& field, double max_magnitude) {
    double max_mag = max_magnitude;
    if (max_mag <= 0.0) {
        for (std::size_t i = 0; i < field.u.size(); ++i) {
            if (!field.valid[i]) continue;
            const double mag = std::sqrt(static_cast<double>(field.u[i]) * field.u[i] +
                                         static_cast<double>(field.v[i]) * field.v[i]);
            if (mag > max_mag) max_mag = mag;
        }
        if (max_mag <= 0.0) max_mag = 1.0;
    }

    RgbImage out(field.width, field.height);
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            const std::size_t i = field.index(x, y);
            std::uint8_t* px = out.pixel(x, y);
            if (!field.valid[i]) {
                px[0] = px[1] = px[2] = 0;
                continue;
            }
            const double u = field.u[i];
            const double v = field.v[i];
            const double mag = std::sqrt(u * u + v * v);
            double hue = std::atan2(v, u) * (180.0 / 3.14159265358979323846);
            if (hue < 0.0) hue += 360.0;
            const double sat = std::min(1.0, mag / max_mag);

            // HSV -> RGB at full value; zero saturation renders white.
            const double hp = hue / 60.0;
            const double c = sat;
            const double xf = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
            double r = 0.0, g = 0.0, b = 0.0;
            if (hp < 1.0) { r = c; g = xf; }
            else if (hp < 2.0) { r = xf; g = c; }
            else if (hp < 3.0) { g = c; b = xf; }
            else if (hp < 4.0) { g = xf; b = c; }
            else if (hp < 5.0) { r = xf; b = c; }
            else { r = c; b = xf; }
            const double m = 1.0 - c;
            px[0] = static_cast<std::uint8_t>(std::lround((r + m) * 255.0));
            px[1] = static_cast<std::uint8_t>(std::lround((g + m) * 255.0));
            px[2] = static_cast<std::uint8_t>(std::lround((b + m) * 255.0));
        }
    }
    return out;
}

}  // namespace degraf
