#include "degraf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace degraf {

namespace {

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

bool has_suffix(const std::string& path, const std::string& suffix) {
    if (path.size() < suffix.size()) return false;
    std::string tail = path.substr(path.size() - suffix.size());
    std::transform(tail.begin(), tail.end(), tail.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return tail == suffix;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

GrayImage load_gray_png(const std::string& path) {
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

    std::vector<png_byte> pixels;
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

    if (bit_depth > 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "unsupported bit depth (expected 8-bit input)");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage out(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* src = pixels.data() + y * rowbytes;
        float* dst = out.row(static_cast<int>(y));
        if (channels == 1) {
            for (png_uint_32 x = 0; x < width; ++x) dst[x] = src[x];
        } else if (channels >= 3) {
            for (png_uint_32 x = 0; x < width; ++x) {
                const png_byte* p = src + x * channels;
                dst[x] = static_cast<float>(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
            }
        } else {
            fail(path, "unsupported channel count");
        }
    }
    return out;
}

// P2/P5 PGM, maxval up to 255.
GrayImage load_gray_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    auto next_token = [&in]() {
        std::string token;
        while (in >> token) {
            if (token[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return token;
        }
        return std::string();
    };

    const std::string magic = next_token();
    if (magic != "P5" && magic != "P2") fail(path, "not a PGM file");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token());
        height = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        fail(path, "malformed PGM header");
    }
    if (width < 1 || height < 1) fail(path, "malformed PGM dimensions");
    if (maxval < 1 || maxval > 255) fail(path, "unsupported PGM maxval (expected <= 255)");

    GrayImage out(width, height);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size()) fail(path, "truncated PGM data");
        for (std::size_t i = 0; i < buf.size(); ++i) out.data()[i] = buf[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            int v;
            if (!(in >> v)) fail(path, "truncated PGM data");
            if (v < 0 || v > maxval) fail(path, "PGM sample out of range");
            out.data()[i] = static_cast<float>(v);
        }
    }
    return out;
}

void write_png_impl(const std::string& path, int width, int height, int color_type,
                    int bit_depth, const std::vector<png_bytep>& rows,
                    bool swap_endian) {
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
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (swap_endian) png_set_swap(png);
    png_write_image(png, const_cast<png_bytep*>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage load_gray(const std::string& path) {
    if (has_suffix(path, ".pgm")) return load_gray_pgm(path);
    return load_gray_png(path);
}

void write_gray_png(const GrayImage& image, const std::string& path) {
    const int w = image.width();
    const int h = image.height();
    std::vector<png_byte> bytes(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::clamp(image.data()[i], 0.0f, 255.0f);
        bytes[i] = static_cast<png_byte>(std::lround(v));
    }
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * w;
    write_png_impl(path, w, h, PNG_COLOR_TYPE_GRAY, 8, rows, false);
}

void write_gray_pgm(const GrayImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open file for writing");
    out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
    for (std::size_t i = 0; i < image.size(); ++i) {
        const float v = std::clamp(image.data()[i], 0.0f, 255.0f);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
    if (!out) fail(path, "write error");
}

void write_rgb_png(const RgbImage& image, const std::string& path) {
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) {
        rows[y] = const_cast<png_bytep>(image.data.data()) +
                  static_cast<std::size_t>(y) * image.width * 3;
    }
    write_png_impl(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, rows, false);
}

}  // namespace degraf
