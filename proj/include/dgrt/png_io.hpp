#pragma once

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgrt/math.hpp"

namespace dgrt {

inline void write_png_rgb8(const std::string& path, const std::vector<uint8_t>& rgb, int w,
                           int h) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(f);
        throw std::runtime_error("png: write failed " + path);
    }
    png_init_io(png, f);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = const_cast<png_bytep>(&rgb[size_t(y) * w * 3]);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

inline void write_png_gray8(const std::string& path, const std::vector<uint8_t>& gray, int w,
                            int h) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(f);
        throw std::runtime_error("png: write failed " + path);
    }
    png_init_io(png, f);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = const_cast<png_bytep>(&gray[size_t(y) * w]);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

// 8-bit grayscale reader (mask files).
inline std::vector<uint8_t> read_png_gray8(const std::string& path, int& w, int& h) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(f);
        throw std::runtime_error("png: read failed " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) png_set_rgb_to_gray(png, 1, -1, -1);
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    std::vector<uint8_t> out(size_t(w) * h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = &out[size_t(y) * w];
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(f);
    return out;
}

inline uint8_t to_srgb8(double linear) {
    double v = clamp01(linear);
    double s = v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
    return uint8_t(std::lround(255.0 * clamp01(s)));
}

inline void write_png_radiance(const std::string& path, const std::vector<Vec3>& img, int w,
                               int h) {
    std::vector<uint8_t> rgb(size_t(w) * h * 3);
    for (size_t i = 0; i < img.size(); ++i)
        for (int c = 0; c < 3; ++c) rgb[i * 3 + c] = to_srgb8(img[i][c]);
    write_png_rgb8(path, rgb, w, h);
}

// Compact viridis ramp for scalar previews.
inline Vec3 viridis(double t) {
    static const Vec3 anchors[9] = {
        {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
        {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
        {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.993, 0.906, 0.144}};
    t = clamp01(t);
    double f = t * 8.0;
    int i = std::min(7, int(f));
    double a = f - i;
    return (1.0 - a) * anchors[i] + a * anchors[i + 1];
}

// Scalar preview normalized to [lo, hi] then colormapped.
inline void write_png_scalar(const std::string& path, const std::vector<double>& img, int w,
                             int h, double lo, double hi) {
    std::vector<uint8_t> rgb(size_t(w) * h * 3);
    double range = hi > lo ? hi - lo : 1.0;
    for (size_t i = 0; i < img.size(); ++i) {
        Vec3 c = viridis((img[i] - lo) / range);
        rgb[i * 3] = uint8_t(std::lround(255.0 * clamp01(c.x)));
        rgb[i * 3 + 1] = uint8_t(std::lround(255.0 * clamp01(c.y)));
        rgb[i * 3 + 2] = uint8_t(std::lround(255.0 * clamp01(c.z)));
    }
    write_png_rgb8(path, rgb, w, h);
}

// Normal preview: (n + 1) / 2 per channel.
inline void write_png_normals(const std::string& path, const std::vector<Vec3>& n, int w, int h) {
    std::vector<uint8_t> rgb(size_t(w) * h * 3);
    for (size_t i = 0; i < n.size(); ++i)
        for (int c = 0; c < 3; ++c)
            rgb[i * 3 + c] = uint8_t(std::lround(255.0 * clamp01(0.5 * (n[i][c] + 1.0))));
    write_png_rgb8(path, rgb, w, h);
}

}  // namespace dgrt
