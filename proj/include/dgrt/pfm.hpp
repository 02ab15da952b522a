#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgrt/math.hpp"

namespace dgrt {

// Portable FloatMap, little-endian (scale header -1.0), rows bottom-to-top.

inline void write_pfm(const std::string& path, const std::vector<double>& data, int w, int h,
                      int channels) {
    if (channels != 1 && channels != 3) throw std::runtime_error("pfm: 1 or 3 channels");
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("pfm: cannot open " + path);
    std::fprintf(f, "%s\n%d %d\n-1.0\n", channels == 3 ? "PF" : "Pf", w, h);
    std::vector<float> row(size_t(w) * channels);
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                row[size_t(x) * channels + c] = float(data[(size_t(y) * w + x) * channels + c]);
        std::fwrite(row.data(), sizeof(float), row.size(), f);
    }
    std::fclose(f);
}

inline void write_pfm(const std::string& path, const std::vector<Vec3>& img, int w, int h) {
    std::vector<double> flat(size_t(w) * h * 3);
    for (size_t i = 0; i < img.size(); ++i)
        for (int c = 0; c < 3; ++c) flat[i * 3 + c] = img[i][c];
    write_pfm(path, flat, w, h, 3);
}

struct PfmImage {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    Vec3 rgb(size_t i) const { return {data[i * 3], data[i * 3 + 1], data[i * 3 + 2]}; }
};

inline PfmImage read_pfm(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("pfm: cannot open " + path);
    char magic[3] = {};
    if (std::fscanf(f, "%2s", magic) != 1) throw std::runtime_error("pfm: bad header");
    PfmImage img;
    img.channels = std::strcmp(magic, "PF") == 0 ? 3 : 1;
    double scale = 0;
    if (std::fscanf(f, "%d %d %lf", &img.width, &img.height, &scale) != 3)
        throw std::runtime_error("pfm: bad header " + path);
    std::fgetc(f);  // single whitespace before the raster
    if (scale > 0) throw std::runtime_error("pfm: big-endian unsupported");
    size_t n = size_t(img.width) * img.height * img.channels;
    std::vector<float> raw(n);
    if (std::fread(raw.data(), sizeof(float), n, f) != n)
        throw std::runtime_error("pfm: truncated " + path);
    std::fclose(f);
    img.data.resize(n);
    int w = img.width, c = img.channels;
    for (int y = 0; y < img.height; ++y) {
        int src_y = img.height - 1 - y;
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k)
                img.data[(size_t(y) * w + x) * c + k] = raw[(size_t(src_y) * w + x) * c + k];
    }
    return img;
}

}  // namespace dgrt
