#pragma once

#include <cassert>
#include <vector>

#include "dgrt/math.hpp"
#include "dgrt/sh.hpp"

namespace dgrt {

// Scale floor keeping splats non-degenerate.
constexpr double kScaleMin = 1e-4;

// One planar Gaussian: tangent frame from `rot`, extents `scale` along the
// two tangent axes, opacity through a sigmoid, SH color block.
struct GaussianPrimitive {
    Vec3 mu;
    Quat rot;
    Vec2 scale{1, 1};
    double opacity_logit = 0;
    std::vector<Vec3> sh;  // (degree+1)^2 RGB coefficients

    double opacity() const { return sigmoid(opacity_logit); }
};

// Per-primitive transparency/specularity, attached to interface primitives.
struct InterfaceAttributes {
    double trans_logit = logit(0.1);
    double spec_logit = logit(0.1);

    double transparency() const { return sigmoid(trans_logit); }
    double specularity() const { return sigmoid(spec_logit); }
};

// The three disjoint primitive sets plus global shading settings. `intr` and
// `intr_attr` are parallel arrays.
struct DecomposedScene {
    std::vector<GaussianPrimitive> intr;
    std::vector<InterfaceAttributes> intr_attr;
    std::vector<GaussianPrimitive> trans;
    std::vector<GaussianPrimitive> refl;
    int sh_degree = 2;
    double f0 = 0.04;
    Vec3 background{0, 0, 0};

    int sh_coeff_count() const { return sh::basis_count(sh_degree); }
};

inline Frame primitive_frame(const GaussianPrimitive& g) { return quat_frame(g.rot); }

// Pinhole camera, world-to-camera orientation, x right / y down / z forward.
struct Camera {
    Vec3 position;
    Mat3 orientation;
    double fx = 1, fy = 1, cx = 0.5, cy = 0.5;
    int width = 1, height = 1;

    Vec3 forward() const { return orientation.row(2); }

    // Unit world-space direction through pixel center (px+0.5, py+0.5).
    Vec3 pixel_dir(int px, int py) const {
        Vec3 cam_dir{(px + 0.5 - cx) / fx, (py + 0.5 - cy) / fy, 1.0};
        return normalized(mul_t(orientation, cam_dir));
    }

    Vec3 world_to_cam(Vec3 p) const { return orientation * (p - position); }
};

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
    double t_min = 0;
};

inline std::vector<Ray> generate_rays(const Camera& cam) {
    std::vector<Ray> rays;
    rays.reserve(size_t(cam.width) * cam.height);
    for (int py = 0; py < cam.height; ++py)
        for (int px = 0; px < cam.width; ++px)
            rays.push_back({cam.position, cam.pixel_dir(px, py), 0.0});
    return rays;
}

// Row-major scalar raster.
struct ImageBuffer {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int c) : width(w), height(h), channels(c), data(size_t(w) * h * c, 0.0) {}

    double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
    Vec3 rgb(int x, int y) const {
        size_t i = (size_t(y) * width + x) * channels;
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set_rgb(int x, int y, Vec3 v) {
        size_t i = (size_t(y) * width + x) * channels;
        data[i] = v.x; data[i + 1] = v.y; data[i + 2] = v.z;
    }
    size_t pixel_count() const { return size_t(width) * height; }
};

// Bounding-sphere radius of all primitive centers; normalizes depth gaps and
// scales learning rates.
inline double scene_extent(const DecomposedScene& scene) {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    int n = 0;
    auto grow = [&](const std::vector<GaussianPrimitive>& prims) {
        for (const auto& g : prims) {
            lo = cwise_min(lo, g.mu);
            hi = cwise_max(hi, g.mu);
            ++n;
        }
    };
    grow(scene.intr);
    grow(scene.trans);
    grow(scene.refl);
    if (n == 0) return 1.0;
    return std::max(0.5 * norm(hi - lo), 1e-6);
}

}  // namespace dgrt
