#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "dgrt/scene.hpp"

namespace dgrt {

// Compositing constants shared by the rasterizer and the ray tracer.
struct SplatParams {
    double alpha_cap = 0.999;
    double t_stop = 1e-4;           // terminate once transmittance drops below
    double g_cutoff = 0.011108996538242306;  // exp(-4.5), 3-sigma support
    double eps_parallel = 1e-8;
    double eps_offset = 1e-4;       // secondary-ray origin offset
    double acc_skip = 1e-3;         // below this coverage a pixel shades as background
};

inline const SplatParams& default_splat_params() {
    static const SplatParams p{};
    return p;
}

struct SplatHit {
    int prim_index = -1;
    double depth = 0;      // ray parameter at the plane intersection
    double u = 0, v = 0;   // normalized tangent-plane coordinates
    double gauss_val = 0;  // exp(-(u^2+v^2)/2)
    double alpha = 0;      // opacity * gauss_val, capped
};

inline std::optional<SplatHit> ray_splat_intersect(const Ray& ray, const GaussianPrimitive& g,
                                                   int prim_index,
                                                   const SplatParams& p = default_splat_params()) {
    Frame f = quat_frame(g.rot);
    double denom = dot(ray.dir, f.n);
    if (std::abs(denom) <= p.eps_parallel) return std::nullopt;
    double depth = dot(g.mu - ray.origin, f.n) / denom;
    if (!(depth > ray.t_min)) return std::nullopt;
    Vec3 delta = ray.origin + depth * ray.dir - g.mu;
    double u = dot(delta, f.t_u) / g.scale.x;
    double v = dot(delta, f.t_v) / g.scale.y;
    double gv = std::exp(-0.5 * (u * u + v * v));
    if (gv < p.g_cutoff) return std::nullopt;
    SplatHit h;
    h.prim_index = prim_index;
    h.depth = depth;
    h.u = u;
    h.v = v;
    h.gauss_val = gv;
    h.alpha = std::min(g.opacity() * gv, p.alpha_cap);
    return h;
}

inline void sort_hits(std::vector<SplatHit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const SplatHit& a, const SplatHit& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.prim_index < b.prim_index;
    });
}

// Composited G-buffer entries for one pixel. n_raw is the weighted normal sum
// before renormalization (the backward pass needs it).
struct PixelComposite {
    Vec3 l_intr{};
    double z = 0;
    Vec3 n_raw{};
    double t = 0, s = 0;
    double acc_alpha = 0;
    double t_final = 1;  // transmittance after the loop
    int n_used = 0;      // hits composited before early exit
};

// Front-to-back compositing of interface hits: weights w_i = T_i * alpha_i,
// every channel is the raw weighted sum (no alpha normalization).
inline PixelComposite composite_pixel(const std::vector<SplatHit>& hits,
                                      const DecomposedScene& scene, Vec3 view_dir,
                                      const SplatParams& p = default_splat_params()) {
    PixelComposite out;
    double T = 1.0;
    for (const SplatHit& h : hits) {
        if (T < p.t_stop) break;
        const GaussianPrimitive& g = scene.intr[h.prim_index];
        const InterfaceAttributes& a = scene.intr_attr[h.prim_index];
        double w = T * h.alpha;
        out.l_intr += w * eval_sh(g.sh, view_dir, scene.sh_degree);
        out.z += w * h.depth;
        out.n_raw += w * quat_frame(g.rot).n;
        out.t += w * a.transparency();
        out.s += w * a.specularity();
        out.acc_alpha += w;
        T *= (1.0 - h.alpha);
        ++out.n_used;
    }
    out.t_final = T;
    return out;
}

inline Vec3 renormalized_or_zero(Vec3 v) {
    double n = norm(v);
    return n > 1e-12 ? v / n : Vec3{};
}

// Per-pixel interface rasterization output.
struct GBuffer {
    int width = 0, height = 0;
    std::vector<double> z, t, s, acc_alpha;
    std::vector<Vec3> n;       // renormalized, zero where acc_alpha == 0
    std::vector<Vec3> l_intr;

    GBuffer() = default;
    GBuffer(int w, int h)
        : width(w), height(h), z(size_t(w) * h, 0.0), t(size_t(w) * h, 0.0),
          s(size_t(w) * h, 0.0), acc_alpha(size_t(w) * h, 0.0), n(size_t(w) * h),
          l_intr(size_t(w) * h) {}

    size_t idx(int x, int y) const { return size_t(y) * width + x; }
};

}  // namespace dgrt
