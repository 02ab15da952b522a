#pragma once

#include <functional>
#include <vector>

#include "dgrt/optim.hpp"
#include "dgrt/rng.hpp"

namespace dgrt::testhelp {

inline Camera look_at_camera(Vec3 eye, Vec3 target, Vec3 up, int w, int h, double focal_px) {
    Camera cam;
    cam.position = eye;
    Vec3 fwd = normalized(target - eye);
    Vec3 right = normalized(cross(fwd, up));
    Vec3 down = cross(fwd, right);
    for (int c = 0; c < 3; ++c) {
        cam.orientation(0, c) = right[c];
        cam.orientation(1, c) = down[c];
        cam.orientation(2, c) = fwd[c];
    }
    cam.width = w;
    cam.height = h;
    cam.fx = cam.fy = focal_px;
    cam.cx = 0.5 * w;
    cam.cy = 0.5 * h;
    return cam;
}

inline Quat random_quat(Rng& rng) {
    Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return normalized(q);
}

inline GaussianPrimitive random_primitive(Rng& rng, Vec3 center, double spread, double scale_lo,
                                          double scale_hi, int degree) {
    GaussianPrimitive g;
    g.mu = center + Vec3{rng.normal(), rng.normal(), rng.normal()} * spread;
    g.rot = random_quat(rng);
    g.scale = {rng.uniform(scale_lo, scale_hi), rng.uniform(scale_lo, scale_hi)};
    g.opacity_logit = rng.uniform(-1.0, 1.5);
    g.sh.assign(sh::basis_count(degree), Vec3{});
    g.sh[0] = rng.uniform_vec3(-0.3, 0.3);
    for (size_t k = 1; k < g.sh.size(); ++k) g.sh[k] = rng.uniform_vec3(-0.08, 0.08);
    return g;
}

inline DecomposedScene random_scene(Rng& rng, int n_intr, int n_trans, int n_refl,
                                    int degree = 2) {
    DecomposedScene s;
    s.sh_degree = degree;
    s.background = {0.1, 0.12, 0.15};
    for (int i = 0; i < n_intr; ++i) {
        s.intr.push_back(random_primitive(rng, {0, 0, 0}, 0.8, 0.2, 0.8, degree));
        InterfaceAttributes a;
        a.trans_logit = rng.uniform(-2.0, 2.0);
        a.spec_logit = rng.uniform(-2.5, 0.5);
        s.intr_attr.push_back(a);
    }
    for (int i = 0; i < n_trans; ++i)
        s.trans.push_back(random_primitive(rng, {0, 1.2, 0}, 0.7, 0.2, 0.8, degree));
    for (int i = 0; i < n_refl; ++i)
        s.refl.push_back(random_primitive(rng, {0, -2.0, 0}, 1.2, 0.5, 1.6, degree));
    return s;
}

// ---------------------------------------------------------------------------
// Independent reference implementations (exhaustive, no BVH, no shared code
// path with the library's gather).

struct OracleHit {
    int index;
    double depth, u, v, gauss, alpha;
};

inline std::vector<OracleHit> oracle_gather(const std::vector<GaussianPrimitive>& prims,
                                            const Ray& ray, const SplatParams& p) {
    std::vector<OracleHit> hits;
    for (size_t i = 0; i < prims.size(); ++i) {
        const GaussianPrimitive& g = prims[i];
        Frame f = quat_frame(g.rot);
        double denom = dot(ray.dir, f.n);
        if (std::abs(denom) <= p.eps_parallel) continue;
        double depth = dot(g.mu - ray.origin, f.n) / denom;
        if (!(depth > ray.t_min)) continue;
        Vec3 q = ray.origin + depth * ray.dir - g.mu;
        double u = dot(q, f.t_u) / g.scale.x;
        double v = dot(q, f.t_v) / g.scale.y;
        double gv = std::exp(-0.5 * (u * u + v * v));
        if (gv < p.g_cutoff) continue;
        double alpha = std::min(sigmoid(g.opacity_logit) * gv, p.alpha_cap);
        hits.push_back({int(i), depth, u, v, gv, alpha});
    }
    std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.index < b.index;
    });
    return hits;
}

struct OraclePixel {
    Vec3 radiance{};
    double z = 0;
    Vec3 n{};
    double t = 0, s = 0, acc = 0, depth_sum = 0;
};

// Exhaustive composite over one interface pixel (all G-buffer channels).
inline OraclePixel oracle_composite_interface(const DecomposedScene& scene, const Ray& ray,
                                              const SplatParams& p) {
    auto hits = oracle_gather(scene.intr, ray, p);
    OraclePixel out;
    double T = 1.0;
    for (const auto& h : hits) {
        if (T < p.t_stop) break;
        double w = T * h.alpha;
        out.radiance += w * eval_sh(scene.intr[h.index].sh, ray.dir, scene.sh_degree);
        out.z += w * h.depth;
        out.n += w * quat_frame(scene.intr[h.index].rot).n;
        out.t += w * sigmoid(scene.intr_attr[h.index].trans_logit);
        out.s += w * sigmoid(scene.intr_attr[h.index].spec_logit);
        out.acc += w;
        T *= (1.0 - h.alpha);
    }
    return out;
}

// Exhaustive composite of a generic set (radiance / alpha / depth).
inline OraclePixel oracle_composite_set(const std::vector<GaussianPrimitive>& prims,
                                        const Ray& ray, Vec3 sh_dir, int degree,
                                        double depth_offset, const SplatParams& p) {
    auto hits = oracle_gather(prims, ray, p);
    OraclePixel out;
    double T = 1.0;
    for (const auto& h : hits) {
        if (T < p.t_stop) break;
        double w = T * h.alpha;
        out.radiance += w * eval_sh(prims[h.index].sh, sh_dir, degree);
        out.acc += w;
        out.depth_sum += w * (h.depth + depth_offset);
        T *= (1.0 - h.alpha);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite differences.

inline double central_diff(const std::function<double()>& f, double& param, double h = 1e-5) {
    double orig = param;
    param = orig + h;
    double fp = f();
    param = orig - h;
    double fm = f();
    param = orig;
    return (fp - fm) / (2.0 * h);
}

struct GradCheck {
    double analytic, fd;
    bool ok(double rel_tol = 1e-4, double abs_floor = 1e-9) const {
        double scale = std::max(std::abs(analytic), std::abs(fd));
        if (scale < abs_floor) return true;
        return std::abs(analytic - fd) <= rel_tol * std::max(scale, 1e-6);
    }
};

}  // namespace dgrt::testhelp
