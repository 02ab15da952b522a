#pragma once

#include <vector>

#include "dgrt/transport.hpp"

namespace dgrt {

struct PrimGrads {
    std::vector<Vec3> mu;
    std::vector<Quat> rot;
    std::vector<Vec2> scale;
    std::vector<double> opacity_logit;
    std::vector<std::vector<Vec3>> sh;

    void init(size_t n, int ncoeff) {
        mu.assign(n, {});
        rot.assign(n, Quat{0, 0, 0, 0});
        scale.assign(n, {});
        opacity_logit.assign(n, 0.0);
        sh.assign(n, std::vector<Vec3>(ncoeff));
    }
    void add(const PrimGrads& o) {
        for (size_t i = 0; i < mu.size(); ++i) {
            mu[i] += o.mu[i];
            for (int k = 0; k < 4; ++k) rot[i][k] += o.rot[i][k];
            scale[i].x += o.scale[i].x;
            scale[i].y += o.scale[i].y;
            opacity_logit[i] += o.opacity_logit[i];
            for (size_t k = 0; k < sh[i].size(); ++k) sh[i][k] += o.sh[i][k];
        }
    }
};

struct SceneGrads {
    PrimGrads intr, trans, refl;
    std::vector<double> trans_logit, spec_logit;
    double f0 = 0;

    void init(const DecomposedScene& s) {
        int nc = s.sh_coeff_count();
        intr.init(s.intr.size(), nc);
        trans.init(s.trans.size(), nc);
        refl.init(s.refl.size(), nc);
        trans_logit.assign(s.intr.size(), 0.0);
        spec_logit.assign(s.intr.size(), 0.0);
        f0 = 0;
    }
    void add(const SceneGrads& o) {
        intr.add(o.intr);
        trans.add(o.trans);
        refl.add(o.refl);
        for (size_t i = 0; i < trans_logit.size(); ++i) {
            trans_logit[i] += o.trans_logit[i];
            spec_logit[i] += o.spec_logit[i];
        }
        f0 += o.f0;
    }
};

// Adjoint of one ray-splat intersection. Routes gradients w.r.t. the local
// coordinates (u, v), the hit depth, and an extra normal-channel term into
// the primitive parameters; optionally also into the ray origin/direction
// (needed for secondary rays whose geometry depends on the G-buffer).
inline void splat_hit_backward(const Ray& ray, const GaussianPrimitive& g, const SplatHit& h,
                               double gU, double gV, double gDepth, Vec3 g_n_channel,
                               Vec3& g_mu, Quat& g_rot, Vec2& g_scale, Vec3* g_origin,
                               Vec3* g_dir) {
    Frame f = quat_frame(g.rot);
    double denom = dot(ray.dir, f.n);
    Vec3 delta = ray.origin + h.depth * ray.dir - g.mu;
    double inv_su = 1.0 / g.scale.x, inv_sv = 1.0 / g.scale.y;
    double dtu = dot(ray.dir, f.t_u), dtv = dot(ray.dir, f.t_v);

    Vec3 du_do = inv_su * (f.t_u - (dtu / denom) * f.n);
    Vec3 dv_do = inv_sv * (f.t_v - (dtv / denom) * f.n);
    Vec3 dt_do = (-1.0 / denom) * f.n;

    // d(u,v,t)/d(mu) = -d(u,v,t)/d(origin); d/d(dir) = depth * d/d(origin).
    Vec3 go = gU * du_do + gV * dv_do + gDepth * dt_do;
    g_mu += -1.0 * go;
    if (g_origin) *g_origin += go;
    if (g_dir) *g_dir += h.depth * go;

    Vec3 g_tu = (gU * inv_su) * delta;
    Vec3 g_tv = (gV * inv_sv) * delta;
    Vec3 g_n = (-(gU * dtu * inv_su + gV * dtv * inv_sv + gDepth) / denom) * delta;
    g_n += g_n_channel;
    quat_frame_backward(g.rot, g_tu, g_tv, g_n, g_rot);

    g_scale.x += -gU * h.u * inv_su;
    g_scale.y += -gV * h.v * inv_sv;
}

namespace detail {

// Shared alpha-compositing adjoint: given per-hit contribution gradients
// gc_i = dL/dw_i, produce dL/dalpha_i via the suffix recursion.
inline void compositing_alpha_grads(const std::vector<SplatHit>& hits, int n,
                                    const std::vector<double>& w, const std::vector<double>& gc,
                                    std::vector<double>& g_alpha) {
    g_alpha.assign(n, 0.0);
    // T_i = w_i / alpha_i, but recompute transmittance to stay stable for tiny alphas.
    double suffix = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        double a = hits[i].alpha;
        double T = a > 0 ? w[i] / a : 0.0;
        g_alpha[i] = T * gc[i] - suffix / (1.0 - a);
        suffix += w[i] * gc[i];
    }
}

inline void forward_weights(const std::vector<SplatHit>& hits, int n, std::vector<double>& w) {
    w.resize(n);
    double T = 1.0;
    for (int i = 0; i < n; ++i) {
        w[i] = T * hits[i].alpha;
        T *= (1.0 - hits[i].alpha);
    }
}

}  // namespace detail

// Adjoint of composite_pixel over the truncated hit prefix. Primary rays only
// (no ray gradients; camera is fixed).
inline void composite_pixel_backward(const std::vector<SplatHit>& hits,
                                     const DecomposedScene& scene, const Ray& ray, Vec3 gl,
                                     double gz, Vec3 gn_raw, double gt, double gs, double gacc,
                                     SceneGrads& grads,
                                     const SplatParams& p = default_splat_params()) {
    int n = int(hits.size());
    if (n == 0) return;
    std::vector<double> w, gc(n);
    detail::forward_weights(hits, n, w);

    for (int i = 0; i < n; ++i) {
        const SplatHit& h = hits[i];
        const GaussianPrimitive& g = scene.intr[h.prim_index];
        const InterfaceAttributes& a = scene.intr_attr[h.prim_index];
        Vec3 c = eval_sh(g.sh, ray.dir, scene.sh_degree);
        Vec3 n_g = quat_frame(g.rot).n;
        double ti = a.transparency(), si = a.specularity();
        gc[i] = dot(c, gl) + h.depth * gz + dot(n_g, gn_raw) + ti * gt + si * gs + gacc;

        Vec3 g_dir_dummy{};
        eval_sh_backward(g.sh, ray.dir, scene.sh_degree, c, w[i] * gl,
                         grads.intr.sh[h.prim_index], g_dir_dummy);
        grads.trans_logit[h.prim_index] += w[i] * gt * ti * (1.0 - ti);
        grads.spec_logit[h.prim_index] += w[i] * gs * si * (1.0 - si);
    }

    std::vector<double> g_alpha;
    detail::compositing_alpha_grads(hits, n, w, gc, g_alpha);

    for (int i = 0; i < n; ++i) {
        const SplatHit& h = hits[i];
        const GaussianPrimitive& g = scene.intr[h.prim_index];
        double o = g.opacity();
        double gU = 0, gV = 0;
        if (h.alpha < p.alpha_cap) {  // capped alpha passes no gradient
            double g_gauss = o * g_alpha[i];
            grads.intr.opacity_logit[h.prim_index] += h.gauss_val * g_alpha[i] * o * (1.0 - o);
            gU = -h.u * h.gauss_val * g_gauss;
            gV = -h.v * h.gauss_val * g_gauss;
        }
        splat_hit_backward(ray, g, h, gU, gV, w[i] * gz, w[i] * gn_raw,
                           grads.intr.mu[h.prim_index], grads.intr.rot[h.prim_index],
                           grads.intr.scale[h.prim_index], nullptr, nullptr);
    }
}

// Adjoint of composite_trace. Accumulates primitive gradients plus the ray
// origin/direction and depth-offset gradients for the secondary-ray chain.
inline void composite_trace_backward(const std::vector<SplatHit>& hits,
                                     const std::vector<GaussianPrimitive>& prims, const Ray& ray,
                                     Vec3 sh_dir, int sh_degree, double depth_offset, Vec3 gR,
                                     double gA, double gD, PrimGrads& grads, Vec3& g_origin,
                                     Vec3& g_dir, double& g_offset,
                                     const SplatParams& p = default_splat_params()) {
    int n = int(hits.size());
    if (n == 0) return;
    std::vector<double> w, gc(n);
    detail::forward_weights(hits, n, w);

    Vec3 g_shdir{};
    for (int i = 0; i < n; ++i) {
        const SplatHit& h = hits[i];
        const GaussianPrimitive& g = prims[h.prim_index];
        Vec3 c = eval_sh(g.sh, sh_dir, sh_degree);
        gc[i] = dot(c, gR) + gA + (h.depth + depth_offset) * gD;
        eval_sh_backward(g.sh, sh_dir, sh_degree, c, w[i] * gR, grads.sh[h.prim_index], g_shdir);
        g_offset += w[i] * gD;
    }

    std::vector<double> g_alpha;
    detail::compositing_alpha_grads(hits, n, w, gc, g_alpha);

    for (int i = 0; i < n; ++i) {
        const SplatHit& h = hits[i];
        const GaussianPrimitive& g = prims[h.prim_index];
        double o = g.opacity();
        double gU = 0, gV = 0;
        if (h.alpha < p.alpha_cap) {
            double g_gauss = o * g_alpha[i];
            grads.opacity_logit[h.prim_index] += h.gauss_val * g_alpha[i] * o * (1.0 - o);
            gU = -h.u * h.gauss_val * g_gauss;
            gV = -h.v * h.gauss_val * g_gauss;
        }
        splat_hit_backward(ray, g, h, gU, gV, w[i] * gD, Vec3{}, grads.mu[h.prim_index],
                           grads.rot[h.prim_index], grads.scale[h.prim_index], &g_origin, &g_dir);
    }
    // SH is evaluated at the ray direction for both trace flavors.
    g_dir += g_shdir;
}

// Per-pixel upstream gradients of the differentiable render layers.
struct PixelGrads {
    std::vector<Vec3> l_o;
    std::vector<double> z;
    std::vector<Vec3> n;  // w.r.t. the camera-facing unit normal layer
    std::vector<double> t;

    explicit PixelGrads(size_t npx) : l_o(npx), z(npx, 0.0), n(npx), t(npx, 0.0) {}
};

// Full reverse pass of render() from the retained forward cache. Gradients
// flow through Gaussian evaluation, compositing, shading, and the secondary
// ray geometry (origin through z, direction through the normal); discrete
// hit/miss and sort-order changes carry no gradient by convention.
inline SceneGrads render_backward(const DecomposedScene& scene, const Camera& cam,
                                  const RenderCache& cache, const PixelGrads& pg,
                                  const SplatParams& p = default_splat_params(),
                                  int threads = 1) {
    int nbands = band_count(cam.height);
    std::vector<SceneGrads> band_grads(nbands);

    parallel_bands(cam.height, threads, [&](int band, int y0, int y1) {
        SceneGrads& grads = band_grads[band];
        grads.init(scene);
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                size_t i = size_t(y) * cam.width + x;
                Vec3 d = cam.pixel_dir(x, y);
                Ray primary{cam.position, d, 0.0};
                const PixelComposite& comp = cache.raster.comp[i];

                Vec3 gLo = pg.l_o[i];
                double gz = pg.z[i];
                double gt = pg.t[i];

                if (cache.skipped[i]) {
                    // l_o = l_intr + (1 - acc) * background
                    composite_pixel_backward(cache.raster.hits[i], scene, primary, gLo, gz,
                                             Vec3{}, gt, 0.0, -dot(scene.background, gLo), grads,
                                             p);
                    continue;
                }

                const ShadedPixel& sp = cache.shade[i];
                double t_ch = comp.t, s_ch = comp.s;

                Vec3 gL_op = (1.0 - t_ch) * gLo;
                Vec3 gL_tr = t_ch * gLo;
                double g_t = dot(sp.l_transparent - sp.l_opaque, gLo) + gt;
                double g_ks = dot(sp.l_refl_bg - sp.l_intr_bg, gL_op) +
                              dot(sp.l_refl_bg - sp.l_trans_bg, gL_tr);
                Vec3 g_lintr_bg = (1.0 - sp.k_s) * gL_op;
                Vec3 g_ltrans_bg = (1.0 - sp.k_s) * gL_tr;
                Vec3 g_lrefl_bg = sp.k_s * (gL_op + gL_tr);

                double g_s = (1.0 - sp.fresnel) * g_ks;
                double g_F = (1.0 - s_ch) * g_ks;
                double one_m = 1.0 - std::max(0.0, sp.cos_theta);
                double om2 = one_m * one_m;
                grads.f0 += (1.0 - om2 * om2 * one_m) * g_F;
                double g_m = sp.cos_theta > 0.0
                                 ? -5.0 * (1.0 - scene.f0) * om2 * om2 * g_F
                                 : 0.0;

                Vec3 g_lintr_raw = g_lintr_bg;
                double g_acc = -dot(scene.background, g_lintr_bg);
                double g_z = gz;

                // Transmission continuation: origin rides the interface depth.
                {
                    Vec3 gR = g_ltrans_bg;
                    double gA = -dot(scene.background, g_ltrans_bg);
                    Vec3 g_origin{}, g_dir{};
                    double g_offset = 0;
                    composite_trace_backward(cache.trans_hits[i], scene.trans, cache.cont_ray[i],
                                             cache.cont_ray[i].dir, scene.sh_degree, comp.z, gR,
                                             gA, 0.0, grads.trans, g_origin, g_dir, g_offset, p);
                    g_z += dot(d, g_origin) + g_offset;
                }

                // Reflection query: origin rides z, direction rides the normal.
                Vec3 omega_o = -d;
                Vec3 g_n_s = pg.n[i];
                {
                    Vec3 gR = g_lrefl_bg;
                    double gA = -dot(scene.background, g_lrefl_bg);
                    Vec3 g_origin{}, g_dir{};
                    double g_offset = 0;
                    composite_trace_backward(cache.refl_hits[i], scene.refl, cache.refl_ray[i],
                                             cache.refl_ray[i].dir, scene.sh_degree, 0.0, gR, gA,
                                             0.0, grads.refl, g_origin, g_dir, g_offset, p);
                    g_z += dot(d, g_origin);
                    // omega_r = 2 m n_s - omega_o with m = n_s . omega_o
                    g_n_s += 2.0 * dot(sp.n_shading, g_dir) * omega_o + 2.0 * sp.cos_theta * g_dir;
                }
                g_n_s += g_m * omega_o;  // Fresnel cosine m = n_s . omega_o

                // Flip and renormalization back to the raw composited normal.
                Vec3 g_n_hat = sp.flip_sign * g_n_s;
                Vec3 g_n_raw{};
                double n_norm = norm(comp.n_raw);
                if (n_norm > 1e-12) {
                    Vec3 n_hat = comp.n_raw / n_norm;
                    g_n_raw = (g_n_hat - dot(n_hat, g_n_hat) * n_hat) / n_norm;
                }

                composite_pixel_backward(cache.raster.hits[i], scene, primary, g_lintr_raw, g_z,
                                         g_n_raw, g_t, g_s, g_acc, grads, p);
            }
        }
    });

    SceneGrads total;
    total.init(scene);
    for (int b = 0; b < nbands; ++b) total.add(band_grads[b]);
    return total;
}

}  // namespace dgrt
