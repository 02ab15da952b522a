#pragma once

#include <vector>

#include "dgrt/raster.hpp"
#include "dgrt/trace.hpp"
#include "dgrt/util.hpp"

namespace dgrt {

// Schlick reflectance from the cosine between outgoing direction and normal.
inline double fresnel_schlick_cos(double cos_theta, double f0) {
    double m = 1.0 - std::max(0.0, cos_theta);
    double m2 = m * m;
    return f0 + (1.0 - f0) * m2 * m2 * m;
}

inline double fresnel_schlick(Vec3 omega_o, Vec3 n, double f0) {
    return fresnel_schlick_cos(dot(omega_o, n), f0);
}

// Fresnel-weighted specular blending factor.
inline double specular_weight(double s, double F) { return s + (1.0 - s) * F; }

inline Vec3 reflect_dir(Vec3 omega_o, Vec3 n) { return 2.0 * dot(n, omega_o) * n - omega_o; }

// Everything shade_pixel consumes: composited G-buffer entries plus the two
// traced branches (raw, background not yet blended in).
struct ShadingInputs {
    Vec3 n;             // composited unit normal (pre camera-facing flip)
    double t = 0, s = 0;
    Vec3 l_intr;        // raw weighted interface radiance
    double z = 0;
    double acc_alpha = 0;
    Vec3 omega_o;       // -view direction, unit
    Vec3 l_trans;
    double trans_alpha = 0;
    Vec3 l_refl;
    double refl_alpha = 0;
    double f0 = 0.04;
    Vec3 background;
};

struct ShadedPixel {
    Vec3 l_o;
    Vec3 l_intr_bg, l_trans_bg, l_refl_bg;  // branch radiances after background fall-through
    Vec3 l_opaque, l_transparent;
    Vec3 n_shading;      // camera-facing unit normal used in Eqs. 6-9
    double flip_sign = 1;
    double cos_theta = 0, fresnel = 0, k_s = 0;
};

// Transparency-gated two-branch transport: the t channel interpolates between
// the opaque and transparent branches, each a Fresnel-weighted blend with the
// traced reflection. Residual transmittance of every branch falls through to
// the global background.
inline ShadedPixel shade_pixel(const ShadingInputs& in) {
    ShadedPixel out;
    out.flip_sign = dot(in.n, in.omega_o) >= 0.0 ? 1.0 : -1.0;
    out.n_shading = out.flip_sign * in.n;
    out.cos_theta = dot(out.n_shading, in.omega_o);
    out.fresnel = fresnel_schlick_cos(out.cos_theta, in.f0);
    out.k_s = specular_weight(in.s, out.fresnel);
    out.l_intr_bg = in.l_intr + (1.0 - in.acc_alpha) * in.background;
    out.l_trans_bg = in.l_trans + (1.0 - in.trans_alpha) * in.background;
    out.l_refl_bg = in.l_refl + (1.0 - in.refl_alpha) * in.background;
    out.l_opaque = (1.0 - out.k_s) * out.l_intr_bg + out.k_s * out.l_refl_bg;
    out.l_transparent = (1.0 - out.k_s) * out.l_trans_bg + out.k_s * out.l_refl_bg;
    out.l_o = (1.0 - in.t) * out.l_opaque + in.t * out.l_transparent;
    return out;
}

struct SceneBvh {
    GaussianBvh intr, trans, refl;

    explicit SceneBvh(const DecomposedScene& scene)
        : intr(scene.intr), trans(scene.trans), refl(scene.refl) {}
};

// All per-pixel layers of one rendered view.
struct RenderOutputs {
    int width = 0, height = 0;
    std::vector<Vec3> l_o, l_intr, l_trans, l_refl, n;
    std::vector<double> z, z_trans, t, s, k_s, acc_alpha;

    RenderOutputs() = default;
    RenderOutputs(int w, int h)
        : width(w), height(h), l_o(size_t(w) * h), l_intr(size_t(w) * h),
          l_trans(size_t(w) * h), l_refl(size_t(w) * h), n(size_t(w) * h),
          z(size_t(w) * h, 0.0), z_trans(size_t(w) * h, 0.0), t(size_t(w) * h, 0.0),
          s(size_t(w) * h, 0.0), k_s(size_t(w) * h, 0.0), acc_alpha(size_t(w) * h, 0.0) {}

    size_t idx(int x, int y) const { return size_t(y) * width + x; }
};

// Forward state for render_backward.
struct RenderCache {
    RasterCache raster;
    std::vector<uint8_t> skipped;
    std::vector<ShadedPixel> shade;
    std::vector<TraceResult> tr_trans, tr_refl;
    std::vector<std::vector<SplatHit>> trans_hits, refl_hits;  // sorted, truncated at early exit
    std::vector<Ray> cont_ray, refl_ray;
};

// Hybrid render: rasterize the interface set into a G-buffer, then per pixel
// trace the transmission continuation and the mirrored reflection query and
// gate them through shade_pixel. Pixels with negligible interface coverage
// shade as background without secondary traces.
inline RenderOutputs render(const DecomposedScene& scene, const SceneBvh& bvh, const Camera& cam,
                            const SplatParams& p = default_splat_params(), int threads = 1,
                            RenderCache* cache = nullptr) {
    RenderOutputs out(cam.width, cam.height);
    size_t npx = out.l_o.size();
    if (cache) {
        cache->skipped.assign(npx, 0);
        cache->shade.assign(npx, {});
        cache->tr_trans.assign(npx, {});
        cache->tr_refl.assign(npx, {});
        cache->trans_hits.assign(npx, {});
        cache->refl_hits.assign(npx, {});
        cache->cont_ray.assign(npx, {});
        cache->refl_ray.assign(npx, {});
    }
    GBuffer gb = rasterize_interface(scene, cam, bvh.intr, p, threads,
                                     cache ? &cache->raster : nullptr);

    parallel_bands(cam.height, threads, [&](int, int y0, int y1) {
        std::vector<SplatHit> hits;
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                size_t i = gb.idx(x, y);
                Vec3 d = cam.pixel_dir(x, y);
                out.l_intr[i] = gb.l_intr[i] + (1.0 - gb.acc_alpha[i]) * scene.background;
                out.z[i] = gb.z[i];
                out.t[i] = gb.t[i];
                out.s[i] = gb.s[i];
                out.acc_alpha[i] = gb.acc_alpha[i];

                if (gb.acc_alpha[i] < p.acc_skip) {
                    out.l_o[i] = out.l_intr[i];
                    out.l_trans[i] = scene.background;
                    out.l_refl[i] = scene.background;
                    out.n[i] = Vec3{};
                    if (cache) cache->skipped[i] = 1;
                    continue;
                }

                ShadingInputs in;
                in.n = gb.n[i];
                in.t = gb.t[i];
                in.s = gb.s[i];
                in.l_intr = gb.l_intr[i];
                in.z = gb.z[i];
                in.acc_alpha = gb.acc_alpha[i];
                in.omega_o = -d;
                in.f0 = scene.f0;
                in.background = scene.background;

                Ray primary{cam.position, d, 0.0};
                TraceResult tr = trace_continuation(gb.z[i], primary, bvh.trans, scene.trans,
                                                    scene.sh_degree, p,
                                                    cache ? &cache->trans_hits[i] : &hits);
                in.l_trans = tr.radiance;
                in.trans_alpha = tr.alpha;

                // Mirror query needs the camera-facing normal; recompute the
                // flip here so the reflected ray and shade_pixel agree.
                double sign = dot(gb.n[i], in.omega_o) >= 0.0 ? 1.0 : -1.0;
                Vec3 n_s = sign * gb.n[i];
                Vec3 omega_r = reflect_dir(in.omega_o, n_s);
                Ray rray{cam.position + gb.z[i] * d, omega_r, p.eps_offset};
                TraceResult rr = trace(bvh.refl, scene.refl, rray, omega_r, scene.sh_degree, p,
                                       cache ? &cache->refl_hits[i] : &hits);
                in.l_refl = rr.radiance;
                in.refl_alpha = rr.alpha;

                ShadedPixel sp = shade_pixel(in);
                out.l_o[i] = sp.l_o;
                out.l_trans[i] = sp.l_trans_bg;
                out.l_refl[i] = sp.l_refl_bg;
                out.n[i] = sp.n_shading;
                out.k_s[i] = sp.k_s;
                out.z_trans[i] = tr.depth;
                if (cache) {
                    cache->shade[i] = sp;
                    cache->tr_trans[i] = tr;
                    cache->tr_refl[i] = rr;
                    cache->trans_hits[i].resize(size_t(tr.n_used));
                    cache->refl_hits[i].resize(size_t(rr.n_used));
                    cache->cont_ray[i] = Ray{cam.position + gb.z[i] * d, d, p.eps_offset};
                    cache->refl_ray[i] = rray;
                }
            }
        }
    });
    return out;
}

inline RenderOutputs render(const DecomposedScene& scene, const Camera& cam,
                            const SplatParams& p = default_splat_params(), int threads = 1) {
    SceneBvh bvh(scene);
    return render(scene, bvh, cam, p, threads);
}

}  // namespace dgrt
