#pragma once

#include <vector>

#include "dgrt/bvh.hpp"

namespace dgrt {

// Composited radiance / alpha / expected hit distance along one ray.
struct TraceResult {
    Vec3 radiance{};
    double alpha = 0;
    double depth = 0;   // sum of w_i * depth_i, 0 when nothing is hit
    double t_final = 1;
    int n_used = 0;     // hits composited before early exit
};

// Composite already-sorted hits of `prims` along the ray. `depth_offset` is
// added to each hit's ray parameter before depth compositing (used by the
// continuation trace to report camera-relative distance).
inline TraceResult composite_trace(const std::vector<SplatHit>& hits,
                                   const std::vector<GaussianPrimitive>& prims, Vec3 sh_dir,
                                   int sh_degree, double depth_offset = 0.0,
                                   const SplatParams& p = default_splat_params()) {
    TraceResult out;
    double T = 1.0;
    for (const SplatHit& h : hits) {
        if (T < p.t_stop) break;
        double w = T * h.alpha;
        out.radiance += w * eval_sh(prims[h.prim_index].sh, sh_dir, sh_degree);
        out.alpha += w;
        out.depth += w * (h.depth + depth_offset);
        T *= (1.0 - h.alpha);
        ++out.n_used;
    }
    out.t_final = T;
    return out;
}

inline TraceResult trace(const GaussianBvh& bvh, const std::vector<GaussianPrimitive>& prims,
                         const Ray& ray, Vec3 sh_dir, int sh_degree,
                         const SplatParams& p = default_splat_params(),
                         std::vector<SplatHit>* hits_out = nullptr) {
    std::vector<SplatHit> local;
    std::vector<SplatHit>& hits = hits_out ? *hits_out : local;
    hits.clear();
    bvh.gather(ray, prims, hits, p);
    sort_hits(hits);
    return composite_trace(hits, prims, sh_dir, sh_degree, 0.0, p);
}

// Continue a primary ray from the interface point x = origin + z*dir into the
// transmission set. Hit depths are reported as distance from the camera
// origin (z + local distance) so the depth gap z_trans - z_intr is direct.
inline TraceResult trace_continuation(double z, const Ray& primary, const GaussianBvh& bvh,
                                      const std::vector<GaussianPrimitive>& prims, int sh_degree,
                                      const SplatParams& p = default_splat_params(),
                                      std::vector<SplatHit>* hits_out = nullptr) {
    Ray cont{primary.origin + z * primary.dir, primary.dir, p.eps_offset};
    std::vector<SplatHit> local;
    std::vector<SplatHit>& hits = hits_out ? *hits_out : local;
    hits.clear();
    bvh.gather(cont, prims, hits, p);
    sort_hits(hits);
    return composite_trace(hits, prims, cont.dir, sh_degree, z, p);
}

}  // namespace dgrt
