#pragma once

#include <vector>

#include "dgrt/bvh.hpp"
#include "dgrt/splat.hpp"
#include "dgrt/util.hpp"

namespace dgrt {

// Per-pixel forward state retained for the backward pass.
struct RasterCache {
    std::vector<std::vector<SplatHit>> hits;  // sorted, per pixel
    std::vector<PixelComposite> comp;
};

inline GBuffer rasterize_interface(const DecomposedScene& scene, const Camera& cam,
                                   const GaussianBvh& bvh,
                                   const SplatParams& p = default_splat_params(), int threads = 1,
                                   RasterCache* cache = nullptr) {
    GBuffer gb(cam.width, cam.height);
    if (cache) {
        cache->hits.assign(gb.z.size(), {});
        cache->comp.assign(gb.z.size(), {});
    }
    parallel_bands(cam.height, threads, [&](int, int y0, int y1) {
        std::vector<SplatHit> hits;
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                Ray ray{cam.position, cam.pixel_dir(x, y), 0.0};
                hits.clear();
                bvh.gather(ray, scene.intr, hits, p);
                sort_hits(hits);
                PixelComposite c = composite_pixel(hits, scene, ray.dir, p);
                size_t i = gb.idx(x, y);
                gb.l_intr[i] = c.l_intr;
                gb.z[i] = c.z;
                gb.n[i] = renormalized_or_zero(c.n_raw);
                gb.t[i] = c.t;
                gb.s[i] = c.s;
                gb.acc_alpha[i] = c.acc_alpha;
                if (cache) {
                    hits.resize(c.n_used);  // drop hits past the early exit
                    cache->hits[i] = hits;
                    cache->comp[i] = c;
                }
            }
        }
    });
    return gb;
}

inline GBuffer rasterize_interface(const DecomposedScene& scene, const Camera& cam,
                                   const SplatParams& p = default_splat_params(),
                                   int threads = 1) {
    GaussianBvh bvh(scene.intr);
    return rasterize_interface(scene, cam, bvh, p, threads);
}

}  // namespace dgrt
