#pragma once

#include <vector>

#include "dgrt/optim.hpp"
#include "dgrt/rng.hpp"

namespace dgrt {

namespace densify_detail {

struct SetRefs {
    std::vector<GaussianPrimitive>& prims;
    PrimGrads& m;
    PrimGrads& v;
    std::vector<double>& accum;
    std::vector<int>& denom;
    std::vector<InterfaceAttributes>* attrs;  // interface set only
    std::vector<double>* m_tl;
    std::vector<double>* v_tl;
    std::vector<double>* m_sl;
    std::vector<double>* v_sl;
};

// Clone low-magnitude, split high-magnitude primitives over the gradient
// threshold, then prune transparent or oversized ones. Children stay in the
// parent's set; added moments start at zero, survivors keep theirs.
inline void densify_set(SetRefs r, const DensifyConfig& cfg, double extent, Rng& rng,
                        int ncoeff) {
    size_t n0 = r.prims.size();
    std::vector<GaussianPrimitive> out;
    std::vector<InterfaceAttributes> out_attrs;
    std::vector<int> src;  // moment source: old index, or -1 for fresh

    auto emit = [&](const GaussianPrimitive& g, int moment_src, size_t attr_src) {
        out.push_back(g);
        src.push_back(moment_src);
        if (r.attrs) out_attrs.push_back((*r.attrs)[attr_src]);
    };

    for (size_t i = 0; i < n0; ++i) {
        const GaussianPrimitive& g = r.prims[i];
        double o = sigmoid(g.opacity_logit);
        double world_scale = std::max(g.scale.x, g.scale.y);
        if (o < cfg.prune_opacity || world_scale > cfg.huge_scale_frac * extent) continue;

        double avg = r.denom[i] > 0 ? r.accum[i] / double(r.denom[i]) : 0.0;
        if (avg <= cfg.grad_threshold) {
            emit(g, int(i), i);
            continue;
        }
        if (world_scale <= cfg.split_scale_frac * extent) {
            // Clone: keep the original plus an identical copy.
            emit(g, int(i), i);
            emit(g, -1, i);
        } else {
            // Split: two children along the major tangent axis, scales
            // reduced by the split factor; the parent is retired.
            Frame f = quat_frame(g.rot);
            Vec3 axis = g.scale.x >= g.scale.y ? f.t_u : f.t_v;
            double sigma = std::max(g.scale.x, g.scale.y);
            for (int c = 0; c < 2; ++c) {
                GaussianPrimitive child = g;
                child.mu = g.mu + rng.normal() * sigma * axis;
                child.scale.x = std::max(g.scale.x / cfg.split_factor, kScaleMin);
                child.scale.y = std::max(g.scale.y / cfg.split_factor, kScaleMin);
                emit(child, -1, i);
            }
        }
    }

    PrimGrads new_m, new_v;
    new_m.init(out.size(), ncoeff);
    new_v.init(out.size(), ncoeff);
    std::vector<double> nm_tl(out.size(), 0.0), nv_tl(out.size(), 0.0), nm_sl(out.size(), 0.0),
        nv_sl(out.size(), 0.0);
    for (size_t i = 0; i < out.size(); ++i) {
        if (src[i] < 0) continue;
        size_t j = size_t(src[i]);
        new_m.mu[i] = r.m.mu[j];
        new_v.mu[i] = r.v.mu[j];
        new_m.rot[i] = r.m.rot[j];
        new_v.rot[i] = r.v.rot[j];
        new_m.scale[i] = r.m.scale[j];
        new_v.scale[i] = r.v.scale[j];
        new_m.opacity_logit[i] = r.m.opacity_logit[j];
        new_v.opacity_logit[i] = r.v.opacity_logit[j];
        new_m.sh[i] = r.m.sh[j];
        new_v.sh[i] = r.v.sh[j];
        if (r.m_tl) {
            nm_tl[i] = (*r.m_tl)[j];
            nv_tl[i] = (*r.v_tl)[j];
            nm_sl[i] = (*r.m_sl)[j];
            nv_sl[i] = (*r.v_sl)[j];
        }
    }
    r.prims = std::move(out);
    r.m = std::move(new_m);
    r.v = std::move(new_v);
    if (r.attrs) {
        *r.attrs = std::move(out_attrs);
        *r.m_tl = std::move(nm_tl);
        *r.v_tl = std::move(nv_tl);
        *r.m_sl = std::move(nm_sl);
        *r.v_sl = std::move(nv_sl);
    }
    r.accum.assign(r.prims.size(), 0.0);
    r.denom.assign(r.prims.size(), 0);
}

}  // namespace densify_detail

inline void densify_and_prune(DecomposedScene& scene, TrainState& state,
                              const DensifyConfig& cfg, Rng& rng) {
    double extent = scene_extent(scene);
    int nc = scene.sh_coeff_count();
    using densify_detail::SetRefs;
    densify_detail::densify_set(
        SetRefs{scene.intr, state.m.intr, state.v.intr, state.grad_accum_intr, state.denom_intr,
                &scene.intr_attr, &state.m.trans_logit, &state.v.trans_logit,
                &state.m.spec_logit, &state.v.spec_logit},
        cfg, extent, rng, nc);
    densify_detail::densify_set(SetRefs{scene.trans, state.m.trans, state.v.trans,
                                        state.grad_accum_trans, state.denom_trans, nullptr,
                                        nullptr, nullptr, nullptr, nullptr},
                                cfg, extent, rng, nc);
    densify_detail::densify_set(SetRefs{scene.refl, state.m.refl, state.v.refl,
                                        state.grad_accum_refl, state.denom_refl, nullptr,
                                        nullptr, nullptr, nullptr, nullptr},
                                cfg, extent, rng, nc);
}

}  // namespace dgrt
