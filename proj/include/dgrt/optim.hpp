#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dgrt/backward.hpp"
#include "dgrt/losses.hpp"
#include "dgrt/rng.hpp"

namespace dgrt {

struct LossWeights {
    double l1 = 0.8;
    double ssim = 0.2;
    double lpips = 0.0;  // perceptual hook, unused (no network in this artifact)
    double depth = 0.1;
    double normal = 0.05;
    double trans = 0.1;
    double nc = 0.05;
    double smooth = 0.01;
};

// Per-group learning rates, 3DGS-style. Position is additionally multiplied
// by the scene extent and log-lerped from `position` to `position_final`.
struct LearningRates {
    double position = 1.6e-4;
    double position_final = 1.6e-6;
    double log_scale = 5e-3;
    double rotation = 1e-3;
    double opacity = 0.05;
    double sh_dc = 2.5e-3;
    double sh_rest = 1.25e-4;
    double trans = 0.05;
    double spec = 0.0125;
    double f0 = 0.0;  // 0 keeps normal-incidence reflectance fixed
};

struct DensifyConfig {
    int interval = 100;
    double grad_threshold = 5e-7;   // mean |dL/dmu| that triggers clone/split
    double prune_opacity = 0.005;
    double split_scale_frac = 0.01; // world scale above frac*extent splits, below clones
    double huge_scale_frac = 0.25;  // prune primitives larger than frac*extent
    double split_factor = 1.6;
};

enum class Stage { Warmup, Joint, Freeze };

struct TrainConfig {
    int iterations = 3000;
    double warmup_frac = 1.0 / 12.0;
    double freeze_frac = 1.0 / 3.0;
    double mask_start_frac = 1.0 / 6.0;  // normal-loss cosine mask activation
    double tau_n = 0.3;
    double sigma_e = 0.1;
    int mask_refresh = 100;  // bootstrap-mask cache lifetime per view
    LossWeights weights;
    LearningRates lr;
    DensifyConfig densify;
    BootstrapConfig bootstrap;
    uint64_t seed = 0;
    int threads = 1;
    int checkpoint_interval = 1000;
    bool use_trans = true;  // ablation switches
    bool use_refl = true;

    int warmup_end() const { return int(warmup_frac * iterations); }
    int freeze_begin() const { return int((1.0 - freeze_frac) * iterations); }
    int mask_start() const { return int(mask_start_frac * iterations); }

    Stage stage_of(int iter) const {
        if (iter < warmup_end()) return Stage::Warmup;
        if (iter >= freeze_begin()) return Stage::Freeze;
        return Stage::Joint;
    }
};

// Ground-truth / prior data for one training view.
struct PriorView {
    std::vector<double> depth;
    std::vector<Vec3> normal;
    std::vector<Vec3> albedo;
};

struct TrainView {
    Camera cam;
    std::vector<Vec3> gt_rgb;
    PriorView prior;
};

// Adam moments mirror the gradient layout; densification re-indexes them.
struct TrainState {
    int iteration = 0;
    SceneGrads m, v;
    // Densification statistics: accumulated position-gradient magnitude.
    std::vector<double> grad_accum_intr, grad_accum_trans, grad_accum_refl;
    std::vector<int> denom_intr, denom_trans, denom_refl;
    double lr_scale = 1.0;  // halved on divergence recovery
    int recovery_count = 0;
    // Per-view bootstrap mask cache.
    std::vector<std::vector<uint8_t>> mask_cache;
    std::vector<int> mask_stamp;

    void init(const DecomposedScene& scene, size_t n_views) {
        m.init(scene);
        v.init(scene);
        grad_accum_intr.assign(scene.intr.size(), 0.0);
        grad_accum_trans.assign(scene.trans.size(), 0.0);
        grad_accum_refl.assign(scene.refl.size(), 0.0);
        denom_intr.assign(scene.intr.size(), 0);
        denom_trans.assign(scene.trans.size(), 0);
        denom_refl.assign(scene.refl.size(), 0);
        mask_cache.assign(n_views, {});
        mask_stamp.assign(n_views, -1);
    }
};

struct LossBreakdown {
    double l1 = 0, ssim_term = 0, depth = 0, normal = 0, trans = 0, nc = 0, smooth = 0;
    double total = 0;
    bool finite = true;
};

namespace detail {

inline double position_lr(const TrainConfig& cfg, int iter, double extent) {
    double t = cfg.iterations > 1 ? double(iter) / double(cfg.iterations - 1) : 0.0;
    double lr = std::exp((1.0 - t) * std::log(cfg.lr.position) + t * std::log(cfg.lr.position_final));
    return lr * extent;
}

// One Adam scalar update; moments stored in the transform space of `p`.
inline void adam_scalar(double& p, double g, double& m, double& v, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-15;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    double mh = m / (1.0 - std::pow(b1, t));
    double vh = v / (1.0 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
}

inline void adam_update_set(std::vector<GaussianPrimitive>& prims, const PrimGrads& g,
                            PrimGrads& m, PrimGrads& v, const TrainConfig& cfg, int iter,
                            double extent, int t) {
    double lr_pos = position_lr(cfg, iter, extent);
    for (size_t i = 0; i < prims.size(); ++i) {
        GaussianPrimitive& p = prims[i];
        for (int k = 0; k < 3; ++k)
            adam_scalar(p.mu[k], g.mu[i][k], m.mu[i][k], v.mu[i][k], lr_pos, t);
        for (int k = 0; k < 4; ++k)
            adam_scalar(p.rot[k], g.rot[i][k], m.rot[i][k], v.rot[i][k], cfg.lr.rotation, t);
        // Scales optimized in log space for positivity.
        for (int k = 0; k < 2; ++k) {
            double log_s = std::log(p.scale[k]);
            double g_log = g.scale[i][k] * p.scale[k];
            adam_scalar(log_s, g_log, m.scale[i][k], v.scale[i][k], cfg.lr.log_scale, t);
            p.scale[k] = std::max(std::exp(log_s), kScaleMin);
        }
        adam_scalar(p.opacity_logit, g.opacity_logit[i], m.opacity_logit[i], v.opacity_logit[i],
                    cfg.lr.opacity, t);
        for (size_t k = 0; k < p.sh.size(); ++k) {
            double lr = k == 0 ? cfg.lr.sh_dc : cfg.lr.sh_rest;
            for (int ch = 0; ch < 3; ++ch)
                adam_scalar(p.sh[k][ch], g.sh[i][k][ch], m.sh[i][k][ch], v.sh[i][k][ch], lr, t);
        }
        p.rot = normalized(p.rot);
    }
}

inline bool scene_finite(const DecomposedScene& s) {
    auto ok = [](const std::vector<GaussianPrimitive>& ps) {
        for (const auto& g : ps) {
            for (int k = 0; k < 3; ++k)
                if (!std::isfinite(g.mu[k])) return false;
            for (int k = 0; k < 4; ++k)
                if (!std::isfinite(g.rot[k])) return false;
            if (!std::isfinite(g.scale.x) || !std::isfinite(g.scale.y)) return false;
            if (!std::isfinite(g.opacity_logit)) return false;
            for (const auto& c : g.sh)
                for (int ch = 0; ch < 3; ++ch)
                    if (!std::isfinite(c[ch])) return false;
        }
        return true;
    };
    for (const auto& a : s.intr_attr)
        if (!std::isfinite(a.trans_logit) || !std::isfinite(a.spec_logit)) return false;
    return ok(s.intr) && ok(s.trans) && ok(s.refl);
}

}  // namespace detail

// Forward render + total objective + per-pixel upstream gradients. `view_idx`
// addresses the bootstrap-mask cache; pass -1 to recompute unconditionally.
struct ObjectiveResult {
    LossBreakdown breakdown;
    RenderOutputs outputs;
    RenderCache cache;
    PixelGrads pixel_grads{0};
    DecomposedScene render_scene;  // as rendered: secondary sets may be hidden
};

inline ObjectiveResult compute_objective(const DecomposedScene& scene, const TrainView& view,
                                         const TrainConfig& cfg, Stage stage, int iter,
                                         TrainState* state, int view_idx,
                                         const SplatParams& params = default_splat_params()) {
    ObjectiveResult res;
    // Ablation / warm-up gating happens by rendering with the secondary sets
    // hidden; a hidden set receives no gradient.
    const bool trans_on = cfg.use_trans && stage != Stage::Warmup;
    const bool refl_on = cfg.use_refl && stage != Stage::Warmup;

    res.render_scene = scene;
    DecomposedScene& render_scene = res.render_scene;
    if (!trans_on) render_scene.trans.clear();
    if (!refl_on) render_scene.refl.clear();

    SceneBvh bvh(render_scene);
    res.outputs = render(render_scene, bvh, view.cam, params, cfg.threads, &res.cache);

    const int w = view.cam.width, h = view.cam.height;
    const size_t npx = res.outputs.l_o.size();
    res.pixel_grads = PixelGrads(npx);
    LossBreakdown& lb = res.breakdown;
    const LossWeights& lw = cfg.weights;

    PhotometricResult photo = photometric_loss(res.outputs.l_o, view.gt_rgb, w, h, lw.l1, lw.ssim);
    lb.l1 = lw.l1 * photo.l1;
    lb.ssim_term = lw.ssim * (1.0 - photo.ssim);
    for (size_t i = 0; i < npx; ++i) res.pixel_grads.l_o[i] += photo.grad[i];

    std::vector<uint8_t> geo_valid(npx, 0);
    for (size_t i = 0; i < npx; ++i)
        geo_valid[i] = (res.outputs.acc_alpha[i] > 0.5 && view.prior.depth[i] > 0) ? 1 : 0;

    if (lw.depth > 0) {
        SiDepthResult sd = si_depth_loss(res.outputs.z, view.prior.depth, geo_valid);
        lb.depth = lw.depth * sd.loss;
        if (!sd.degenerate)
            for (size_t i = 0; i < npx; ++i) res.pixel_grads.z[i] += lw.depth * sd.grad[i];
    }

    if (lw.normal > 0) {
        bool apply_mask = iter >= cfg.mask_start();
        NormalLossResult nl = masked_normal_loss(res.outputs.n, view.prior.normal, apply_mask,
                                                 cfg.tau_n);
        lb.normal = lw.normal * nl.loss;
        for (size_t i = 0; i < npx; ++i) res.pixel_grads.n[i] += lw.normal * nl.grad[i];
    }

    if (lw.trans > 0 && trans_on) {
        std::vector<uint8_t> mask;
        if (state && view_idx >= 0) {
            if (state->mask_stamp[view_idx] < 0 ||
                iter - state->mask_stamp[view_idx] >= cfg.mask_refresh) {
                std::vector<double> ta(npx, 0.0);
                for (size_t i = 0; i < npx; ++i) ta[i] = res.cache.tr_trans[i].alpha;
                state->mask_cache[view_idx] =
                    bootstrap_mask(res.outputs.z, res.outputs.z_trans, ta, view.prior.albedo,
                                   scene_extent(scene), cfg.bootstrap);
                state->mask_stamp[view_idx] = iter;
            }
            mask = state->mask_cache[view_idx];
        } else {
            std::vector<double> ta(npx, 0.0);
            for (size_t i = 0; i < npx; ++i) ta[i] = res.cache.tr_trans[i].alpha;
            mask = bootstrap_mask(res.outputs.z, res.outputs.z_trans, ta, view.prior.albedo,
                                  scene_extent(scene), cfg.bootstrap);
        }
        TransparencyLossResult tl = transparency_loss(res.outputs.t, mask, lw.trans);
        lb.trans = tl.loss;
        for (size_t i = 0; i < npx; ++i) res.pixel_grads.t[i] += tl.grad[i];
    }

    std::vector<double> ew;
    if (lw.nc > 0 || lw.smooth > 0) ew = edge_weights(view.gt_rgb, w, h, cfg.sigma_e);

    if (lw.nc > 0) {
        ConsistencyResult nc = depth_normal_consistency(res.outputs.z, res.outputs.n,
                                                        res.outputs.acc_alpha, view.cam, ew);
        lb.nc = lw.nc * nc.loss;
        for (size_t i = 0; i < npx; ++i) {
            res.pixel_grads.z[i] += lw.nc * nc.grad_z[i];
            res.pixel_grads.n[i] += lw.nc * nc.grad_n[i];
        }
    }

    if (lw.smooth > 0) {
        SmoothnessResult sm = normal_smoothness(res.outputs.n, ew, w, h);
        lb.smooth = lw.smooth * sm.loss;
        for (size_t i = 0; i < npx; ++i) res.pixel_grads.n[i] += lw.smooth * sm.grad_n[i];
    }

    lb.total = lb.l1 + lb.ssim_term + lb.depth + lb.normal + lb.trans + lb.nc + lb.smooth;
    lb.finite = std::isfinite(lb.total);
    return res;
}

struct StepResult {
    LossBreakdown breakdown;
    bool applied = false;     // false when the recovery rule rejected the step
    bool diverged = false;    // recovery budget exhausted
};

// One optimization step on a single view: render, objective, reverse pass,
// Adam update per stage-active group, then constraint projection
// (renormalized quaternions, floored scales). Non-finite losses reject the
// step, halve the learning-rate scale, and leave scene/state untouched.
inline StepResult train_step(DecomposedScene& scene, TrainState& state, const TrainView& view,
                             int view_idx, const TrainConfig& cfg,
                             const SplatParams& params = default_splat_params()) {
    StepResult out;
    Stage stage = cfg.stage_of(state.iteration);

    ObjectiveResult obj = compute_objective(scene, view, cfg, stage, state.iteration, &state,
                                            view_idx, params);
    out.breakdown = obj.breakdown;
    if (!obj.breakdown.finite) {
        state.lr_scale *= 0.5;
        state.recovery_count += 1;
        out.diverged = state.recovery_count > 5;
        state.iteration += 1;
        return out;
    }

    // Reverse pass against the scene actually rendered (hidden sets get no
    // gradient; their live vectors stay untouched).
    const bool trans_on = cfg.use_trans && stage != Stage::Warmup;
    const bool refl_on = cfg.use_refl && stage != Stage::Warmup;
    SceneGrads grads = render_backward(obj.render_scene, view.cam, obj.cache, obj.pixel_grads,
                                       params, cfg.threads);

    // Densification statistics before stage gating.
    auto accumulate = [](const PrimGrads& g, std::vector<double>& acc, std::vector<int>& den) {
        for (size_t i = 0; i < g.mu.size() && i < acc.size(); ++i) {
            double n = norm(g.mu[i]);
            if (n > 0) {
                acc[i] += n;
                den[i] += 1;
            }
        }
    };
    accumulate(grads.intr, state.grad_accum_intr, state.denom_intr);
    if (trans_on) accumulate(grads.trans, state.grad_accum_trans, state.denom_trans);
    if (refl_on) accumulate(grads.refl, state.grad_accum_refl, state.denom_refl);

    double extent = scene_extent(scene);
    int t = state.iteration + 1;
    TrainConfig scaled = cfg;
    scaled.lr.position *= state.lr_scale;
    scaled.lr.position_final *= state.lr_scale;
    scaled.lr.log_scale *= state.lr_scale;
    scaled.lr.rotation *= state.lr_scale;
    scaled.lr.opacity *= state.lr_scale;
    scaled.lr.sh_dc *= state.lr_scale;
    scaled.lr.sh_rest *= state.lr_scale;
    scaled.lr.trans *= state.lr_scale;
    scaled.lr.spec *= state.lr_scale;

    bool update_intr = stage != Stage::Freeze;
    bool update_trans = trans_on;
    bool update_refl = refl_on;

    DecomposedScene snapshot = scene;

    if (update_intr) {
        detail::adam_update_set(scene.intr, grads.intr, state.m.intr, state.v.intr, scaled,
                                state.iteration, extent, t);
        for (size_t i = 0; i < scene.intr_attr.size(); ++i) {
            detail::adam_scalar(scene.intr_attr[i].trans_logit, grads.trans_logit[i],
                                state.m.trans_logit[i], state.v.trans_logit[i], scaled.lr.trans, t);
            detail::adam_scalar(scene.intr_attr[i].spec_logit, grads.spec_logit[i],
                                state.m.spec_logit[i], state.v.spec_logit[i], scaled.lr.spec, t);
        }
    }
    if (update_trans)
        detail::adam_update_set(scene.trans, grads.trans, state.m.trans, state.v.trans, scaled,
                                state.iteration, extent, t);
    if (update_refl)
        detail::adam_update_set(scene.refl, grads.refl, state.m.refl, state.v.refl, scaled,
                                state.iteration, extent, t);
    if (cfg.lr.f0 > 0) {
        double mdummy = state.m.f0, vdummy = state.v.f0;
        detail::adam_scalar(scene.f0, grads.f0, mdummy, vdummy, scaled.lr.f0 * state.lr_scale, t);
        state.m.f0 = mdummy;
        state.v.f0 = vdummy;
        scene.f0 = std::clamp(scene.f0, 0.0, 1.0);
    }

    if (!detail::scene_finite(scene)) {
        scene = snapshot;
        state.lr_scale *= 0.5;
        state.recovery_count += 1;
        out.diverged = state.recovery_count > 5;
        state.iteration += 1;
        return out;
    }

    out.applied = true;
    state.iteration += 1;
    return out;
}

}  // namespace dgrt
