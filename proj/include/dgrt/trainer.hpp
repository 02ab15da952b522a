#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dgrt/dataset.hpp"
#include "dgrt/densify.hpp"
#include "dgrt/metrics.hpp"
#include "dgrt/optim.hpp"
#include "dgrt/scene_io.hpp"

namespace dgrt {

// ---------------------------------------------------------------------------
// Scene initialization from the dataset (ground-truth depth sampling for the
// interface/transmission sets, a jittered grid for the reflection set).

struct InitSpec {
    int points = 2000;
    int grid_n = 8;
    int grid_k = 5;
    int sh_degree = 2;
    double f0 = 0.04;
    Vec3 background{0, 0, 0};
};

inline Quat quat_from_normal(Vec3 n) {
    Vec3 z{0, 0, 1};
    double c = dot(z, n);
    if (c > 1.0 - 1e-12) return Quat{1, 0, 0, 0};
    if (c < -1.0 + 1e-12) return Quat{0, 1, 0, 0};  // 180 deg about x
    Vec3 axis = normalized(cross(z, n));
    double half = 0.5 * std::acos(std::clamp(c, -1.0, 1.0));
    double s = std::sin(half);
    return normalized(Quat{std::cos(half), axis.x * s, axis.y * s, axis.z * s});
}

inline DecomposedScene init_scene_from_dataset(const DatasetScene& ds, const InitSpec& spec,
                                               uint64_t seed) {
    auto train = ds.train_indices();
    if (train.empty()) throw std::runtime_error("init: dataset has no train views");

    Rng rng(seed);
    Rng sample_rng = rng.split(10);
    struct Sample {
        Vec3 p, n, rgb;
    };
    std::vector<Sample> samples;
    int guard = 0;
    while (int(samples.size()) < spec.points && guard < spec.points * 50) {
        ++guard;
        const DatasetView& v = ds.views[train[sample_rng.uniform_int(int(train.size()))]];
        int x = sample_rng.uniform_int(v.cam.width);
        int y = sample_rng.uniform_int(v.cam.height);
        size_t i = size_t(y) * v.cam.width + x;
        if (!(v.depth[i] > 0)) continue;
        Vec3 dir = v.cam.pixel_dir(x, y);
        samples.push_back({v.cam.position + v.depth[i] * dir, v.normal[i], v.rgb[i]});
    }
    if (samples.empty()) throw std::runtime_error("init: no valid depth samples");

    // Mean distance to the 3 nearest neighbors sets the initial footprint.
    std::vector<double> nn(samples.size(), 0.0);
    for (size_t i = 0; i < samples.size(); ++i) {
        double best[3] = {1e30, 1e30, 1e30};
        for (size_t j = 0; j < samples.size(); ++j) {
            if (i == j) continue;
            double d = norm(samples[i].p - samples[j].p);
            if (d < best[0]) {
                best[2] = best[1];
                best[1] = best[0];
                best[0] = d;
            } else if (d < best[1]) {
                best[2] = best[1];
                best[1] = d;
            } else if (d < best[2]) {
                best[2] = d;
            }
        }
        nn[i] = (best[0] + best[1] + best[2]) / 3.0;
    }

    DecomposedScene scene;
    scene.sh_degree = spec.sh_degree;
    scene.f0 = spec.f0;
    scene.background = spec.background;
    int nc = scene.sh_coeff_count();
    const double y00 = sh::kC0;

    Rng jitter_rng = rng.split(11);
    for (size_t i = 0; i < samples.size(); ++i) {
        GaussianPrimitive g;
        g.mu = samples[i].p;
        g.rot = quat_from_normal(norm(samples[i].n) > 0.5 ? normalized(samples[i].n)
                                                          : Vec3{0, 0, 1});
        double s = std::clamp(nn[i], 1e-3, 1.0);
        g.scale = {s, s};
        g.opacity_logit = logit(0.1);
        g.sh.assign(nc, Vec3{});
        g.sh[0] = (samples[i].rgb - Vec3{0.5, 0.5, 0.5}) / y00;
        scene.intr.push_back(g);
        scene.intr_attr.push_back({logit(0.1), logit(0.1)});

        GaussianPrimitive t = g;
        double js = 0.02 * s + 0.01;
        t.mu += Vec3{jitter_rng.normal(), jitter_rng.normal(), jitter_rng.normal()} * js;
        scene.trans.push_back(t);
    }

    // Reflection set: K primitives per cell of an N^3 grid over the bounds.
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    for (const auto& smp : samples) {
        lo = cwise_min(lo, smp.p);
        hi = cwise_max(hi, smp.p);
    }
    Vec3 span = hi - lo;
    Rng grid_rng = rng.split(12);
    double cell = std::max({span.x, span.y, span.z}) / spec.grid_n;
    for (int cx = 0; cx < spec.grid_n; ++cx)
        for (int cy = 0; cy < spec.grid_n; ++cy)
            for (int cz = 0; cz < spec.grid_n; ++cz)
                for (int k = 0; k < spec.grid_k; ++k) {
                    GaussianPrimitive g;
                    g.mu = lo + Vec3{(cx + grid_rng.uniform()) * span.x / spec.grid_n,
                                     (cy + grid_rng.uniform()) * span.y / spec.grid_n,
                                     (cz + grid_rng.uniform()) * span.z / spec.grid_n};
                    g.rot = Quat{grid_rng.normal(), grid_rng.normal(), grid_rng.normal(),
                                 grid_rng.normal()};
                    g.rot = normalized(g.rot);
                    double s = cell * grid_rng.uniform(0.3, 0.7);
                    g.scale = {s, s};
                    g.opacity_logit = logit(0.1);
                    g.sh.assign(nc, Vec3{});
                    scene.refl.push_back(g);
                }
    return scene;
}

// ---------------------------------------------------------------------------
// Training loop.

struct TrainRunResult {
    bool ok = true;
    int iterations_done = 0;
    LossBreakdown first, last;
};

inline TrainRunResult run_training(DecomposedScene& scene, const DatasetScene& ds,
                                   const TrainConfig& cfg, const std::string& out_dir,
                                   bool prior_noise = false, double noise_depth_rel = 0.01,
                                   double noise_normal_deg = 5.0) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    auto train_idx = ds.train_indices();
    std::vector<TrainView> views;
    views.reserve(train_idx.size());
    for (int idx : train_idx)
        views.push_back(make_train_view(ds.views[idx], prior_noise, noise_depth_rel,
                                        noise_normal_deg, cfg.seed));

    TrainState state;
    state.init(scene, views.size());
    Rng order_rng = Rng(cfg.seed).split(20);
    Rng densify_rng = Rng(cfg.seed).split(21);

    std::vector<int> order(views.size());
    auto reshuffle = [&] {
        for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.uniform_int(int(i))]);
    };
    reshuffle();

    std::ofstream csv(out_dir + "/train_log.csv");
    csv << "iter,l1,ssim,depth,normal,trans,nc,total\n";

    TrainRunResult result;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        size_t slot = size_t(iter) % views.size();
        if (iter > 0 && slot == 0) reshuffle();
        int vi = order[slot];

        StepResult step = train_step(scene, state, views[vi], vi, cfg);
        char row[256];
        std::snprintf(row, sizeof(row), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", iter,
                      step.breakdown.l1, step.breakdown.ssim_term, step.breakdown.depth,
                      step.breakdown.normal, step.breakdown.trans, step.breakdown.nc,
                      step.breakdown.total);
        csv << row;
        if (iter == 0) result.first = step.breakdown;
        result.last = step.breakdown;
        result.iterations_done = iter + 1;

        if (step.diverged) {
            save_scene(out_dir + "/last_good.scene.json", scene, state.iteration);
            result.ok = false;
            return result;
        }

        bool joint = cfg.stage_of(state.iteration) == Stage::Joint &&
                     state.iteration > cfg.warmup_end();
        if (joint && cfg.densify.interval > 0 && state.iteration % cfg.densify.interval == 0)
            densify_and_prune(scene, state, cfg.densify, densify_rng);

        if (cfg.checkpoint_interval > 0 && state.iteration % cfg.checkpoint_interval == 0)
            save_scene(out_dir + "/checkpoint_" + std::to_string(state.iteration) + ".scene.json",
                       scene, state.iteration);
    }
    save_scene(out_dir + "/final.scene.json", scene, cfg.iterations);
    return result;
}

// ---------------------------------------------------------------------------
// Evaluation over a dataset split.

inline EvalReport evaluate_scene(const DecomposedScene& scene, const DatasetScene& ds,
                                 bool test_split_only, int threads = 1) {
    EvalReport rep;
    SceneBvh bvh(scene);
    int n_glass_views = 0;
    for (const auto& view : ds.views) {
        if (test_split_only && !view.test) continue;
        RenderOutputs out = render(scene, bvh, view.cam, default_splat_params(), threads);
        size_t npx = out.l_o.size();

        std::vector<Vec3> pred(npx), gt(npx);
        for (size_t i = 0; i < npx; ++i) {
            pred[i] = {clamp01(out.l_o[i].x), clamp01(out.l_o[i].y), clamp01(out.l_o[i].z)};
            gt[i] = {clamp01(view.rgb[i].x), clamp01(view.rgb[i].y), clamp01(view.rgb[i].z)};
        }

        ViewEval ve;
        ve.index = view.index;
        ve.psnr = psnr(pred, gt);
        ve.ssim = ssim_mean(pred, gt, view.cam.width, view.cam.height);

        std::vector<uint8_t> valid(npx, 0);
        for (size_t i = 0; i < npx; ++i)
            valid[i] = (view.depth[i] > 0 && out.acc_alpha[i] > 0.5) ? 1 : 0;
        DepthMetrics dm = depth_metrics(out.z, view.depth, valid);
        ve.absrel = dm.absrel;
        ve.rmse = dm.rmse;
        ve.delta125 = dm.delta125;

        // Camera-space normals on both sides (angles are rotation-invariant,
        // the shared frame just pins the convention).
        std::vector<Vec3> n_cam(npx), gt_cam(npx);
        std::vector<uint8_t> nvalid(npx, 0);
        for (size_t i = 0; i < npx; ++i) {
            n_cam[i] = view.cam.orientation * out.n[i];
            gt_cam[i] = view.cam.orientation * view.normal[i];
            nvalid[i] = (valid[i] && norm(out.n[i]) > 0.5 && norm(view.normal[i]) > 0.5) ? 1 : 0;
        }
        NormalMetrics nm = normal_metrics(n_cam, gt_cam, nvalid);
        ve.mae_deg = nm.mae_deg;
        ve.acc11_25 = nm.acc11_25;
        ve.acc22_5 = nm.acc22_5;

        std::vector<uint8_t> pred_mask(npx, 0);
        for (size_t i = 0; i < npx; ++i) pred_mask[i] = out.t[i] >= 0.5 ? 1 : 0;
        ve.mask_iou = mask_iou(pred_mask, view.mask);

        std::vector<uint8_t> glass_valid(npx, 0);
        int n_glass = 0;
        for (size_t i = 0; i < npx; ++i) {
            glass_valid[i] = (valid[i] && view.mask[i]) ? 1 : 0;
            n_glass += glass_valid[i];
        }
        if (n_glass > 0) {
            ve.glass_absrel = depth_metrics(out.z, view.depth, glass_valid).absrel;
            rep.glass_absrel = std::max(rep.glass_absrel, 0.0) + ve.glass_absrel;
            ++n_glass_views;
        }

        rep.psnr += ve.psnr;
        rep.ssim += ve.ssim;
        rep.absrel += ve.absrel;
        rep.rmse += ve.rmse;
        rep.delta125 += ve.delta125;
        rep.mae_deg += ve.mae_deg;
        rep.acc11_25 += ve.acc11_25;
        rep.acc22_5 += ve.acc22_5;
        rep.mask_iou += ve.mask_iou;
        rep.views.push_back(ve);
    }
    double n = double(rep.views.size());
    if (n > 0) {
        rep.psnr /= n;
        rep.ssim /= n;
        rep.absrel /= n;
        rep.rmse /= n;
        rep.delta125 /= n;
        rep.mae_deg /= n;
        rep.acc11_25 /= n;
        rep.acc22_5 /= n;
        rep.mask_iou /= n;
        if (n_glass_views > 0) rep.glass_absrel /= n_glass_views;
    }
    return rep;
}

inline void write_report(const EvalReport& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json j;
    j["psnr"] = rep.psnr;
    j["ssim"] = rep.ssim;
    j["absrel"] = rep.absrel;
    j["rmse"] = rep.rmse;
    j["delta125"] = rep.delta125;
    j["mae_deg"] = rep.mae_deg;
    j["acc11_25"] = rep.acc11_25;
    j["acc22_5"] = rep.acc22_5;
    j["mask_iou"] = rep.mask_iou;
    j["glass_absrel"] = rep.glass_absrel;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& v : rep.views) {
        nlohmann::json r;
        r["view"] = v.index;
        r["psnr"] = v.psnr;
        r["ssim"] = v.ssim;
        r["absrel"] = v.absrel;
        r["rmse"] = v.rmse;
        r["delta125"] = v.delta125;
        r["mae_deg"] = v.mae_deg;
        r["acc11_25"] = v.acc11_25;
        r["acc22_5"] = v.acc22_5;
        r["mask_iou"] = v.mask_iou;
        r["glass_absrel"] = v.glass_absrel;
        rows.push_back(r);
    }
    j["per_view"] = rows;
    std::ofstream(dir + "/report.json") << j.dump(1) << "\n";

    std::ofstream txt(dir + "/summary.txt");
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "views %zu\npsnr %.3f dB\nssim %.4f\nabsrel %.4f\nrmse %.4f\n"
                  "delta<1.25 %.2f %%\nnormal mae %.3f deg\nacc@11.25 %.2f %%\n"
                  "acc@22.5 %.2f %%\nmask iou %.4f\nglass absrel %.4f\n",
                  rep.views.size(), rep.psnr, rep.ssim, rep.absrel, rep.rmse, rep.delta125,
                  rep.mae_deg, rep.acc11_25, rep.acc22_5, rep.mask_iou, rep.glass_absrel);
    txt << buf;
}

// Writes every render layer as PFM plus a PNG preview, names
// <stem>_<layer>.<ext>.
inline void write_render_layers(const RenderOutputs& out, const std::string& stem) {
    int w = out.width, h = out.height;
    auto minmax = [](const std::vector<double>& v) {
        double lo = 1e30, hi = -1e30;
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (!(hi > lo)) hi = lo + 1;
        return std::pair<double, double>(lo, hi);
    };
    write_pfm(stem + "_l_o.pfm", out.l_o, w, h);
    write_png_radiance(stem + "_l_o.png", out.l_o, w, h);
    write_pfm(stem + "_l_intr.pfm", out.l_intr, w, h);
    write_png_radiance(stem + "_l_intr.png", out.l_intr, w, h);
    write_pfm(stem + "_l_trans.pfm", out.l_trans, w, h);
    write_png_radiance(stem + "_l_trans.png", out.l_trans, w, h);
    write_pfm(stem + "_l_refl.pfm", out.l_refl, w, h);
    write_png_radiance(stem + "_l_refl.png", out.l_refl, w, h);
    write_pfm(stem + "_n.pfm", out.n, w, h);
    write_png_normals(stem + "_n.png", out.n, w, h);
    auto [zlo, zhi] = minmax(out.z);
    write_pfm(stem + "_z.pfm", out.z, w, h, 1);
    write_png_scalar(stem + "_z.png", out.z, w, h, zlo, zhi);
    auto [tlo, thi] = minmax(out.z_trans);
    write_pfm(stem + "_z_trans.pfm", out.z_trans, w, h, 1);
    write_png_scalar(stem + "_z_trans.png", out.z_trans, w, h, tlo, thi);
    write_pfm(stem + "_t.pfm", out.t, w, h, 1);
    write_png_scalar(stem + "_t.png", out.t, w, h, 0, 1);
    write_pfm(stem + "_s.pfm", out.s, w, h, 1);
    write_png_scalar(stem + "_s.png", out.s, w, h, 0, 1);
    write_pfm(stem + "_k_s.pfm", out.k_s, w, h, 1);
    write_png_scalar(stem + "_k_s.png", out.k_s, w, h, 0, 1);
    write_pfm(stem + "_acc_alpha.pfm", out.acc_alpha, w, h, 1);
    write_png_scalar(stem + "_acc_alpha.png", out.acc_alpha, w, h, 0, 1);
}

}  // namespace dgrt
