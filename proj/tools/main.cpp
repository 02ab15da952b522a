#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dgrt/dataset.hpp"
#include "dgrt/scene_io.hpp"
#include "dgrt/trainer.hpp"

namespace fs = std::filesystem;
using namespace dgrt;

namespace {

void echo_config(CLI::App* sub, const std::string& path) {
    fs::create_directories(fs::path(path).parent_path().empty()
                               ? "."
                               : fs::path(path).parent_path().string());
    std::ofstream out(path);
    out << sub->config_to_str(true, true);
}

int cmd_gen(uint64_t seed, int scenes, int views, int res, int boxes, int panels, double room,
            double container, const std::string& out_dir) {
    GenSpec spec;
    spec.room = room;
    spec.container = container;
    spec.boxes = boxes;
    spec.panels = panels;
    for (int k = 0; k < scenes; ++k) {
        uint64_t scene_seed = Rng(seed).split(uint64_t(k)).next_u64();
        AnalyticScene scene = generate_scene(scene_seed, spec);
        std::vector<Camera> cams = generate_trajectory(scene, views, scene_seed, res, res);
        std::vector<GroundTruthView> gts;
        gts.reserve(cams.size());
        for (const auto& cam : cams) gts.push_back(oracle_render(scene, cam));
        std::string dir = out_dir + "/scene_" + std::to_string(k);
        write_dataset_scene(dir, cams, gts);
        std::fprintf(stderr, "gen: wrote %s (%d views, %dx%d)\n", dir.c_str(), views, res, res);
    }
    return 0;
}

TrainConfig build_train_config(int iters, uint64_t seed, int threads, const LossWeights& lw,
                               bool no_trans, bool no_refl) {
    TrainConfig cfg;
    cfg.iterations = iters;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.weights = lw;
    cfg.use_trans = !no_trans;
    cfg.use_refl = !no_refl;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposed Gaussian radiance transport lab"};
    app.require_subcommand(1);

    // ---- gen ----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic glass-room dataset");
    uint64_t g_seed = 0;
    int g_scenes = 1, g_views = 48, g_res = 64, g_boxes = 3, g_panels = 1;
    double g_room = 6.0, g_container = 1.6;
    std::string g_out;
    gen->add_option("--seed", g_seed, "rng seed")->required();
    gen->add_option("--scenes", g_scenes, "number of scenes")->capture_default_str();
    gen->add_option("--views", g_views, "views per scene")->capture_default_str();
    gen->add_option("--res", g_res, "image resolution")->capture_default_str();
    gen->add_option("--boxes", g_boxes, "opaque boxes per scene")->capture_default_str();
    gen->add_option("--panels", g_panels, "glass panels (0..5)")->capture_default_str();
    gen->add_option("--room", g_room, "room side length")->capture_default_str();
    gen->add_option("--container", g_container, "display container side")->capture_default_str();
    gen->add_option("--out", g_out, "output directory")->required();
    gen->set_config("--config");

    // ---- init ---------------------------------------------------------
    auto* init = app.add_subcommand("init", "initialize a scene from a dataset");
    std::string i_dataset, i_out;
    uint64_t i_seed = 0;
    InitSpec ispec;
    init->add_option("--dataset", i_dataset, "dataset scene directory")->required();
    init->add_option("--out", i_out, "output scene file")->required();
    init->add_option("--seed", i_seed, "rng seed")->required();
    init->add_option("--points", ispec.points, "depth samples for intr/trans")
        ->capture_default_str();
    init->add_option("--grid-n", ispec.grid_n, "reflection grid resolution N")
        ->capture_default_str();
    init->add_option("--grid-k", ispec.grid_k, "reflection primitives per cell")
        ->capture_default_str();
    init->add_option("--sh-degree", ispec.sh_degree, "SH degree")->capture_default_str();
    init->set_config("--config");

    // ---- train --------------------------------------------------------
    auto* train = app.add_subcommand("train", "optimize a scene against a dataset");
    std::string t_dataset, t_scene, t_out;
    uint64_t t_seed = 0;
    int t_iters = 3000, t_threads = 4, t_ckpt = 1000;
    bool no_trans = false, no_refl = false, no_loss_trans = false, no_loss_depth = false,
         no_loss_normal = false, no_loss_geo = false, t_noise = false;
    LossWeights lw;
    train->add_option("--dataset", t_dataset, "dataset scene directory")->required();
    train->add_option("--scene", t_scene, "initial scene file")->required();
    train->add_option("--out", t_out, "output directory")->required();
    train->add_option("--seed", t_seed, "rng seed")->required();
    train->add_option("--iters", t_iters, "iterations")->capture_default_str();
    train->add_option("--threads", t_threads, "render worker threads")->capture_default_str();
    train->add_option("--checkpoint-interval", t_ckpt, "checkpoint every N iterations")
        ->capture_default_str();
    train->add_option("--lambda-l1", lw.l1, "photometric L1 weight")->capture_default_str();
    train->add_option("--lambda-ssim", lw.ssim, "photometric SSIM weight")->capture_default_str();
    train->add_option("--lambda-depth", lw.depth, "si-depth weight")->capture_default_str();
    train->add_option("--lambda-normal", lw.normal, "normal prior weight")->capture_default_str();
    train->add_option("--lambda-trans", lw.trans, "transparency bootstrap weight")
        ->capture_default_str();
    train->add_option("--lambda-nc", lw.nc, "depth-normal consistency weight")
        ->capture_default_str();
    train->add_option("--lambda-smooth", lw.smooth, "edge-aware normal smoothing weight")
        ->capture_default_str();
    train->add_flag("--no-trans", no_trans, "ablation: drop the transmission set");
    train->add_flag("--no-refl", no_refl, "ablation: drop the reflection set");
    train->add_flag("--no-loss-trans", no_loss_trans, "ablation: disable the transparency loss");
    train->add_flag("--no-loss-depth", no_loss_depth, "ablation: disable the depth prior loss");
    train->add_flag("--no-loss-normal", no_loss_normal, "ablation: disable the normal prior loss");
    train->add_flag("--no-loss-geo", no_loss_geo, "ablation: disable depth and normal priors");
    train->add_flag("--prior-noise", t_noise, "perturb the synthetic priors");
    train->set_config("--config");

    // ---- render -------------------------------------------------------
    auto* rendercmd = app.add_subcommand("render", "render all layers for a split");
    std::string r_dataset, r_scene, r_out, r_split = "test";
    int r_threads = 4;
    rendercmd->add_option("--dataset", r_dataset, "dataset scene directory")->required();
    rendercmd->add_option("--scene", r_scene, "scene file")->required();
    rendercmd->add_option("--out", r_out, "output directory")->required();
    rendercmd->add_option("--split", r_split, "test|train|all")->capture_default_str();
    rendercmd->add_option("--threads", r_threads, "render worker threads")->capture_default_str();
    rendercmd->set_config("--config");

    // ---- eval ---------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate a scene against a dataset split");
    std::string e_dataset, e_scene, e_out, e_split = "test";
    int e_threads = 4;
    eval->add_option("--dataset", e_dataset, "dataset scene directory")->required();
    eval->add_option("--scene", e_scene, "scene file")->required();
    eval->add_option("--out", e_out, "output directory")->required();
    eval->add_option("--split", e_split, "test|all")->capture_default_str();
    eval->add_option("--threads", e_threads, "render worker threads")->capture_default_str();
    eval->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            int rc = cmd_gen(g_seed, g_scenes, g_views, g_res, g_boxes, g_panels, g_room,
                             g_container, g_out);
            echo_config(gen, g_out + "/config_resolved.cfg");
            return rc;
        }
        if (init->parsed()) {
            DatasetScene ds = load_dataset_scene(i_dataset);
            DecomposedScene scene = init_scene_from_dataset(ds, ispec, i_seed);
            save_scene(i_out, scene);
            echo_config(init, i_out + ".resolved.cfg");
            std::fprintf(stderr, "init: %zu intr, %zu trans, %zu refl primitives -> %s\n",
                         scene.intr.size(), scene.trans.size(), scene.refl.size(), i_out.c_str());
            return 0;
        }
        if (train->parsed()) {
            DatasetScene ds = load_dataset_scene(t_dataset);
            DecomposedScene scene = load_scene(t_scene).scene;
            if (no_loss_trans) lw.trans = 0;
            if (no_loss_depth || no_loss_geo) lw.depth = 0;
            if (no_loss_normal || no_loss_geo) lw.normal = 0;
            TrainConfig cfg = build_train_config(t_iters, t_seed, t_threads, lw, no_trans,
                                                 no_refl);
            cfg.checkpoint_interval = t_ckpt;
            if (no_trans) scene.trans.clear();
            if (no_refl) scene.refl.clear();
            fs::create_directories(t_out);
            echo_config(train, t_out + "/config_resolved.cfg");
            TrainRunResult res = run_training(scene, ds, cfg, t_out, t_noise);
            if (!res.ok) {
                std::fprintf(stderr, "train: diverged after recovery budget; kept %s\n",
                             (t_out + "/last_good.scene.json").c_str());
                return 3;
            }
            std::fprintf(stderr, "train: %d iters, total loss %.6f -> %s\n",
                         res.iterations_done, res.last.total,
                         (t_out + "/final.scene.json").c_str());
            return 0;
        }
        if (rendercmd->parsed()) {
            DatasetScene ds = load_dataset_scene(r_dataset);
            DecomposedScene scene = load_scene(r_scene).scene;
            fs::create_directories(r_out);
            echo_config(rendercmd, r_out + "/config_resolved.cfg");
            SceneBvh bvh(scene);
            for (const auto& view : ds.views) {
                if (r_split == "test" && !view.test) continue;
                if (r_split == "train" && view.test) continue;
                RenderOutputs out =
                    render(scene, bvh, view.cam, default_splat_params(), r_threads);
                write_render_layers(out, r_out + "/" + view_stem(view.index));
            }
            return 0;
        }
        if (eval->parsed()) {
            DatasetScene ds = load_dataset_scene(e_dataset);
            DecomposedScene scene = load_scene(e_scene).scene;
            EvalReport rep = evaluate_scene(scene, ds, e_split != "all", e_threads);
            write_report(rep, e_out);
            echo_config(eval, e_out + "/config_resolved.cfg");
            std::fprintf(stderr, "eval: psnr %.3f ssim %.4f absrel %.4f iou %.4f -> %s\n",
                         rep.psnr, rep.ssim, rep.absrel, rep.mask_iou,
                         (e_out + "/report.json").c_str());
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
