#include <gtest/gtest.h>

#include "dgrt/backward.hpp"
#include "dgrt/optim.hpp"
#include "test_helpers.hpp"

using namespace dgrt;
using namespace dgrt::testhelp;

namespace {

// A 10-primitive three-set scene in front of a 16x16 camera. A large backing
// splat keeps every pixel covered so no coverage threshold flips under the
// finite-difference perturbations.
struct GradFixture {
    DecomposedScene scene;
    Camera cam;
    TrainView view;
    TrainConfig cfg;
    TrainState state;
    SplatParams params;

    GradFixture() {
        Rng rng(42);
        scene.sh_degree = 2;
        scene.background = {0.15, 0.1, 0.2};
        scene.f0 = 0.04;

        // Backing wall: fronto-parallel to the camera, covers the frustum.
        GaussianPrimitive wall;
        wall.mu = {0, 1.4, 0};
        double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
        wall.rot = normalized(Quat{c, -s, 0, 0});  // normal toward -y
        wall.scale = {5.0, 5.0};
        wall.opacity_logit = 2.2;
        wall.sh.assign(9, Vec3{});
        wall.sh[0] = {0.25, 0.1, -0.1};
        scene.intr.push_back(wall);
        scene.intr_attr.push_back({logit(0.35), logit(0.2)});

        for (int i = 0; i < 3; ++i) {
            GaussianPrimitive g = random_primitive(rng, {0, 0, 0}, 0.45, 0.35, 0.8, 2);
            // keep normals loosely facing the camera (placed at -y)
            g.rot = normalized(Quat{1.0, 0.35 * rng.normal(), 0.35 * rng.normal(),
                                    0.35 * rng.normal()});
            scene.intr.push_back(g);
            scene.intr_attr.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 0.0)});
        }
        for (int i = 0; i < 3; ++i)
            scene.trans.push_back(random_primitive(rng, {0, 0.9, 0}, 0.4, 0.35, 0.9, 2));
        for (int i = 0; i < 3; ++i)
            scene.refl.push_back(random_primitive(rng, {0, -2.2, 0.3}, 0.8, 0.8, 1.8, 2));

        cam = look_at_camera({0.15, -2.6, 0.3}, {0, 0, 0}, {0, 0, 1}, 16, 16, 19.0);

        size_t npx = 256;
        view.cam = cam;
        view.gt_rgb.resize(npx);
        view.prior.depth.resize(npx);
        view.prior.normal.resize(npx);
        view.prior.albedo.resize(npx);
        Rng prng(99);
        for (size_t i = 0; i < npx; ++i) {
            view.gt_rgb[i] = {prng.uniform(), prng.uniform(), prng.uniform()};
            view.prior.depth[i] = prng.uniform(2.0, 3.4);
            view.prior.normal[i] =
                normalized(Vec3{0.3 * prng.normal(), -1.0, 0.3 * prng.normal()});
            view.prior.albedo[i] = {prng.uniform(), prng.uniform(), prng.uniform()};
        }

        cfg.iterations = 3000;
        cfg.threads = 1;
        cfg.lr.f0 = 1e-4;  // exercise the f0 gradient path
        state.init(scene, 1);
    }

    int iter() const { return 1000; }  // joint stage, cosine mask active

    double loss() {
        ObjectiveResult obj =
            compute_objective(scene, view, cfg, Stage::Joint, iter(), &state, 0, params);
        return obj.breakdown.total;
    }

    SceneGrads analytic() {
        ObjectiveResult obj =
            compute_objective(scene, view, cfg, Stage::Joint, iter(), &state, 0, params);
        return render_backward(obj.render_scene, cam, obj.cache, obj.pixel_grads, params,
                               cfg.threads);
    }
};

void expect_grad(double analytic, double fd, const std::string& what) {
    GradCheck gc{analytic, fd};
    EXPECT_TRUE(gc.ok()) << what << ": analytic=" << analytic << " fd=" << fd;
}

}  // namespace

TEST(GradientSuite, AllParameterKindsMatchFiniteDifferences) {
    GradFixture fx;
    // Freeze the bootstrap mask before differentiating.
    fx.loss();
    ASSERT_GE(fx.state.mask_stamp[0], 0);

    SceneGrads g = fx.analytic();
    auto f = [&] { return fx.loss(); };

    auto check_set = [&](std::vector<GaussianPrimitive>& prims, const PrimGrads& pg,
                         const std::string& set) {
        for (size_t i = 0; i < prims.size(); ++i) {
            GaussianPrimitive& p = prims[i];
            std::string tag = set + "[" + std::to_string(i) + "]";
            for (int k = 0; k < 3; ++k)
                expect_grad(pg.mu[i][k], central_diff(f, p.mu[k]), tag + ".mu" + std::to_string(k));
            for (int k = 0; k < 4; ++k)
                expect_grad(pg.rot[i][k], central_diff(f, p.rot[k]),
                            tag + ".rot" + std::to_string(k));
            expect_grad(pg.scale[i].x, central_diff(f, p.scale.x), tag + ".scale_u");
            expect_grad(pg.scale[i].y, central_diff(f, p.scale.y), tag + ".scale_v");
            expect_grad(pg.opacity_logit[i], central_diff(f, p.opacity_logit), tag + ".opacity");
            for (int ch = 0; ch < 3; ++ch)
                expect_grad(pg.sh[i][0][ch], central_diff(f, p.sh[0][ch]),
                            tag + ".sh_dc" + std::to_string(ch));
        }
    };

    // The check must not pass vacuously: every set has to contribute.
    auto set_energy = [](const PrimGrads& pg) {
        double e = 0;
        for (const auto& v : pg.mu) e += norm(v);
        return e;
    };
    EXPECT_GT(set_energy(g.intr), 1e-8);
    EXPECT_GT(set_energy(g.trans), 1e-8);
    EXPECT_GT(set_energy(g.refl), 1e-8);
    EXPECT_NE(g.f0, 0.0);

    check_set(fx.scene.intr, g.intr, "intr");
    check_set(fx.scene.trans, g.trans, "trans");
    check_set(fx.scene.refl, g.refl, "refl");

    for (size_t i = 0; i < fx.scene.intr_attr.size(); ++i) {
        expect_grad(g.trans_logit[i], central_diff(f, fx.scene.intr_attr[i].trans_logit),
                    "trans_logit[" + std::to_string(i) + "]");
        expect_grad(g.spec_logit[i], central_diff(f, fx.scene.intr_attr[i].spec_logit),
                    "spec_logit[" + std::to_string(i) + "]");
    }

    expect_grad(g.f0, central_diff(f, fx.scene.f0), "f0");
}
