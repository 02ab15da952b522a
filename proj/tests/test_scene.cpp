#include <gtest/gtest.h>

#include "dgrt/scene.hpp"
#include "dgrt/rng.hpp"
#include "test_helpers.hpp"

using namespace dgrt;

TEST(EvalSh, Degree0IsDcTimesY00) {
    std::vector<Vec3> coeffs{{0.3, -0.1, 0.7}};
    Vec3 c = eval_sh(coeffs, {0.2, 0.5, 0.8}, 0);
    const double y00 = 0.2820947918;
    EXPECT_NEAR(c.x, 0.5 + 0.3 * y00, 1e-9);
    EXPECT_NEAR(c.y, 0.5 - 0.1 * y00, 1e-9);
    EXPECT_NEAR(c.z, 0.5 + 0.7 * y00, 1e-9);
}

TEST(EvalSh, ZeroCoefficientsGiveHalf) {
    std::vector<Vec3> coeffs(9, Vec3{});
    Vec3 c = eval_sh(coeffs, normalized(Vec3{1, 2, 3}), 2);
    EXPECT_DOUBLE_EQ(c.x, 0.5);
    EXPECT_DOUBLE_EQ(c.y, 0.5);
    EXPECT_DOUBLE_EQ(c.z, 0.5);
}

// Independent degree-1 oracle: hardcoded real-SH table at dir = (0,0,1).
TEST(EvalSh, Degree1MatchesTableAtZ) {
    Rng rng(7);
    std::vector<Vec3> coeffs(4);
    for (auto& c : coeffs) c = rng.uniform_vec3(-1, 1);
    Vec3 dir{0, 0, 1};
    // Y at (0,0,1): Y00 = 0.28209479, Y1m1 = -0.48860251*y = 0,
    // Y10 = 0.48860251*z = 0.48860251, Y11 = -0.48860251*x = 0.
    Vec3 expect = coeffs[0] * 0.28209479177387814 + coeffs[2] * 0.4886025119029199;
    Vec3 raw = eval_sh_raw(coeffs, dir, 1);
    EXPECT_NEAR(raw.x, expect.x, 1e-12);
    EXPECT_NEAR(raw.y, expect.y, 1e-12);
    EXPECT_NEAR(raw.z, expect.z, 1e-12);
}

TEST(EvalSh, LinearInCoefficients) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec3> a(9), b(9), mix(9);
        double ca = rng.uniform(-2, 2), cb = rng.uniform(-2, 2);
        for (int k = 0; k < 9; ++k) {
            a[k] = rng.uniform_vec3(-1, 1);
            b[k] = rng.uniform_vec3(-1, 1);
            mix[k] = ca * a[k] + cb * b[k];
        }
        Vec3 dir = normalized(Vec3{rng.normal(), rng.normal(), rng.normal()});
        Vec3 lhs = eval_sh_raw(mix, dir, 2);
        Vec3 rhs = ca * eval_sh_raw(a, dir, 2) + cb * eval_sh_raw(b, dir, 2);
        EXPECT_NEAR(lhs.x, rhs.x, 1e-12);
        EXPECT_NEAR(lhs.y, rhs.y, 1e-12);
        EXPECT_NEAR(lhs.z, rhs.z, 1e-12);
    }
}

TEST(PrimitiveFrame, IdentityQuaternion) {
    GaussianPrimitive g;
    g.rot = Quat{1, 0, 0, 0};
    Frame f = primitive_frame(g);
    EXPECT_NEAR(norm(f.t_u - Vec3{1, 0, 0}), 0, 1e-12);
    EXPECT_NEAR(norm(f.t_v - Vec3{0, 1, 0}), 0, 1e-12);
    EXPECT_NEAR(norm(f.n - Vec3{0, 0, 1}), 0, 1e-12);
}

TEST(PrimitiveFrame, Rot90AboutX) {
    double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
    GaussianPrimitive g;
    g.rot = Quat{c, s, 0, 0};
    Frame f = primitive_frame(g);
    EXPECT_NEAR(norm(f.n - Vec3{0, -1, 0}), 0, 1e-12);
}

TEST(PrimitiveFrame, OrthonormalRightHandedFor1000RandomQuats) {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        Quat q = testhelp::random_quat(rng);
        Frame f = quat_frame(q);
        EXPECT_LT(std::abs(dot(f.t_u, f.t_v)), 1e-8);
        EXPECT_LT(std::abs(dot(f.t_u, f.n)), 1e-8);
        EXPECT_LT(std::abs(dot(f.t_v, f.n)), 1e-8);
        Mat3 m;
        for (int c = 0; c < 3; ++c) {
            m(c, 0) = f.t_u[c];
            m(c, 1) = f.t_v[c];
            m(c, 2) = f.n[c];
        }
        EXPECT_LT(std::abs(det(m) - 1.0), 1e-9);
    }
}

TEST(GenerateRays, PrincipalPointIsForward) {
    Camera cam = testhelp::look_at_camera({0, -2, 0}, {0, 1, 0}, {0, 0, 1}, 9, 9, 9.0);
    // cx = 4.5 falls on the center of pixel x=4 (4 + 0.5).
    auto rays = generate_rays(cam);
    ASSERT_EQ(rays.size(), 81u);
    Vec3 dir = rays[4 * 9 + 4].dir;
    EXPECT_NEAR(norm(dir - cam.forward()), 0, 1e-12);
}

TEST(GenerateRays, SinglePixelForward) {
    Camera cam;
    cam.width = cam.height = 1;
    cam.fx = cam.fy = 1;
    cam.cx = cam.cy = 0.5;
    auto rays = generate_rays(cam);
    ASSERT_EQ(rays.size(), 1u);
    EXPECT_NEAR(norm(rays[0].dir - Vec3{0, 0, 1}), 0, 1e-12);
}

TEST(GenerateRays, CornerPixelMatchesHandComputation) {
    Camera cam;  // identity orientation at origin
    cam.width = cam.height = 64;
    cam.fx = cam.fy = 64;
    cam.cx = cam.cy = 32;
    auto rays = generate_rays(cam);
    // pixel (0,0): cam dir = ((0.5-32)/64, (0.5-32)/64, 1)
    Vec3 expect = normalized(Vec3{-31.5 / 64, -31.5 / 64, 1});
    EXPECT_NEAR(norm(rays[0].dir - expect), 0, 1e-12);
    for (const auto& r : rays) EXPECT_NEAR(norm(r.dir), 1.0, 1e-12);
}

TEST(QuatFrameBackward, MatchesFiniteDifferences) {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        Quat q = testhelp::random_quat(rng);
        Vec3 gu = rng.uniform_vec3(-1, 1), gv = rng.uniform_vec3(-1, 1),
             gn = rng.uniform_vec3(-1, 1);
        auto value = [&] {
            Frame f = quat_frame(q);
            return dot(f.t_u, gu) + dot(f.t_v, gv) + dot(f.n, gn);
        };
        Quat grad{0, 0, 0, 0};
        quat_frame_backward(q, gu, gv, gn, grad);
        for (int k = 0; k < 4; ++k) {
            double fd = testhelp::central_diff(value, q[k]);
            EXPECT_NEAR(grad[k], fd, 1e-6) << "component " << k;
        }
    }
}
