#pragma once

#include <stdexcept>
#include <vector>

#include "dgrt/rng.hpp"
#include "dgrt/scene.hpp"
#include "dgrt/transport.hpp"

namespace dgrt {

// Parametric room scenes with framed glass panels around opaque boxes,
// rendered by an exact first-order tracer that doubles as the ground-truth
// oracle (depth, normals, albedo, glass masks).

struct SurfaceMat {
    bool glass = false;
    Vec3 albedo{0.5, 0.5, 0.5};
    Vec3 albedo_b{0.25, 0.25, 0.25};  // checker second tone
    double checker_scale = 0;         // 0 = solid
    double t0 = 0.95, s0 = 0.0;       // glass gate parameters
};

struct QuadPatch {
    Vec3 origin, eu, ev;  // p(a, b) = origin + a*eu + b*ev, (a, b) in [0,1]^2
    Vec3 n;               // unit
    SurfaceMat mat;
    double frame_frac = 0;  // border fraction shaded with frame_mat
    SurfaceMat frame_mat;
};

struct BoxObject {
    Vec3 lo, hi;
    SurfaceMat mat;
};

struct AnalyticScene {
    std::vector<QuadPatch> quads;
    std::vector<BoxObject> boxes;
    double irradiance = 1.0;
    double glass_f0 = 0.04;
    Vec3 env{0, 0, 0};
    Vec3 room_lo, room_hi;
    Vec3 container_center;
    double container_radius = 1;
    int n_panels = 0;
};

struct GenSpec {
    double room = 6.0;       // room side length (height is 0.62 * room)
    int boxes = 3;           // opaque boxes, the first one sits inside the container
    int panels = 1;          // glass faces of the display container, 0..5
    double container = 1.6;  // container cube side
};

namespace synth_detail {

struct HitInfo {
    double t = 1e30;
    Vec3 p, n;            // hit point, normal (geometric, unflipped)
    Vec3 albedo;
    bool glass = false;   // glass inner region
    double t0 = 0, s0 = 0;
    bool valid = false;
};

inline Vec3 checker(const SurfaceMat& m, double a, double b) {
    if (m.checker_scale <= 0) return m.albedo;
    int pa = int(std::floor(a / m.checker_scale));
    int pb = int(std::floor(b / m.checker_scale));
    return ((pa + pb) & 1) ? m.albedo_b : m.albedo;
}

inline bool quad_hit(const QuadPatch& q, const Ray& ray, double t_max, HitInfo& out) {
    double denom = dot(ray.dir, q.n);
    if (std::abs(denom) < 1e-12) return false;
    double t = dot(q.origin - ray.origin, q.n) / denom;
    if (t <= ray.t_min || t >= t_max) return false;
    Vec3 p = ray.origin + t * ray.dir;
    Vec3 d = p - q.origin;
    double lu2 = dot(q.eu, q.eu), lv2 = dot(q.ev, q.ev);
    double a = dot(d, q.eu) / lu2, b = dot(d, q.ev) / lv2;
    if (a < 0 || a > 1 || b < 0 || b > 1) return false;
    out.t = t;
    out.p = p;
    out.n = q.n;
    bool frame = q.frame_frac > 0 && (a < q.frame_frac || a > 1 - q.frame_frac ||
                                      b < q.frame_frac || b > 1 - q.frame_frac);
    const SurfaceMat& m = frame ? q.frame_mat : q.mat;
    out.albedo = checker(m, a * std::sqrt(lu2), b * std::sqrt(lv2));
    out.glass = m.glass;
    out.t0 = m.t0;
    out.s0 = m.s0;
    out.valid = true;
    return true;
}

inline bool box_hit(const BoxObject& box, const Ray& ray, double t_max, HitInfo& out) {
    double t0 = ray.t_min, t1 = t_max;
    int axis = -1;
    bool lo_side = false;
    for (int a = 0; a < 3; ++a) {
        double o = ray.origin[a], d = ray.dir[a];
        if (std::abs(d) < 1e-12) {
            if (o < box.lo[a] || o > box.hi[a]) return false;
            continue;
        }
        double inv = 1.0 / d;
        double ta = (box.lo[a] - o) * inv, tb = (box.hi[a] - o) * inv;
        bool lo_first = ta < tb;
        if (!lo_first) std::swap(ta, tb);
        if (ta > t0) {
            t0 = ta;
            axis = a;
            lo_side = lo_first;
        }
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    if (axis < 0 || t0 <= ray.t_min || t0 >= t_max) return false;  // origin inside: ignore
    out.t = t0;
    out.p = ray.origin + t0 * ray.dir;
    out.n = Vec3{};
    out.n[axis] = lo_side ? -1.0 : 1.0;
    // checker in the face plane
    int u = (axis + 1) % 3, v = (axis + 2) % 3;
    out.albedo = checker(box.mat, out.p[u], out.p[v]);
    out.glass = false;
    out.valid = true;
    return true;
}

inline HitInfo closest_hit(const AnalyticScene& scene, const Ray& ray, bool skip_glass) {
    HitInfo best;
    HitInfo h;
    for (const auto& q : scene.quads) {
        if (quad_hit(q, ray, best.t, h)) {
            if (skip_glass && h.glass) continue;
            best = h;
        }
    }
    for (const auto& b : scene.boxes) {
        if (box_hit(b, ray, best.t, h)) best = h;
    }
    return best;
}

// Diffuse radiance seen by a secondary ray (glass skipped entirely).
inline Vec3 secondary_radiance(const AnalyticScene& scene, const Ray& ray) {
    HitInfo h = closest_hit(scene, ray, /*skip_glass=*/true);
    if (!h.valid) return scene.env;
    return scene.irradiance * h.albedo;
}

}  // namespace synth_detail

// Per-view ground truth plus the analytic shading terms used by the
// self-consistency checks.
struct GroundTruthView {
    int width = 0, height = 0;
    std::vector<Vec3> rgb;
    std::vector<double> depth;
    std::vector<Vec3> normal;  // world space, flipped toward the camera
    std::vector<Vec3> albedo;
    std::vector<uint8_t> mask;  // glass-inner first hits
    // aux layers (glass pixels only, zero elsewhere)
    std::vector<double> k_s, t0;
    std::vector<Vec3> l_trans, l_refl, l_opaque;
};

inline GroundTruthView oracle_render(const AnalyticScene& scene, const Camera& cam) {
    using namespace synth_detail;
    GroundTruthView gt;
    gt.width = cam.width;
    gt.height = cam.height;
    size_t npx = size_t(cam.width) * cam.height;
    gt.rgb.assign(npx, scene.env);
    gt.depth.assign(npx, 0.0);
    gt.normal.assign(npx, Vec3{});
    gt.albedo.assign(npx, Vec3{});
    gt.mask.assign(npx, 0);
    gt.k_s.assign(npx, 0.0);
    gt.t0.assign(npx, 0.0);
    gt.l_trans.assign(npx, Vec3{});
    gt.l_refl.assign(npx, Vec3{});
    gt.l_opaque.assign(npx, Vec3{});

    constexpr double eps = 1e-7;
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            size_t i = size_t(y) * cam.width + x;
            Vec3 d = cam.pixel_dir(x, y);
            Ray ray{cam.position, d, 0.0};
            HitInfo h = closest_hit(scene, ray, false);
            if (!h.valid) continue;
            Vec3 omega_o = -d;
            Vec3 n = dot(h.n, omega_o) >= 0 ? h.n : -h.n;
            gt.depth[i] = h.t;
            gt.normal[i] = n;
            gt.albedo[i] = h.albedo;
            if (!h.glass) {
                gt.rgb[i] = scene.irradiance * h.albedo;
                continue;
            }
            gt.mask[i] = 1;
            double F = fresnel_schlick_cos(dot(omega_o, n), scene.glass_f0);
            double ks = specular_weight(h.s0, F);
            Vec3 l_trans = secondary_radiance(scene, Ray{h.p + eps * d, d, 0.0});
            Vec3 omega_r = reflect_dir(omega_o, n);
            Vec3 l_refl = secondary_radiance(scene, Ray{h.p + eps * omega_r, omega_r, 0.0});
            Vec3 l_intr = scene.irradiance * h.albedo;
            Vec3 l_op = (1.0 - ks) * l_intr + ks * l_refl;
            Vec3 l_tr = (1.0 - ks) * l_trans + ks * l_refl;
            gt.rgb[i] = (1.0 - h.t0) * l_op + h.t0 * l_tr;
            gt.k_s[i] = ks;
            gt.t0[i] = h.t0;
            gt.l_trans[i] = l_trans;
            gt.l_refl[i] = l_refl;
            gt.l_opaque[i] = l_op;
        }
    }
    return gt;
}

inline AnalyticScene generate_scene(uint64_t seed, const GenSpec& spec) {
    using namespace synth_detail;
    if (spec.panels < 0 || spec.panels > 5) throw std::invalid_argument("panels must be 0..5");
    if (spec.boxes < 1) throw std::invalid_argument("need at least one box");
    if (spec.container >= 0.5 * spec.room)
        throw std::invalid_argument("container does not fit the room");

    Rng rng(seed);
    AnalyticScene s;
    double R = spec.room, H = 0.62 * spec.room;
    s.room_lo = {0, 0, 0};
    s.room_hi = {R, R, H};
    s.env = {0, 0, 0};
    s.glass_f0 = 0.04;
    s.n_panels = spec.panels;

    auto pastel = [&](Rng& r) {
        return Vec3{r.uniform(0.25, 0.75), r.uniform(0.25, 0.75), r.uniform(0.25, 0.75)};
    };

    Rng wall_rng = rng.split(1);
    auto add_wall = [&](Vec3 origin, Vec3 eu, Vec3 ev, Vec3 n, bool check) {
        QuadPatch q;
        q.origin = origin;
        q.eu = eu;
        q.ev = ev;
        q.n = n;
        q.mat.albedo = pastel(wall_rng);
        if (check) {
            q.mat.albedo_b = 0.4 * q.mat.albedo;
            q.mat.checker_scale = wall_rng.uniform(0.5, 1.1);
        }
        s.quads.push_back(q);
    };
    add_wall({0, 0, 0}, {R, 0, 0}, {0, R, 0}, {0, 0, 1}, true);    // floor
    add_wall({0, 0, H}, {R, 0, 0}, {0, R, 0}, {0, 0, -1}, false);  // ceiling
    add_wall({0, 0, 0}, {R, 0, 0}, {0, 0, H}, {0, 1, 0}, true);    // y=0 wall
    add_wall({0, R, 0}, {R, 0, 0}, {0, 0, H}, {0, -1, 0}, true);   // y=R wall
    add_wall({0, 0, 0}, {0, R, 0}, {0, 0, H}, {1, 0, 0}, true);    // x=0 wall
    add_wall({R, 0, 0}, {0, R, 0}, {0, 0, H}, {-1, 0, 0}, true);   // x=R wall

    // Display container centered in the room, resting on the floor.
    double C = spec.container;
    Vec3 c_lo{0.5 * R - 0.5 * C, 0.5 * R - 0.5 * C, 0.0};
    Vec3 c_hi = c_lo + Vec3{C, C, C};
    s.container_center = 0.5 * (c_lo + c_hi);
    s.container_radius = 0.5 * C * std::sqrt(3.0);

    // Box on display inside the container.
    Rng box_rng = rng.split(2);
    {
        BoxObject b;
        double side = C * box_rng.uniform(0.38, 0.5);
        Vec3 center = s.container_center;
        b.lo = {center.x - 0.5 * side, center.y - 0.5 * side, 0.0};
        b.hi = {center.x + 0.5 * side, center.y + 0.5 * side, side * box_rng.uniform(0.9, 1.6)};
        b.mat.albedo = pastel(box_rng);
        b.mat.albedo_b = Vec3{0.85, 0.85, 0.85} - b.mat.albedo;
        b.mat.checker_scale = side * 0.3;
        s.boxes.push_back(b);
    }
    // Clutter boxes near the walls, outside the camera orbit.
    for (int i = 1; i < spec.boxes; ++i) {
        BoxObject b;
        double sx = box_rng.uniform(0.3, 0.8), sy = box_rng.uniform(0.3, 0.8),
               sz = box_rng.uniform(0.4, 1.4);
        int wall = box_rng.uniform_int(4);
        double along = box_rng.uniform(0.1 * R, 0.9 * R - std::max(sx, sy));
        double margin = 0.06 * R;
        Vec3 lo;
        switch (wall) {
            case 0: lo = {along, margin, 0}; break;
            case 1: lo = {along, R - margin - sy, 0}; break;
            case 2: lo = {margin, along, 0}; break;
            default: lo = {R - margin - sx, along, 0}; break;
        }
        b.lo = lo;
        b.hi = lo + Vec3{sx, sy, sz};
        b.mat.albedo = pastel(box_rng);
        s.boxes.push_back(b);
    }

    // Glass faces in fixed order: -y, +y, -x, +x, top.
    Rng glass_rng = rng.split(3);
    SurfaceMat glass;
    glass.glass = true;
    glass.albedo = {0.02, 0.02, 0.02};
    glass.t0 = glass_rng.uniform(0.88, 0.96);
    glass.s0 = glass_rng.uniform(0.0, 0.08);
    SurfaceMat frame;
    frame.albedo = {0.22, 0.22, 0.24};

    auto add_panel = [&](Vec3 origin, Vec3 eu, Vec3 ev, Vec3 n) {
        QuadPatch q;
        q.origin = origin;
        q.eu = eu;
        q.ev = ev;
        q.n = n;
        q.mat = glass;
        q.frame_frac = 0.08;
        q.frame_mat = frame;
        s.quads.push_back(q);
    };
    Vec3 ex{C, 0, 0}, ey{0, C, 0}, ez{0, 0, C};
    if (spec.panels > 0) add_panel(c_lo, ex, ez, {0, -1, 0});
    if (spec.panels > 1) add_panel({c_lo.x, c_hi.y, c_lo.z}, ex, ez, {0, 1, 0});
    if (spec.panels > 2) add_panel(c_lo, ey, ez, {-1, 0, 0});
    if (spec.panels > 3) add_panel({c_hi.x, c_lo.y, c_lo.z}, ey, ez, {1, 0, 0});
    if (spec.panels > 4) add_panel({c_lo.x, c_lo.y, c_hi.z}, ex, ey, {0, 0, 1});
    return s;
}

// Orbit around the display container, look-at held on its center; every 8th
// view is the held-out split.
inline std::vector<Camera> generate_trajectory(const AnalyticScene& scene, int n_views,
                                               uint64_t seed, int width = 64, int height = 64) {
    if (n_views < 2) throw std::invalid_argument("need at least 2 views");
    Rng rng(seed ^ 0x7a11c4a3ULL);
    std::vector<Camera> cams;
    Vec3 center = scene.container_center;
    double room_half = 0.5 * std::min(scene.room_hi.x - scene.room_lo.x,
                                      scene.room_hi.y - scene.room_lo.y);
    double radius = std::min(0.78 * room_half, std::max(2.4 * scene.container_radius,
                                                        0.5 * room_half));
    double step_deg = std::min(13.5, 360.0 / n_views);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    double fov = 55.0 * kPi / 180.0;
    double focal = 0.5 * width / std::tan(0.5 * fov);
    for (int i = 0; i < n_views; ++i) {
        double a = phase + i * step_deg * kPi / 180.0;
        double hz = center.z + 0.18 * scene.container_radius * std::sin(3.0 * a);
        Vec3 eye{center.x + radius * std::cos(a), center.y + radius * std::sin(a), hz};
        Camera cam;
        cam.position = eye;
        Vec3 fwd = normalized(center - eye);
        Vec3 up{0, 0, 1};
        Vec3 right = normalized(cross(fwd, up));
        Vec3 down = cross(fwd, right);
        for (int c = 0; c < 3; ++c) {
            cam.orientation(0, c) = right[c];
            cam.orientation(1, c) = down[c];
            cam.orientation(2, c) = fwd[c];
        }
        cam.width = width;
        cam.height = height;
        cam.fx = cam.fy = focal;
        cam.cx = 0.5 * width;
        cam.cy = 0.5 * height;
        cams.push_back(cam);
    }
    return cams;
}

inline bool is_test_view(int index) { return index % 8 == 0; }

}  // namespace dgrt
