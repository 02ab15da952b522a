#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace dgrt {

struct Vec2 {
    double x = 0, y = 0;
    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator*(Vec3 a, double s) { return s * a; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, Vec3 b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, double s) { a = a * s; return a; }
inline Vec3 mul(Vec3 a, Vec3 b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { double n = norm(a); return n > 0 ? a / n : Vec3{}; }
inline double max_component(Vec3 a) { return std::max(a.x, std::max(a.y, a.z)); }
inline Vec3 cwise_min(Vec3 a, Vec3 b) { return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)}; }
inline Vec3 cwise_max(Vec3 a, Vec3 b) { return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}; }

// Unit quaternion, scalar-first.
struct Quat {
    double w = 1, x = 0, y = 0, z = 0;
    double& operator[](int i) { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
    double operator[](int i) const { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
};

inline double norm(const Quat& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }
inline Quat normalized(const Quat& q) {
    double n = norm(q);
    return n > 0 ? Quat{q.w / n, q.x / n, q.y / n, q.z / n} : Quat{};
}

// Row-major 3x3.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
    double& operator()(int r, int c) { return m[3 * r + c]; }
    double operator()(int r, int c) const { return m[3 * r + c]; }
    Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
    Vec3 col(int c) const { return {m[c], m[c + 3], m[c + 6]}; }
};

inline Vec3 operator*(const Mat3& a, Vec3 v) {
    return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}
// transpose(a) * v
inline Vec3 mul_t(const Mat3& a, Vec3 v) {
    return {dot(a.col(0), v), dot(a.col(1), v), dot(a.col(2), v)};
}
inline double det(const Mat3& a) {
    return dot(a.col(0), cross(a.col(1), a.col(2)));
}

struct Frame {
    Vec3 t_u, t_v, n;
};

// Tangent frame of an (optionally unnormalized) quaternion: columns of the
// rotation matrix R = M(q)/|q|^2, unit by construction for any q != 0.
inline Frame quat_frame(const Quat& q) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    double s = w * w + x * x + y * y + z * z;
    Frame f;
    f.t_u = Vec3{w * w + x * x - y * y - z * z, 2 * (x * y + w * z), 2 * (x * z - w * y)} / s;
    f.t_v = Vec3{2 * (x * y - w * z), w * w - x * x + y * y - z * z, 2 * (y * z + w * x)} / s;
    f.n   = Vec3{2 * (x * z + w * y), 2 * (y * z - w * x), w * w - x * x - y * y + z * z} / s;
    return f;
}

// Adjoint of quat_frame: given gradients w.r.t. the three frame vectors,
// accumulate the gradient w.r.t. the raw quaternion components.
inline void quat_frame_backward(const Quat& q, const Vec3& g_tu, const Vec3& g_tv,
                                const Vec3& g_n, Quat& g_q) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    double s = w * w + x * x + y * y + z * z;
    Frame f = quat_frame(q);
    // dM/dq_k columns (M is the homogeneous quadratic form, R = M/s).
    const Vec3 dM[4][3] = {
        {{2 * w, 2 * z, -2 * y}, {-2 * z, 2 * w, 2 * x}, {2 * y, -2 * x, 2 * w}},   // d/dw
        {{2 * x, 2 * y, 2 * z}, {2 * y, -2 * x, 2 * w}, {2 * z, -2 * w, -2 * x}},   // d/dx
        {{-2 * y, 2 * x, -2 * w}, {2 * x, 2 * y, 2 * z}, {2 * w, 2 * z, -2 * y}},   // d/dy
        {{-2 * z, 2 * w, 2 * x}, {-2 * w, -2 * z, 2 * y}, {2 * x, 2 * y, 2 * z}},   // d/dz
    };
    const Vec3 cols[3] = {f.t_u, f.t_v, f.n};
    const Vec3 gs[3] = {g_tu, g_tv, g_n};
    for (int k = 0; k < 4; ++k) {
        double qk = q[k];
        double acc = 0;
        for (int c = 0; c < 3; ++c)
            acc += dot((dM[k][c] - 2 * qk * cols[c]) / s, gs[c]);
        g_q[k] += acc;
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
inline double luma(Vec3 c) { return 0.2126 * c.x + 0.7152 * c.y + 0.0722 * c.z; }

inline double sqr(double x) { return x * x; }

constexpr double kPi = 3.14159265358979323846;

}  // namespace dgrt
