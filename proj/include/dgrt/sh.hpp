#pragma once

#include <cassert>
#include <vector>

#include "dgrt/math.hpp"

namespace dgrt {

// Real spherical harmonics in the splatting convention: hardcoded basis up to
// degree 3, colors stored as 0.5 + sum(coeff * basis), clamped at zero.

namespace sh {
constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

inline int basis_count(int degree) { return (degree + 1) * (degree + 1); }

// Basis values at a unit direction; out must hold basis_count(degree).
inline void basis(Vec3 d, int degree, double* out) {
    out[0] = kC0;
    if (degree < 1) return;
    double x = d.x, y = d.y, z = d.z;
    out[1] = -kC1 * y;
    out[2] = kC1 * z;
    out[3] = -kC1 * x;
    if (degree < 2) return;
    double xx = x * x, yy = y * y, zz = z * z;
    out[4] = kC2[0] * x * y;
    out[5] = kC2[1] * y * z;
    out[6] = kC2[2] * (2 * zz - xx - yy);
    out[7] = kC2[3] * x * z;
    out[8] = kC2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = kC3[0] * y * (3 * xx - yy);
    out[10] = kC3[1] * x * y * z;
    out[11] = kC3[2] * y * (4 * zz - xx - yy);
    out[12] = kC3[3] * z * (2 * zz - 3 * xx - 3 * yy);
    out[13] = kC3[4] * x * (4 * zz - xx - yy);
    out[14] = kC3[5] * z * (xx - yy);
    out[15] = kC3[6] * x * (xx - 3 * yy);
}

// d(basis_k)/d(x,y,z) at a unit direction.
inline void basis_grad(Vec3 d, int degree, Vec3* out) {
    out[0] = {0, 0, 0};
    if (degree < 1) return;
    double x = d.x, y = d.y, z = d.z;
    out[1] = {0, -kC1, 0};
    out[2] = {0, 0, kC1};
    out[3] = {-kC1, 0, 0};
    if (degree < 2) return;
    out[4] = {kC2[0] * y, kC2[0] * x, 0};
    out[5] = {0, kC2[1] * z, kC2[1] * y};
    out[6] = {-2 * kC2[2] * x, -2 * kC2[2] * y, 4 * kC2[2] * z};
    out[7] = {kC2[3] * z, 0, kC2[3] * x};
    out[8] = {2 * kC2[4] * x, -2 * kC2[4] * y, 0};
    if (degree < 3) return;
    double xx = x * x, yy = y * y, zz = z * z;
    out[9] = {kC3[0] * 6 * x * y, kC3[0] * (3 * xx - 3 * yy), 0};
    out[10] = {kC3[1] * y * z, kC3[1] * x * z, kC3[1] * x * y};
    out[11] = {-2 * kC3[2] * x * y, kC3[2] * (4 * zz - xx - 3 * yy), 8 * kC3[2] * y * z};
    out[12] = {-6 * kC3[3] * x * z, -6 * kC3[3] * y * z, kC3[3] * (6 * zz - 3 * xx - 3 * yy)};
    out[13] = {kC3[4] * (4 * zz - 3 * xx - yy), -2 * kC3[4] * x * y, 8 * kC3[4] * x * z};
    out[14] = {2 * kC3[5] * x * z, -2 * kC3[5] * y * z, kC3[5] * (xx - yy)};
    out[15] = {kC3[6] * (3 * xx - 3 * yy), -kC3[6] * 6 * x * y, 0};
}
}  // namespace sh

// sum_k coeffs[k] * Y_k(dir), no offset, no clamp. Linear in the coefficients.
inline Vec3 eval_sh_raw(const std::vector<Vec3>& coeffs, Vec3 dir, int degree) {
    assert(int(coeffs.size()) >= sh::basis_count(degree));
    double b[16];
    sh::basis(dir, degree, b);
    Vec3 c{};
    for (int k = 0; k < sh::basis_count(degree); ++k) c += b[k] * coeffs[k];
    return c;
}

// Radiance convention: max(0, 0.5 + raw).
inline Vec3 eval_sh(const std::vector<Vec3>& coeffs, Vec3 dir, int degree) {
    Vec3 c = eval_sh_raw(coeffs, dir, degree) + Vec3{0.5, 0.5, 0.5};
    return {std::max(0.0, c.x), std::max(0.0, c.y), std::max(0.0, c.z)};
}

// Adjoint of eval_sh. Accumulates into g_coeffs (sized like coeffs) and g_dir.
// `value` must be the forward eval_sh result (detects the active clamp).
inline void eval_sh_backward(const std::vector<Vec3>& coeffs, Vec3 dir, int degree, Vec3 value,
                             Vec3 g_out, std::vector<Vec3>& g_coeffs, Vec3& g_dir) {
    // Clamped channels pass no gradient.
    if (value.x <= 0.0) g_out.x = 0;
    if (value.y <= 0.0) g_out.y = 0;
    if (value.z <= 0.0) g_out.z = 0;
    double b[16];
    Vec3 gb[16];
    int n = sh::basis_count(degree);
    sh::basis(dir, degree, b);
    sh::basis_grad(dir, degree, gb);
    for (int k = 0; k < n; ++k) {
        g_coeffs[k] += b[k] * g_out;
        g_dir += dot(coeffs[k], g_out) * gb[k];
    }
}

}  // namespace dgrt
