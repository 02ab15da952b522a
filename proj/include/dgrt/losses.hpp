#pragma once

#include <cmath>
#include <cstdio>
#include <vector>

#include "dgrt/scene.hpp"

namespace dgrt {

// ---------------------------------------------------------------------------
// SSIM with the standard 11x11 Gaussian window (sigma 1.5), C1=0.01^2,
// C2=0.03^2 on [0,1] data, evaluated over the valid interior region.

namespace ssim_detail {
constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

inline const std::array<double, kWin>& kernel() {
    static const std::array<double, kWin> k = [] {
        std::array<double, kWin> w{};
        double sum = 0;
        for (int i = 0; i < kWin; ++i) {
            double d = i - kHalf;
            w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += w[i];
        }
        for (auto& v : w) v /= sum;
        return w;
    }();
    return k;
}

// Separable valid-region convolution: (w, h) -> (w - 10, h - 10).
inline std::vector<double> conv_valid(const std::vector<double>& img, int w, int h) {
    const auto& k = kernel();
    int cw = w - kWin + 1, ch = h - kWin + 1;
    std::vector<double> tmp(size_t(cw) * h, 0.0), out(size_t(cw) * ch, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < cw; ++x) {
            double acc = 0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * img[size_t(y) * w + x + i];
            tmp[size_t(y) * cw + x] = acc;
        }
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
            double acc = 0;
            for (int i = 0; i < kWin; ++i) acc += k[i] * tmp[size_t(y + i) * cw + x];
            out[size_t(y) * cw + x] = acc;
        }
    return out;
}

// Adjoint of conv_valid: scatters (w - 10, h - 10) gradients back to (w, h).
inline std::vector<double> conv_valid_adjoint(const std::vector<double>& g, int w, int h) {
    const auto& k = kernel();
    int cw = w - kWin + 1, ch = h - kWin + 1;
    std::vector<double> tmp(size_t(cw) * h, 0.0), out(size_t(w) * h, 0.0);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) {
            double gv = g[size_t(y) * cw + x];
            if (gv == 0) continue;
            for (int i = 0; i < kWin; ++i) tmp[size_t(y + i) * cw + x] += k[i] * gv;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < cw; ++x) {
            double gv = tmp[size_t(y) * cw + x];
            if (gv == 0) continue;
            for (int i = 0; i < kWin; ++i) out[size_t(y) * w + x + i] += k[i] * gv;
        }
    return out;
}
}  // namespace ssim_detail

// Mean SSIM over channels and the valid region; C channels stored as
// vector<Vec3>. Images smaller than the window yield 1 (no structure term).
inline double ssim_mean(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int w, int h,
                        std::vector<Vec3>* grad_a = nullptr) {
    using namespace ssim_detail;
    if (grad_a) grad_a->assign(a.size(), Vec3{});
    if (w < kWin || h < kWin) return 1.0;
    int cw = w - kWin + 1, ch = h - kWin + 1;
    size_t nvalid = size_t(cw) * ch;
    double total = 0;
    std::vector<double> x(a.size()), y(a.size());
    for (int c = 0; c < 3; ++c) {
        for (size_t i = 0; i < a.size(); ++i) {
            x[i] = a[i][c];
            y[i] = b[i][c];
        }
        std::vector<double> x2(x.size()), y2(x.size()), xy(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            x2[i] = x[i] * x[i];
            y2[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        auto mu_x = conv_valid(x, w, h), mu_y = conv_valid(y, w, h);
        auto fx2 = conv_valid(x2, w, h), fy2 = conv_valid(y2, w, h), fxy = conv_valid(xy, w, h);
        std::vector<double> g_mu(nvalid, 0.0), g_sx2(nvalid, 0.0), g_sxy(nvalid, 0.0);
        for (size_t i = 0; i < nvalid; ++i) {
            double sx2 = fx2[i] - mu_x[i] * mu_x[i];
            double sy2 = fy2[i] - mu_y[i] * mu_y[i];
            double sxy = fxy[i] - mu_x[i] * mu_y[i];
            double a1 = 2 * mu_x[i] * mu_y[i] + kC1, a2 = 2 * sxy + kC2;
            double b1 = mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kC1, b2 = sx2 + sy2 + kC2;
            double s = (a1 * a2) / (b1 * b2);
            total += s;
            if (grad_a) {
                double gs = 1.0 / (3.0 * double(nvalid));
                double dA1 = a2 / (b1 * b2), dA2 = a1 / (b1 * b2);
                double dB1 = -s / b1, dB2 = -s / b2;
                double gmu = gs * (dA1 * 2 * mu_y[i] + dB1 * 2 * mu_x[i]);
                double gsx2 = gs * dB2;
                double gsxy = gs * dA2 * 2;
                gmu += gsx2 * (-2 * mu_x[i]) + gsxy * (-mu_y[i]);
                g_mu[i] = gmu;
                g_sx2[i] = gsx2;
                g_sxy[i] = gsxy;
            }
        }
        if (grad_a) {
            auto a_mu = conv_valid_adjoint(g_mu, w, h);
            auto a_sx2 = conv_valid_adjoint(g_sx2, w, h);
            auto a_sxy = conv_valid_adjoint(g_sxy, w, h);
            for (size_t i = 0; i < a.size(); ++i)
                (*grad_a)[i][c] += a_mu[i] + 2 * x[i] * a_sx2[i] + y[i] * a_sxy[i];
        }
    }
    return total / (3.0 * double(nvalid));
}

struct PhotometricResult {
    double loss = 0;
    double l1 = 0;
    double ssim = 1;  // mean SSIM value
    std::vector<Vec3> grad;  // d loss / d render
};

// lambda1 * mean|dr| + lambda_ssim * (1 - SSIM).
inline PhotometricResult photometric_loss(const std::vector<Vec3>& render,
                                          const std::vector<Vec3>& gt, int w, int h,
                                          double lambda1, double lambda_ssim) {
    PhotometricResult out;
    out.grad.assign(render.size(), Vec3{});
    double n_elems = 3.0 * double(render.size());
    double l1 = 0;
    for (size_t i = 0; i < render.size(); ++i) {
        Vec3 d = render[i] - gt[i];
        for (int c = 0; c < 3; ++c) {
            l1 += std::abs(d[c]);
            out.grad[i][c] += lambda1 * (d[c] > 0 ? 1.0 : (d[c] < 0 ? -1.0 : 0.0)) / n_elems;
        }
    }
    out.l1 = l1 / n_elems;
    if (lambda_ssim != 0.0) {
        std::vector<Vec3> gs;
        out.ssim = ssim_mean(render, gt, w, h, &gs);
        for (size_t i = 0; i < render.size(); ++i) out.grad[i] += -lambda_ssim * gs[i];
    } else {
        out.ssim = ssim_mean(render, gt, w, h, nullptr);
    }
    out.loss = lambda1 * out.l1 + lambda_ssim * (1.0 - out.ssim);
    return out;
}

// ---------------------------------------------------------------------------
// Scale/shift-invariant depth supervision (closed-form alignment).

struct SiDepthResult {
    double loss = 0;
    double w = 1, q = 0;
    bool degenerate = false;
    std::vector<double> grad;  // d loss / d z
};

// Solves min_{w,q} sum (w z + q - zhat)^2 over the mask in closed form, then
// returns the mean squared residual. (w, q) are constants in the backward
// pass; at the optimum this is the exact gradient.
inline SiDepthResult si_depth_loss(const std::vector<double>& z, const std::vector<double>& zhat,
                                   const std::vector<uint8_t>& valid) {
    SiDepthResult out;
    out.grad.assign(z.size(), 0.0);
    double szz = 0, sz = 0, szh = 0, sh = 0, n = 0;
    for (size_t i = 0; i < z.size(); ++i) {
        if (!valid[i]) continue;
        szz += z[i] * z[i];
        sz += z[i];
        szh += z[i] * zhat[i];
        sh += zhat[i];
        n += 1;
    }
    double det = szz * n - sz * sz;
    if (n < 2 || det < 1e-12) {
        out.degenerate = true;
        std::fprintf(stderr, "si_depth_loss: degenerate normal equations, loss set to 0\n");
        return out;
    }
    out.w = (szh * n - sz * sh) / det;
    out.q = (szz * sh - sz * szh) / det;
    double acc = 0;
    for (size_t i = 0; i < z.size(); ++i) {
        if (!valid[i]) continue;
        double r = out.w * z[i] + out.q - zhat[i];
        acc += r * r;
        out.grad[i] = 2.0 * out.w * r / n;
    }
    out.loss = acc / n;
    return out;
}

// ---------------------------------------------------------------------------
// Normal supervision with the cosine threshold mask.

struct NormalLossResult {
    double loss = 0;
    int survivors = 0;
    std::vector<Vec3> grad;  // d loss / d n (unit-normal layer)
};

// mean(1 - n . nhat) over pixels where both normals are defined; once
// apply_mask is on, restricted to pixels with n . nhat >= tau_n.
inline NormalLossResult masked_normal_loss(const std::vector<Vec3>& n,
                                           const std::vector<Vec3>& nhat, bool apply_mask,
                                           double tau_n) {
    NormalLossResult out;
    out.grad.assign(n.size(), Vec3{});
    std::vector<size_t> keep;
    for (size_t i = 0; i < n.size(); ++i) {
        if (norm(n[i]) < 0.5 || norm(nhat[i]) < 0.5) continue;
        double c = dot(n[i], nhat[i]);
        if (apply_mask && c < tau_n) continue;
        keep.push_back(i);
    }
    out.survivors = int(keep.size());
    if (keep.empty()) return out;
    for (size_t i : keep) {
        out.loss += 1.0 - dot(n[i], nhat[i]);
        out.grad[i] = -1.0 / double(keep.size()) * nhat[i];
    }
    out.loss /= double(keep.size());
    return out;
}

// ---------------------------------------------------------------------------
// Bootstrapped transparency mask and its L1 supervision.

struct BootstrapConfig {
    double tau_d = 0.01;
    double gamma_a = 0.05;
    double min_trans_alpha = 0.1;
};

// M = 1 where the camera-relative transmitted depth separates from the
// interface depth (normalized by scene extent) and the diffuse-albedo prior
// is dark. Pixels with weak transmission coverage contribute no depth gap.
inline std::vector<uint8_t> bootstrap_mask(const std::vector<double>& z_intr,
                                           const std::vector<double>& z_trans,
                                           const std::vector<double>& trans_alpha,
                                           const std::vector<Vec3>& albedo_prior, double extent,
                                           const BootstrapConfig& cfg = {}) {
    std::vector<uint8_t> mask(z_intr.size(), 0);
    for (size_t i = 0; i < z_intr.size(); ++i) {
        double dz = trans_alpha[i] < cfg.min_trans_alpha ? 0.0 : std::abs(z_intr[i] - z_trans[i]);
        double dz_norm = dz / extent;
        mask[i] = (dz_norm > cfg.tau_d && luma(albedo_prior[i]) < cfg.gamma_a) ? 1 : 0;
    }
    return mask;
}

struct TransparencyLossResult {
    double loss = 0;
    std::vector<double> grad;  // d loss / d t
};

// lambda_t * mean|M - t|.
inline TransparencyLossResult transparency_loss(const std::vector<double>& t,
                                                const std::vector<uint8_t>& mask,
                                                double lambda_t) {
    TransparencyLossResult out;
    out.grad.assign(t.size(), 0.0);
    if (t.empty()) return out;
    double n = double(t.size());
    for (size_t i = 0; i < t.size(); ++i) {
        double d = t[i] - double(mask[i]);
        out.loss += std::abs(d);
        out.grad[i] = lambda_t * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / n;
    }
    out.loss = lambda_t * out.loss / n;
    return out;
}

// ---------------------------------------------------------------------------
// Depth/normal consistency plus edge-aware weighting.

// exp(-|grad luma(I)| / sigma_e) per pixel, central differences.
inline std::vector<double> edge_weights(const std::vector<Vec3>& img, int w, int h,
                                        double sigma_e) {
    std::vector<double> out(img.size(), 1.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double gx = 0, gy = 0;
            if (x > 0 && x + 1 < w)
                gx = 0.5 * (luma(img[size_t(y) * w + x + 1]) - luma(img[size_t(y) * w + x - 1]));
            if (y > 0 && y + 1 < h)
                gy = 0.5 * (luma(img[size_t(y + 1) * w + x]) - luma(img[size_t(y - 1) * w + x]));
            out[size_t(y) * w + x] = std::exp(-std::sqrt(gx * gx + gy * gy) / sigma_e);
        }
    return out;
}

struct ConsistencyResult {
    double loss = 0;
    int count = 0;
    std::vector<double> grad_z;
    std::vector<Vec3> grad_n;
};

// Penalizes disagreement between the rendered normal and the normal of the
// unprojected depth map (cross product of central-difference point deltas),
// downweighted near image edges. Differentiable in both depth and normals.
inline ConsistencyResult depth_normal_consistency(const std::vector<double>& z,
                                                  const std::vector<Vec3>& n,
                                                  const std::vector<double>& acc,
                                                  const Camera& cam,
                                                  const std::vector<double>& edge_w,
                                                  double acc_threshold = 0.5) {
    int w = cam.width, h = cam.height;
    ConsistencyResult out;
    out.grad_z.assign(z.size(), 0.0);
    out.grad_n.assign(z.size(), Vec3{});
    std::vector<Vec3> dirs(z.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) dirs[size_t(y) * w + x] = cam.pixel_dir(x, y);

    struct Entry {
        size_t c, xp, xm, yp, ym;
    };
    std::vector<Entry> entries;
    for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x) {
            size_t c = size_t(y) * w + x;
            Entry e{c, c + 1, c - 1, c + size_t(w), c - size_t(w)};
            if (acc[e.c] <= acc_threshold || acc[e.xp] <= acc_threshold ||
                acc[e.xm] <= acc_threshold || acc[e.yp] <= acc_threshold ||
                acc[e.ym] <= acc_threshold)
                continue;
            if (norm(n[c]) < 0.5) continue;
            entries.push_back(e);
        }
    if (entries.empty()) return out;
    out.count = int(entries.size());
    double inv_n = 1.0 / double(entries.size());

    for (const Entry& e : entries) {
        Vec3 a = z[e.xp] * dirs[e.xp] - z[e.xm] * dirs[e.xm];
        Vec3 b = z[e.yp] * dirs[e.yp] - z[e.ym] * dirs[e.ym];
        Vec3 c = cross(a, b);
        double cn = norm(c);
        if (cn < 1e-12) continue;
        Vec3 m_hat = c / cn;
        double sign = dot(m_hat, dirs[e.c]) > 0 ? -1.0 : 1.0;  // face the camera
        Vec3 n_d = sign * m_hat;
        double wgt = edge_w[e.c];
        out.loss += wgt * (1.0 - dot(n[e.c], n_d)) * inv_n;

        Vec3 g_n_d = -wgt * inv_n * n[e.c];
        out.grad_n[e.c] += -wgt * inv_n * n_d;
        Vec3 g_m_hat = sign * g_n_d;
        Vec3 g_c = (g_m_hat - dot(m_hat, g_m_hat) * m_hat) / cn;
        Vec3 g_a = cross(b, g_c);
        Vec3 g_b = cross(g_c, a);
        out.grad_z[e.xp] += dot(dirs[e.xp], g_a);
        out.grad_z[e.xm] -= dot(dirs[e.xm], g_a);
        out.grad_z[e.yp] += dot(dirs[e.yp], g_b);
        out.grad_z[e.ym] -= dot(dirs[e.ym], g_b);
    }
    return out;
}

struct SmoothnessResult {
    double loss = 0;
    std::vector<Vec3> grad_n;
};

// Edge-aware normal smoothness over horizontal/vertical neighbor pairs.
inline SmoothnessResult normal_smoothness(const std::vector<Vec3>& n,
                                          const std::vector<double>& edge_w, int w, int h) {
    SmoothnessResult out;
    out.grad_n.assign(n.size(), Vec3{});
    struct Pair {
        size_t a, b;
        double w;
    };
    std::vector<Pair> pairs;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = size_t(y) * w + x;
            if (norm(n[i]) < 0.5) continue;
            if (x + 1 < w && norm(n[i + 1]) > 0.5) pairs.push_back({i, i + 1, edge_w[i]});
            if (y + 1 < h && norm(n[i + w]) > 0.5) pairs.push_back({i, i + size_t(w), edge_w[i]});
        }
    if (pairs.empty()) return out;
    double inv_n = 1.0 / double(pairs.size());
    for (const Pair& pr : pairs) {
        out.loss += pr.w * (1.0 - dot(n[pr.a], n[pr.b])) * inv_n;
        out.grad_n[pr.a] += -pr.w * inv_n * n[pr.b];
        out.grad_n[pr.b] += -pr.w * inv_n * n[pr.a];
    }
    return out;
}

}  // namespace dgrt
