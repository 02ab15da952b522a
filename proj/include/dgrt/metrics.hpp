#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dgrt/losses.hpp"
#include "dgrt/scene.hpp"

namespace dgrt {

// Photometric and geometric evaluation.

inline double psnr(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("psnr: shape mismatch");
    double mse = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        Vec3 d = a[i] - b[i];
        mse += dot(d, d);
    }
    mse /= 3.0 * double(a.size());
    if (mse < 1e-10) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

struct DepthMetrics {
    double absrel = 0, rmse = 0, delta125 = 0;  // delta125 in percent
};

inline DepthMetrics depth_metrics(const std::vector<double>& z, const std::vector<double>& gt,
                                  const std::vector<uint8_t>& valid) {
    double absrel = 0, mse = 0, inliers = 0, n = 0;
    for (size_t i = 0; i < z.size(); ++i) {
        if (!valid[i]) continue;
        if (!(gt[i] > 0)) throw std::invalid_argument("depth_metrics: gt must be > 0 on mask");
        n += 1;
        double d = z[i] - gt[i];
        absrel += std::abs(d) / gt[i];
        mse += d * d;
        double ratio = z[i] > 0 ? std::max(z[i] / gt[i], gt[i] / z[i]) : 1e30;
        if (ratio < 1.25) inliers += 1;
    }
    if (n == 0) throw std::invalid_argument("depth_metrics: empty mask");
    return {absrel / n, std::sqrt(mse / n), 100.0 * inliers / n};
}

struct NormalMetrics {
    double mae_deg = 0, acc11_25 = 0, acc22_5 = 0;  // accuracies in percent
};

inline NormalMetrics normal_metrics(const std::vector<Vec3>& n, const std::vector<Vec3>& gt,
                                    const std::vector<uint8_t>& valid) {
    double mae = 0, a11 = 0, a22 = 0, cnt = 0;
    for (size_t i = 0; i < n.size(); ++i) {
        if (!valid[i]) continue;
        cnt += 1;
        double c = std::clamp(dot(n[i], gt[i]), -1.0, 1.0);
        double deg = std::acos(c) * 180.0 / kPi;
        mae += deg;
        if (deg < 11.25) a11 += 1;
        if (deg < 22.5) a22 += 1;
    }
    if (cnt == 0) throw std::invalid_argument("normal_metrics: empty mask");
    return {mae / cnt, 100.0 * a11 / cnt, 100.0 * a22 / cnt};
}

// Intersection over union of binary masks; 1 when both are empty.
inline double mask_iou(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt) {
    double inter = 0, uni = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        bool p = pred[i] != 0, g = gt[i] != 0;
        inter += (p && g) ? 1 : 0;
        uni += (p || g) ? 1 : 0;
    }
    return uni > 0 ? inter / uni : 1.0;
}

struct ViewEval {
    int index = 0;
    double psnr = 0, ssim = 0;
    double absrel = 0, rmse = 0, delta125 = 0;
    double mae_deg = 0, acc11_25 = 0, acc22_5 = 0;
    double mask_iou = 0;
    double glass_absrel = -1;  // -1 when the view has no glass pixels
};

struct EvalReport {
    double psnr = 0, ssim = 0;
    double absrel = 0, rmse = 0, delta125 = 0;
    double mae_deg = 0, acc11_25 = 0, acc22_5 = 0;
    double mask_iou = 0;
    double glass_absrel = -1;
    std::vector<ViewEval> views;
};

}  // namespace dgrt
