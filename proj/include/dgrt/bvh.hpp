#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dgrt/splat.hpp"

namespace dgrt {

struct Aabb {
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};

    void grow(Vec3 p) {
        lo = cwise_min(lo, p);
        hi = cwise_max(hi, p);
    }
    void grow(const Aabb& b) {
        lo = cwise_min(lo, b.lo);
        hi = cwise_max(hi, b.hi);
    }
    Vec3 centroid() const { return 0.5 * (lo + hi); }

    bool hit(const Ray& ray, double t_min) const {
        double t0 = t_min, t1 = 1e30;
        for (int a = 0; a < 3; ++a) {
            double o = ray.origin[a], d = ray.dir[a];
            if (std::abs(d) < 1e-300) {
                if (o < lo[a] || o > hi[a]) return false;
                continue;
            }
            double inv = 1.0 / d;
            double ta = (lo[a] - o) * inv, tb = (hi[a] - o) * inv;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }
};

// Bounds of the 3-sigma support rectangle (the pair of triangles spanning the
// four corners), padded slightly so boundary hits are never culled.
inline Aabb splat_bounds(const GaussianPrimitive& g) {
    Frame f = quat_frame(g.rot);
    Vec3 eu = 3.0 * g.scale.x * f.t_u;
    Vec3 ev = 3.0 * g.scale.y * f.t_v;
    Aabb b;
    b.grow(g.mu + eu + ev);
    b.grow(g.mu + eu - ev);
    b.grow(g.mu - eu + ev);
    b.grow(g.mu - eu - ev);
    double pad = 1e-9 * (1.0 + norm(g.mu));
    b.lo -= Vec3{pad, pad, pad};
    b.hi += Vec3{pad, pad, pad};
    return b;
}

// Median-split AABB tree over splats; leaves hold up to 4 primitives. Queries
// return exactly the hits a linear scan would.
class GaussianBvh {
public:
    GaussianBvh() = default;

    explicit GaussianBvh(const std::vector<GaussianPrimitive>& prims) { build(prims); }

    void build(const std::vector<GaussianPrimitive>& prims) {
        nodes_.clear();
        order_.resize(prims.size());
        for (size_t i = 0; i < prims.size(); ++i) order_[i] = int(i);
        if (prims.empty()) return;
        std::vector<Aabb> boxes(prims.size());
        for (size_t i = 0; i < prims.size(); ++i) boxes[i] = splat_bounds(prims[i]);
        nodes_.reserve(2 * prims.size());
        build_node(boxes, 0, int(prims.size()));
    }

    bool empty() const { return nodes_.empty(); }

    // Appends every splat hit along the ray to `out` (unsorted).
    void gather(const Ray& ray, const std::vector<GaussianPrimitive>& prims,
                std::vector<SplatHit>& out,
                const SplatParams& p = default_splat_params()) const {
        if (nodes_.empty()) return;
        int stack[64];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const Node& node = nodes_[stack[--sp]];
            if (!node.box.hit(ray, ray.t_min)) continue;
            if (node.count > 0) {
                for (int i = node.first; i < node.first + node.count; ++i) {
                    int pi = order_[i];
                    if (auto h = ray_splat_intersect(ray, prims[pi], pi, p)) out.push_back(*h);
                }
            } else {
                stack[sp++] = node.first;
                stack[sp++] = node.right;
            }
        }
    }

private:
    struct Node {
        Aabb box;
        int first = 0;  // leaf: start in order_; inner: index of left child
        int count = 0;  // leaf: primitive count; inner: 0
        int right = 0;  // inner only
    };

    int build_node(const std::vector<Aabb>& boxes, int begin, int end) {
        int node_index = int(nodes_.size());
        nodes_.emplace_back();
        Aabb box;
        for (int i = begin; i < end; ++i) box.grow(boxes[order_[i]]);
        nodes_[node_index].box = box;
        int n = end - begin;
        if (n <= 4) {
            nodes_[node_index].first = begin;
            nodes_[node_index].count = n;
            return node_index;
        }
        Aabb cbox;
        for (int i = begin; i < end; ++i) cbox.grow(boxes[order_[i]].centroid());
        Vec3 ext = cbox.hi - cbox.lo;
        int axis = ext.x >= ext.y ? (ext.x >= ext.z ? 0 : 2) : (ext.y >= ext.z ? 1 : 2);
        int mid = begin + n / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             double ca = boxes[a].centroid()[axis], cb = boxes[b].centroid()[axis];
                             if (ca != cb) return ca < cb;
                             return a < b;
                         });
        int left = build_node(boxes, begin, mid);
        int right = build_node(boxes, mid, end);
        nodes_[node_index].first = left;
        nodes_[node_index].right = right;
        nodes_[node_index].count = 0;
        return node_index;
    }

    std::vector<Node> nodes_;
    std::vector<int> order_;
};

}  // namespace dgrt
