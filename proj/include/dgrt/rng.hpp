#pragma once

#include <cstdint>
#include <cmath>

#include "dgrt/math.hpp"

namespace dgrt {

// SplitMix64 stream. Self-contained so draws are bit-reproducible across
// standard libraries; substreams derived by key let per-scene/per-view
// generation stay independent of how many components draw before them.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int n) { return int(next_u64() % uint64_t(n)); }

    // Box-Muller; two uniforms per draw, no cached state.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Vec3 uniform_vec3(double lo, double hi) {
        double a = uniform(lo, hi), b = uniform(lo, hi), c = uniform(lo, hi);
        return {a, b, c};
    }

    // Independent substream keyed off this stream's seed.
    Rng split(uint64_t key) const {
        Rng r(state_ ^ (0x9e3779b97f4a7c15ull * (key + 1)));
        r.next_u64();
        return r;
    }

private:
    uint64_t state_;
};

}  // namespace dgrt
