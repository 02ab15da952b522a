#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace dgrt {

// Fixed default band height: work decomposition (and therefore any ordered
// reduction over bands) does not depend on the worker count.
constexpr int kBandRows = 16;

inline int band_count(int height, int band_rows = kBandRows) {
    return (height + band_rows - 1) / band_rows;
}

// Runs fn(band, y0, y1) over fixed row bands, optionally on several threads.
inline void parallel_bands(int height, int threads,
                           const std::function<void(int, int, int)>& fn,
                           int band_rows = kBandRows) {
    int nbands = band_count(height, band_rows);
    auto run_band = [&](int b) {
        int y0 = b * band_rows;
        int y1 = std::min(height, y0 + band_rows);
        fn(b, y0, y1);
    };
    if (threads <= 1 || nbands <= 1) {
        for (int b = 0; b < nbands; ++b) run_band(b);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int n = std::min(threads, nbands);
    pool.reserve(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (int b = next.fetch_add(1); b < nbands; b = next.fetch_add(1)) run_band(b);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace dgrt
