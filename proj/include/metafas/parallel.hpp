#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace metafas {

// Runs fn(i, tid) for i in [0, n) on up to `threads` workers. The partition
// is static and contiguous, so for a fixed thread count any reduction done
// per tid and merged in tid order is bitwise reproducible.
inline void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads > n) threads = n;
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    const int chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi, t] {
            for (int i = lo; i < hi; ++i) fn(i, t);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace metafas
