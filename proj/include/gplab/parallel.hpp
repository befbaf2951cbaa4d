#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gplab {

/*
 * Deterministic data parallelism: indices are statically partitioned into
 * contiguous blocks, each worker writes only to per-index slots, and any
 * reduction is performed sequentially in index order by the caller.  The
 * result is bit-identical for every thread count (including 1).
 * Thread count: GPLAB_THREADS env var if set, else hardware concurrency.
 */

inline unsigned thread_count() {
    if (const char* env = std::getenv("GPLAB_THREADS")) {
        const long n = std::atol(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned t = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace gplab
