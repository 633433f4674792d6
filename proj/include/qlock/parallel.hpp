#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace qlock {

// Runs fn(i) for i in [0, n) across `threads` workers in contiguous chunks.
// Callers write per-index results into preallocated storage and reduce
// sequentially afterwards, so results do not depend on the thread count.
template <typename Fn>
void parallel_for_indexed(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace qlock
