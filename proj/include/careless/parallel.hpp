#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace careless {

// Index-partitioned parallel loop. Each index writes only to its own output
// slot, so results are identical for every thread count. threads == 0 picks
// hardware concurrency; threads == 1 runs inline.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    unsigned t = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (t == 0) t = 1;
    if (t > n) t = static_cast<unsigned>(n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : workers) th.join();
}

}  // namespace careless
