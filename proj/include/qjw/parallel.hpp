// parallel.hpp — Block-wise parallel loop for trajectory ensembles.
//
// Work is split into fixed-size blocks claimed by worker threads through an
// atomic cursor. Each item's result must depend only on its index (the
// counter-based RNG guarantees that), so the outcome is identical for any
// worker count.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace qjw {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Invokes fn(begin, end) over consecutive index blocks covering [0, n).
inline void parallel_for_blocks(int64_t n, int64_t block_size, int workers,
                                const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    if (block_size <= 0) block_size = 1;
    const int64_t n_blocks = (n + block_size - 1) / block_size;
    workers = resolve_workers(workers);
    if (workers <= 1 || n_blocks == 1) {
        for (int64_t b = 0; b < n_blocks; ++b) {
            const int64_t lo = b * block_size;
            fn(lo, std::min(lo + block_size, n));
        }
        return;
    }
    std::atomic<int64_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const int64_t b = cursor.fetch_add(1);
            if (b >= n_blocks) return;
            const int64_t lo = b * block_size;
            fn(lo, std::min(lo + block_size, n));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace qjw
