#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace patternlab {

/// Runs fn(i) for i in [0, n) over `workers` threads. Tasks must be pure with
/// respect to shared state except their own output slot; results land in
/// caller-preallocated storage, so the merge is deterministic regardless of
/// scheduling.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int count = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(count);
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

/// Worker count from the environment (PATTERNLAB_WORKERS), defaulting to 1.
inline int default_workers() {
    if (const char* env = std::getenv("PATTERNLAB_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

} // namespace patternlab
