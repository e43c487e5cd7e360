#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace specreg {

/// Worker count for data-parallel loops. Honors SPECREG_THREADS when set,
/// otherwise hardware concurrency. Never zero.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("SPECREG_THREADS")) {
        long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs body(i) for i in [0, count). Bodies must write only to disjoint,
/// preallocated slots so results are independent of scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    std::size_t workers = worker_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (workers > count) workers = count;
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace specreg
