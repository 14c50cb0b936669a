#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace apa {

/// Runs fn(i) for i in [0, n) across worker threads. Callers write results
/// into pre-sized slots, so the merged output is independent of scheduling.
/// workers == 0 picks the hardware concurrency.
template <typename F>
void parallel_for(std::size_t n, F&& fn, std::size_t workers = 0) {
    if (workers == 0) {
        const std::size_t hw = std::thread::hardware_concurrency();
        workers = hw > 1 ? hw : 1;
    }
    workers = std::min(workers, n);
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace apa
