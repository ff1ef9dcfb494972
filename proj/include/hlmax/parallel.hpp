#pragma once

// Index-based parallel loop. Worker count comes from HLMAX_THREADS (default:
// hardware concurrency). Tasks are identified by index and own their random
// substreams, so results never depend on scheduling.

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace hlmax {

inline int worker_count() {
    if (const char* env = std::getenv("HLMAX_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace hlmax
