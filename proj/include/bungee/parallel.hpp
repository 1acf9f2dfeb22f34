#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bungee {

/// Worker count: hardware concurrency, capped by BUNGEE_LAB_THREADS when set.
inline unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BUNGEE_LAB_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        } catch (...) {
            // malformed values leave the default in place
        }
    }
    return n;
}

/// Calls fn(i) for i in [0, count) on `workers` threads, rows interleaved. Results
/// must be written to per-index slots so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    parallel_for(count, std::forward<Fn>(fn), thread_count());
}

}  // namespace bungee
