#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace radonlab {

// Worker-pool cap shared by all modules; the CLI sets it from --threads /
// RADONLAB_THREADS. Zero means "use hardware concurrency".
inline std::atomic<unsigned>& thread_cap() {
    static std::atomic<unsigned> cap{0};
    return cap;
}

inline unsigned effective_threads(std::size_t items) {
    unsigned cap = thread_cap().load();
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    if (items < cap) cap = static_cast<unsigned>(items);
    return std::max(1u, cap);
}

// Index-parallel loop. Results must be written to per-index slots so the
// outcome is independent of scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = effective_threads(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace radonlab
