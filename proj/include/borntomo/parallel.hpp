#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace borntomo {

namespace parallel_detail {
inline std::atomic<std::size_t>& thread_override() {
    static std::atomic<std::size_t> n{0};
    return n;
}
} // namespace parallel_detail

/// Process-wide cap that takes precedence over the environment; 0 clears it.
inline void set_worker_threads(std::size_t n) { parallel_detail::thread_override() = n; }

/// Worker-thread cap: set_worker_threads() if set, else BORN_TOMO_THREADS if
/// set and positive, else hardware concurrency.
inline std::size_t max_worker_threads() {
    if (const std::size_t n = parallel_detail::thread_override()) return n;
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BORN_TOMO_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return hw;
}

/// Runs fn(i) for i in [0, count). Results must be written to per-index
/// slots by the caller so that reductions stay in index order. Exceptions
/// are captured per index; the lowest failing index is rethrown after all
/// workers finish.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t threads = 0) {
    if (threads == 0) threads = max_worker_threads();
    threads = std::min(threads, count);
    std::vector<std::exception_ptr> errors(count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace borntomo
