/// @file parallel.hpp
/// @brief Index-space fan-out over a fixed pool of std::thread workers.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace harris {

/// Number of workers used by parallel_for: hardware concurrency, at least one.
inline unsigned worker_count() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Calls fn(i) for every i in [0, n). Work is claimed dynamically, so callers must store results
/// by index; the first exception thrown by any call is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count()) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace harris
