#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace microagg::threading {

inline unsigned resolve_workers(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(begin, end) over disjoint chunks of [0, total). Each output element
/// must be computed independently of chunk boundaries so results do not
/// depend on the worker count. The first exception thrown is rethrown.
inline void parallel_for(std::size_t total, int workers, const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned n = std::min<std::size_t>(resolve_workers(workers), total == 0 ? 1 : total);
    if (total == 0) return;
    if (n <= 1) {
        fn(0, total);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::size_t chunk = (total + n - 1) / n;
    for (unsigned t = 0; t < n; ++t) {
        const std::size_t begin = static_cast<std::size_t>(t) * chunk;
        const std::size_t end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace microagg::threading
