#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace voronoi {

/// Calls f(i) for i in [0, count) on up to `workers` threads. Callers write
/// results into per-index slots, so output never depends on scheduling.
/// The first exception thrown by any call is rethrown here.
template <typename F>
void parallel_for(std::size_t count, unsigned workers, F&& f)
{
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t const i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    unsigned const n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back(body);
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace voronoi
