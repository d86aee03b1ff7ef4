#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dgprm {

/// Maps fn over [0, n) with at most max_workers threads. Results land at
/// their input index, so output order is stable regardless of scheduling.
/// The first exception wins and is rethrown after all workers finish.
template <typename R, typename Fn>
std::vector<R> parallel_map(size_t n, int max_workers, Fn&& fn) {
    std::vector<R> results(n);
    if (n == 0) return results;
    const size_t workers = std::min<size_t>(std::max(1, max_workers), n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }

    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace dgprm
