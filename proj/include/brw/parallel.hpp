#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brw {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Runs fn(0..n-1) across a worker pool and returns results indexed by replica,
// so aggregation order (and therefore output bytes) is independent of thread
// count and scheduling.  Each replica must derive its randomness from its own
// index.  The first exception thrown by any replica is rethrown after the
// pool drains.
template <class Result, class Fn>
std::vector<Result> run_replicas(std::uint64_t n, unsigned threads, Fn&& fn) {
    std::vector<Result> results(n);
    const std::uint64_t nt =
        std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(n, 1));
    if (nt <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::uint64_t k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace brw
