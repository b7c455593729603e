#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace stle {

/// Number of worker threads: explicit request, else STLE_THREADS, else
/// hardware concurrency.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("STLE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(worker, i) for i in [0, count) on a small worker pool; `worker`
/// identifies the executing thread in [0, threads).  Jobs are immutable
/// descriptors; each job writes only its own slot (or a per-worker slab), so
/// results are independent of scheduling.  First exception is rethrown.
template <class Fn>
void parallel_for_workers(long count, int threads, Fn&& fn) {
    threads = static_cast<int>(std::min<long>(resolve_threads(threads), count));
    if (threads <= 1) {
        for (long i = 0; i < count; ++i) fn(0, i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;  // written once, read after join
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(t, i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(long count, int threads, Fn&& fn) {
    parallel_for_workers(count, threads, [&](int, long i) { fn(i); });
}

}  // namespace stle
