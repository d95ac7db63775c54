#pragma once

// Chunked parallel loop over path indices.  Workers only write into
// disjoint per-index slots; every reduction happens afterwards, serially,
// in index order — so results never depend on the worker count.

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cogarch {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Invoke fn(begin, end) on contiguous index ranges covering [0, n).
template <class Fn>
void parallel_for_chunks(long n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n <= 0) return;
    if (workers == 1 || n == 1) {
        fn(0L, n);
        return;
    }
    const long chunks = std::min<long>(workers, n);
    const long base = n / chunks;
    const long rem = n % chunks;

    std::vector<std::thread> pool;
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    long begin = 0;
    for (long c = 0; c < chunks; ++c) {
        const long len = base + (c < rem ? 1 : 0);
        const long end = begin + len;
        pool.emplace_back([&, begin, end]() {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace cogarch
