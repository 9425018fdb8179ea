// Deterministic parallel-for over independent work items.
//
// Worker count comes from the GRADBLOW_WORKERS environment variable when set
// (clamped to at least 1), otherwise hardware concurrency. Each index writes
// only its own output slot, so results are identical regardless of the
// worker count or interleaving; exceptions are captured and rethrown on the
// calling thread (first index wins).

#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gradblow {

inline int worker_count() {
    if (const char* env = std::getenv("GRADBLOW_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename F>
void parallel_for(std::size_t n, F&& f, int workers = 0) {
    if (workers <= 0) workers = worker_count();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> first_bad{n};
    std::exception_ptr eptr = nullptr;
    std::vector<std::exception_ptr> errors(n, nullptr);

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
                std::size_t cur = first_bad.load();
                while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
                }
            }
        }
    };

    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(workers, n);
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    const std::size_t bad = first_bad.load();
    if (bad < n) {
        eptr = errors[bad];
        if (eptr) std::rethrow_exception(eptr);
    }
}

} // namespace gradblow
