#include "incompat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace incompat {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) { g_threads = std::max(0, threads); }

int thread_count() {
    const int t = g_threads;
    if (t > 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int, int)> &body, int min_chunk) {
    const int workers = std::min(thread_count(), std::max(1, n / std::max(1, min_chunk)));
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    const int chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (int w = 1; w < workers; ++w) {
            const int b = w * chunk, e = std::min(n, b + chunk);
            if (b >= e) continue;
            pool.emplace_back([&body, &errors, w, b, e] {
                try { body(b, e); } catch (...) { errors[w] = std::current_exception(); }
            });
        }
        try { body(0, std::min(n, chunk)); } catch (...) { errors[0] = std::current_exception(); }
    }
    // Lowest chunk wins so the reported error is independent of scheduling.
    for (auto &err : errors)
        if (err) std::rethrow_exception(err);
}

} // namespace incompat
