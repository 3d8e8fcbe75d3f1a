#include "keyrate/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace keyrate {

namespace {

int initial_thread_count() {
    if (const char* env = std::getenv("KEYRATE_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int g_max_threads = initial_thread_count();

}  // namespace

void pin_blas_threads() {
    ::setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
    ::setenv("OMP_NUM_THREADS", "1", /*overwrite=*/0);
}

int max_threads() { return g_max_threads; }

void set_max_threads(int n) {
    if (n < 1) throw std::invalid_argument("set_max_threads: need n >= 1, got " + std::to_string(n));
    g_max_threads = n;
}

void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task) {
    if (n_tasks == 0) return;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(g_max_threads), n_tasks);

    if (n_workers == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }

    // One exception slot per index; after joining, rethrow the first failure
    // so error behaviour is independent of thread scheduling.
    std::vector<std::exception_ptr> errors(n_tasks);
    std::atomic<bool> failed{false};

    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < n_tasks; i += n_workers) {
                if (failed.load(std::memory_order_relaxed)) return;
                try {
                    task(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (auto& t : workers) t.join();

    if (failed.load()) {
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
}

}  // namespace keyrate
