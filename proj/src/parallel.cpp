#include "ksymp/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace ksymp {

int worker_count() {
    if (const char* env = std::getenv("KSYMP_THREADS")) {
        const int requested = std::atoi(env);
        if (requested >= 1)
            return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& f) {
    if (n <= 0)
        return;
    const int workers = std::min(worker_count(), n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto run = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try {
                f(i);
            } catch (...) {
                bool expected = false;
                if (failed.compare_exchange_strong(expected, true))
                    failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace ksymp
