#include "sagopt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sagopt {

namespace {

std::atomic<unsigned> g_threads{std::max(1u, std::thread::hardware_concurrency())};
thread_local bool t_in_worker = false;

} // namespace

void set_thread_count(unsigned threads) { g_threads = std::max(1u, threads); }

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1 || t_in_worker) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> error_index(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            t_in_worker = true;
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    error_index[w] = i;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    std::size_t first = n;
    std::exception_ptr err;
    for (std::size_t w = 0; w < workers; ++w) {
        if (errors[w] && error_index[w] < first) {
            first = error_index[w];
            err = errors[w];
        }
    }
    if (err) {
        std::rethrow_exception(err);
    }
}

} // namespace sagopt
