#include "robpen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace robpen {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n) { g_threads = std::max(1u, n); }

unsigned thread_count() { return g_threads.load(); }

void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn)
{
    const std::size_t workers = std::min<std::size_t>(thread_count(), n_blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b)
            fn(b);
        return;
    }

    std::vector<std::exception_ptr> errors(n_blocks);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t b = w; b < n_blocks; b += workers) {
                try {
                    fn(b);
                } catch (...) {
                    errors[b] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace robpen
