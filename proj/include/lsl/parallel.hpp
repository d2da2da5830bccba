#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lsl {

/// Run fn(i) for i in [0, n) on up to `jobs` threads.  Work items must not
/// share mutable state; exceptions are captured and rethrown (first one wins,
/// by index) after all workers join, so results stay deterministic.
template <class Fn>
void parallel_for_index(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace lsl
