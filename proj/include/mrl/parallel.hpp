#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "mrl/errors.hpp"

namespace mrl {

inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Static partition of [0, count) into contiguous blocks, one per worker.
// Each index is processed exactly once and writes only its own output slot,
// so results are identical for every thread count. The first raised
// exception is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    threads = resolve_threads(threads);
    if (threads > count) threads = count ? count : 1;
    if (count == 0) return;
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t block = (count + threads - 1) / threads;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = lo + block < count ? lo + block : count;
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mrl
