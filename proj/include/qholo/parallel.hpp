#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qholo {

// Deterministic chunked parallelism. Work is divided into fixed-size chunks
// whose boundaries do not depend on the worker count; callers reduce
// per-chunk results in chunk order, so outputs are bitwise independent of
// `threads`. fn(first, last, chunk_index) must write only to its own slots.
template <typename Fn>
void for_each_chunk(std::size_t count, std::size_t chunk_size, int threads, Fn&& fn) {
    if (count == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (count + chunk_size - 1) / chunk_size;
    const int n_workers =
        std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));

    if (n_workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c * chunk_size, std::min(count, (c + 1) * chunk_size), c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) break;
                try {
                    fn(c * chunk_size, std::min(count, (c + 1) * chunk_size), c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace qholo
