#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace dlgn {

// Runs fn(thread_index, begin, end) over contiguous chunks of [0, count).
// Chunk boundaries depend only on (count, threads), so reductions that
// combine per-thread buffers in index order stay deterministic.
template <typename Fn>
void parallel_chunks(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count == 0 ? 1 : count));
    if (threads == 1) {
        fn(0, 0, count);
        return;
    }
    const int chunk = (count + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace dlgn
