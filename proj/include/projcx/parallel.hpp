#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace projcx {

/// Worker count resolution: explicit request wins, then PROJCX_WORKERS, then 1.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PROJCX_WORKERS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    return 1;
}

/// Splits [0, n) into contiguous chunks, runs `work` on each chunk (possibly on
/// several threads), then calls `merge` on the per-chunk results in chunk order.
/// Because the merge order is fixed, the outcome does not depend on the worker
/// count.  `work(chunk_index, begin, end)` must not touch shared mutable state.
template <class Partial>
void parallel_chunks(std::size_t n, int workers,
                     const std::function<Partial(std::size_t, std::size_t, std::size_t)>& work,
                     const std::function<void(Partial&)>& merge) {
    if (n == 0) return;
    std::size_t nchunks = static_cast<std::size_t>(workers);
    if (nchunks < 1) nchunks = 1;
    if (nchunks > n) nchunks = n;

    std::vector<Partial> partials(nchunks);
    if (nchunks == 1) {
        partials[0] = work(0, 0, n);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(nchunks);
        std::size_t base = n / nchunks, extra = n % nchunks, begin = 0;
        for (std::size_t c = 0; c < nchunks; ++c) {
            std::size_t len = base + (c < extra ? 1 : 0);
            std::size_t end = begin + len;
            threads.emplace_back([&partials, &work, c, begin, end] { partials[c] = work(c, begin, end); });
            begin = end;
        }
        for (auto& t : threads) t.join();
    }
    for (auto& p : partials) merge(p);
}

}  // namespace projcx
