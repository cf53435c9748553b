#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace emba {

/// Fixed partitioning of [0, n) into n_chunks contiguous ranges.
inline std::vector<std::pair<size_t, size_t>> partition_ranges(size_t n, int n_chunks)
{
    if (n_chunks < 1) n_chunks = 1;
    std::vector<std::pair<size_t, size_t>> ranges;
    const size_t per = n / n_chunks, extra = n % n_chunks;
    size_t begin = 0;
    for (int c = 0; c < n_chunks; ++c) {
        const size_t len = per + (static_cast<size_t>(c) < extra ? 1 : 0);
        ranges.emplace_back(begin, begin + len);
        begin += len;
    }
    return ranges;
}

/// Runs fn(chunk_index, begin, end) over a fixed partition of [0, n).
/// threads == 1 runs inline (the deterministic sequential path).
inline void parallel_chunks(size_t n, int threads,
                            const std::function<void(int, size_t, size_t)>& fn)
{
    const auto ranges = partition_ranges(n, threads);
    if (threads <= 1) {
        for (size_t c = 0; c < ranges.size(); ++c)
            fn(static_cast<int>(c), ranges[c].first, ranges[c].second);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(ranges.size());
    for (size_t c = 0; c < ranges.size(); ++c)
        pool.emplace_back(fn, static_cast<int>(c), ranges[c].first, ranges[c].second);
    for (auto& th : pool) th.join();
}

}  // namespace emba
