#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace microtrap {

// Runs fn(begin, end) over [0, n) split into `threads` contiguous chunks.
// Partitioning depends only on (n, threads), and chunks write disjoint output
// slots, so results are bitwise independent of scheduling order.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    const std::size_t nt =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(
                                     threads > 0 ? threads : 1), n));
    if (nt == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

} // namespace microtrap
