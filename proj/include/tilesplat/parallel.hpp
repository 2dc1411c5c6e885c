// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tilesplat {

/// Splits [0, n) into `workers` contiguous blocks and runs fn(worker, begin, end) on each,
/// joining before returning. workers <= 1 runs inline on the calling thread.
template <typename Fn> void parallel_blocks(int workers, std::size_t n, Fn&& fn) {
    const auto w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || n < 2) {
        fn(0, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t begin = n * k / w, end = n * (k + 1) / w;
        pool.emplace_back([&, k, begin, end] {
            try {
                fn(static_cast<int>(k), begin, end);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace tilesplat
