// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace adlift {

/// 0 means "all available cores".
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is statically strided across threads;
/// callers must write only to slot i so results do not depend on the thread
/// count.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    const int t = std::min(resolve_threads(threads), n);
    if (t <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int w = 0; w < t; ++w) {
        pool.emplace_back([&fn, w, t, n] {
            for (int i = w; i < n; i += t) fn(i);
        });
    }
}

} // namespace adlift
