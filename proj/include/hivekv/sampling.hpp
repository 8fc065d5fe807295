// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ranges>
#include <stdexcept>
#include <vector>

namespace hivekv {

/// Score comparisons performed by eviction routines.
struct OpCounter {
    std::uint64_t comparisons = 0;
};

/**
 * Cuts [0, n) into consecutive chunks of `stride` (the last one may be short)
 * and returns, per chunk, the index with the largest score. Ties go to the
 * lowest index. Output is ascending with ceil(n / stride) entries.
 */
template <class ScoreAt>
std::vector<std::size_t> local_max_indices(std::size_t n, std::size_t stride, ScoreAt&& score_at,
                                           OpCounter* counter = nullptr) {
    if (stride < 1) throw std::invalid_argument("local_max_sample: stride must be >= 1");
    std::vector<std::size_t> picked;
    picked.reserve((n + stride - 1) / stride);
    for (std::size_t begin = 0; begin < n; begin += stride) {
        const std::size_t end = std::min(n, begin + stride);
        std::size_t best = begin;
        auto best_score = score_at(begin);
        for (std::size_t i = begin + 1; i < end; ++i) {
            auto score = score_at(i);
            if (score > best_score) {
                best = i;
                best_score = score;
            }
        }
        if (counter) counter->comparisons += end - begin - 1;
        picked.push_back(best);
    }
    return picked;
}

/// Chunk-start indices 0, stride, 2*stride, ... below n.
inline std::vector<std::size_t> interval_indices(std::size_t n, std::size_t stride) {
    if (stride < 1) throw std::invalid_argument("interval_sample: stride must be >= 1");
    std::vector<std::size_t> picked;
    picked.reserve((n + stride - 1) / stride);
    for (std::size_t i = 0; i < n; i += stride) picked.push_back(i);
    return picked;
}

/// Keeps the per-chunk argmax of proj(item).
template <std::ranges::random_access_range R, class Proj = std::identity>
auto local_max_sample(std::size_t stride, const R& items, Proj proj = {},
                      OpCounter* counter = nullptr) {
    using Item = std::ranges::range_value_t<R>;
    const auto n = static_cast<std::size_t>(std::ranges::size(items));
    const auto idx = local_max_indices(
        n, stride,
        [&](std::size_t i) { return std::invoke(proj, std::ranges::begin(items)[i]); }, counter);
    std::vector<Item> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(std::ranges::begin(items)[i]);
    return out;
}

/// Keeps every stride-th item starting with the first.
template <std::ranges::random_access_range R>
auto interval_sample(std::size_t stride, const R& items) {
    using Item = std::ranges::range_value_t<R>;
    const auto idx = interval_indices(static_cast<std::size_t>(std::ranges::size(items)), stride);
    std::vector<Item> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(std::ranges::begin(items)[i]);
    return out;
}

}  // namespace hivekv
