// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hivekv/cache.hpp"
#include "hivekv/sampling.hpp"

namespace hivekv {

enum class PolicyKind {
    full,
    local_window,
    sink_window,
    heavy_hitter_topk,
    buzz,
    buzz_swapped_strides,
    buzz_no_local_max,
};

inline constexpr std::array<PolicyKind, 7> kAllPolicies = {
    PolicyKind::full,
    PolicyKind::local_window,
    PolicyKind::sink_window,
    PolicyKind::heavy_hitter_topk,
    PolicyKind::buzz,
    PolicyKind::buzz_swapped_strides,
    PolicyKind::buzz_no_local_max,
};

inline std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::full: return "full";
        case PolicyKind::local_window: return "local_window";
        case PolicyKind::sink_window: return "sink_window";
        case PolicyKind::heavy_hitter_topk: return "heavy_hitter_topk";
        case PolicyKind::buzz: return "buzz";
        case PolicyKind::buzz_swapped_strides: return "buzz_swapped_strides";
        case PolicyKind::buzz_no_local_max: return "buzz_no_local_max";
    }
    return "unknown";
}

inline PolicyKind parse_policy_kind(std::string_view name) {
    for (PolicyKind kind : kAllPolicies) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

inline bool is_buzz(PolicyKind kind) {
    return kind == PolicyKind::buzz || kind == PolicyKind::buzz_swapped_strides ||
           kind == PolicyKind::buzz_no_local_max;
}

/// Which sampler handles each side of a BUZZ eviction round.
enum class SamplingMode {
    standard,         // old: interval(s_hat), new: local max(s)
    swapped_strides,  // old: interval(s),     new: local max(s_hat)
    no_local_max,     // old: interval(s_hat), new: interval(s)
};

inline SamplingMode sampling_mode(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::buzz_swapped_strides: return SamplingMode::swapped_strides;
        case PolicyKind::buzz_no_local_max: return SamplingMode::no_local_max;
        default: return SamplingMode::standard;
    }
}

/**
 * Policy selection. Baselines read k and w from `cache`; heavy_hitter_topk
 * keeps the last cache.w tokens plus the top (budget - w) older tokens by
 * accumulated score.
 */
struct Policy {
    PolicyKind kind = PolicyKind::buzz;
    BuzzConfig cache;
    std::size_t budget = 0;

    void validate() const {
        switch (kind) {
            case PolicyKind::full:
                return;
            case PolicyKind::local_window:
            case PolicyKind::sink_window:
                if (cache.w < 1) throw std::invalid_argument("policy: window must be >= 1");
                return;
            case PolicyKind::heavy_hitter_topk:
                if (cache.w < 1) throw std::invalid_argument("policy: window must be >= 1");
                if (budget < cache.w) {
                    throw std::invalid_argument("heavy_hitter_topk: budget " +
                                                std::to_string(budget) + " < window " +
                                                std::to_string(cache.w));
                }
                return;
            default:
                cache.validate();
                // With s <= 2 the old side is sampled at stride 1 and a full
                // middle region can come out of a round still holding T tokens.
                if (cache.s < 3) {
                    throw std::invalid_argument("buzz policies need stride >= 3 to bound the cache");
                }
        }
    }
};

struct EvictionOutcome {
    std::size_t step = 0;                      // decode step at which the round ran
    std::vector<std::size_t> kept;             // middle positions kept
    std::vector<std::size_t> evicted;          // positions dropped
    std::vector<std::size_t> new_candidates;   // buffer positions offered to the new-token sampler
    std::uint64_t comparisons = 0;
};

namespace detail {

inline std::vector<KvEntry> sample_old(SamplingMode mode, const BuzzConfig& c,
                                       std::span<const KvEntry> old) {
    const std::size_t stride = mode == SamplingMode::swapped_strides ? c.s : c.small_stride();
    return interval_sample(stride, old);
}

inline std::vector<KvEntry> sample_new(SamplingMode mode, const BuzzConfig& c,
                                       std::span<const KvEntry> fresh, OpCounter& counter) {
    switch (mode) {
        case SamplingMode::swapped_strides:
            return local_max_sample(c.small_stride(), fresh, &KvEntry::score_value, &counter);
        case SamplingMode::no_local_max:
            return interval_sample(c.s, fresh);
        case SamplingMode::standard:
            break;
    }
    return local_max_sample(c.s, fresh, &KvEntry::score_value, &counter);
}

inline std::vector<std::size_t> positions_of(std::span<const KvEntry> entries) {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const KvEntry& e : entries) out.push_back(e.position);
    return out;
}

}  // namespace detail

/**
 * One BUZZ eviction round: old tokens are interval-sampled, buffered new
 * tokens are local-max sampled, and the concatenation becomes the new old
 * region. Sink and window are untouched.
 */
inline EvictionOutcome buzz_evict(CacheState& cache, SamplingMode mode = SamplingMode::standard) {
    if (!cache.eviction_due()) {
        throw std::logic_error("buzz_evict: called while old + buffer is below the threshold");
    }
    const BuzzConfig& c = cache.config();
    OpCounter counter;
    std::vector<KvEntry> kept = detail::sample_old(mode, c, cache.old());
    std::vector<KvEntry> fresh = detail::sample_new(mode, c, cache.buffer(), counter);
    kept.insert(kept.end(), std::make_move_iterator(fresh.begin()),
                std::make_move_iterator(fresh.end()));
    if (kept.size() >= c.T) {
        throw std::logic_error("buzz_evict: round did not shrink the middle region");
    }

    EvictionOutcome outcome;
    outcome.kept = detail::positions_of(kept);
    outcome.new_candidates = detail::positions_of(cache.buffer());
    outcome.comparisons = counter.comparisons;
    std::vector<std::size_t> before = detail::positions_of(cache.old());
    before.insert(before.end(), outcome.new_candidates.begin(), outcome.new_candidates.end());
    std::ranges::set_difference(before, outcome.kept, std::back_inserter(outcome.evicted));

    cache.replace_middle(std::move(kept));
    return outcome;
}

struct PrefillResult {
    std::size_t rounds = 0;
    std::uint64_t comparisons = 0;
};

/**
 * Loads a prompt into an empty cache. Prompts that fit in k + T + w are
 * placed as if appended token by token. Longer prompts keep the first k and
 * last w tokens and shrink the middle with repeated sampling rounds (the
 * new-token sampler first, the old-token sampler afterwards) until it holds
 * at most T tokens.
 */
inline PrefillResult prefill_compact(CacheState& cache, std::vector<KvEntry> prompt,
                                     SamplingMode mode = SamplingMode::standard) {
    if (cache.size() != 0) throw std::invalid_argument("prefill_compact: cache is not empty");
    const BuzzConfig& c = cache.config();
    PrefillResult result;
    if (prompt.size() <= c.capacity()) {
        for (KvEntry& e : prompt) cache.append_token(std::move(e));
        return result;
    }
    for (std::size_t i = 1; i < prompt.size(); ++i) {
        if (prompt[i].position <= prompt[i - 1].position) {
            throw std::invalid_argument("prefill_compact: prompt positions must increase");
        }
    }

    const auto head = std::span<const KvEntry>(prompt).first(c.k);
    const auto tail = std::span<const KvEntry>(prompt).last(c.w);
    const auto body = std::span<const KvEntry>(prompt).subspan(c.k, prompt.size() - c.k - c.w);

    OpCounter counter;
    std::vector<KvEntry> middle = detail::sample_new(mode, c, body, counter);
    result.rounds = 1;
    while (middle.size() > c.T) {
        const std::size_t before = middle.size();
        middle = detail::sample_old(mode, c, middle);
        ++result.rounds;
        if (middle.size() == before) {
            throw std::logic_error("prefill_compact: sampling round made no progress");
        }
    }
    result.comparisons = counter.comparisons;
    cache.install({head.begin(), head.end()}, std::move(middle), {},
                  std::deque<KvEntry>(tail.begin(), tail.end()), result.rounds);
    return result;
}

/**
 * Applies a baseline policy to a flat, position-ordered cache and returns the
 * evicted positions. heavy_hitter_topk drops one lowest-score token (oldest
 * on ties) outside the recent window per call while over budget.
 */
inline std::vector<std::size_t> baseline_evict(const Policy& policy, std::vector<KvEntry>& entries,
                                               OpCounter* counter = nullptr) {
    std::vector<std::size_t> evicted;
    const BuzzConfig& c = policy.cache;
    auto drop = [&](std::size_t index) {
        evicted.push_back(entries[index].position);
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(index));
    };
    switch (policy.kind) {
        case PolicyKind::full:
            break;
        case PolicyKind::local_window:
            while (entries.size() > c.w) drop(0);
            break;
        case PolicyKind::sink_window:
            while (entries.size() > c.k + c.w) drop(c.k);
            break;
        case PolicyKind::heavy_hitter_topk:
            while (entries.size() > policy.budget) {
                const std::size_t candidates = entries.size() - c.w;
                std::size_t worst = 0;
                for (std::size_t i = 1; i < candidates; ++i) {
                    if (entries[i].score.accumulated < entries[worst].score.accumulated) worst = i;
                }
                if (counter && candidates > 0) counter->comparisons += candidates - 1;
                drop(worst);
            }
            break;
        default:
            throw std::invalid_argument("baseline_evict: " + std::string(to_string(policy.kind)) +
                                        " is not a baseline policy");
    }
    std::ranges::sort(evicted);
    return evicted;
}

/// Runtime cache for any policy: BUZZ variants use CacheState, baselines a flat list.
class PolicyCache {
public:
    explicit PolicyCache(Policy policy) : policy_(policy) {
        policy_.validate();
        if (is_buzz(policy_.kind)) buzz_.emplace(policy_.cache);
    }

    /// Makes room if needed, then inserts the token.
    void admit(KvEntry entry, std::size_t step) {
        if (buzz_) {
            if (buzz_->eviction_due()) {
                EvictionOutcome out = buzz_evict(*buzz_, sampling_mode(policy_.kind));
                out.step = step;
                comparisons_ += out.comparisons;
                history_.push_back(std::move(out));
            }
            buzz_->append_token(std::move(entry));
            return;
        }
        if (!flat_.empty() && entry.position <= flat_.back().position) {
            throw std::invalid_argument("PolicyCache::admit: non-monotone position");
        }
        flat_.push_back(std::move(entry));
        OpCounter counter;
        std::vector<std::size_t> evicted = baseline_evict(policy_, flat_, &counter);
        comparisons_ += counter.comparisons;
        if (!evicted.empty()) {
            EvictionOutcome out;
            out.step = step;
            out.evicted = std::move(evicted);
            out.comparisons = counter.comparisons;
            history_.push_back(std::move(out));
        }
    }

    CacheView view() const {
        if (buzz_) return buzz_->concat_regions();
        CacheView view;
        for (const KvEntry& e : flat_) {
            view.keys.append_row(e.key);
            view.values.append_row(e.value);
            view.scores.push_back(e.score.accumulated);
            view.positions.push_back(e.position);
        }
        return view;
    }

    void accumulate(std::span<const double> probs) {
        if (buzz_) return buzz_->accumulate(probs);
        if (probs.size() != flat_.size()) {
            throw std::invalid_argument("PolicyCache::accumulate: length mismatch");
        }
        for (std::size_t i = 0; i < probs.size(); ++i) flat_[i].score.observe(probs[i]);
    }

    std::size_t size() const { return buzz_ ? buzz_->size() : flat_.size(); }

    std::vector<std::size_t> positions() const {
        if (buzz_) return buzz_->positions();
        return detail::positions_of(flat_);
    }

    void validate() const {
        if (buzz_) return buzz_->validate();
        for (std::size_t i = 1; i < flat_.size(); ++i) {
            if (flat_[i].position <= flat_[i - 1].position) {
                throw std::logic_error("PolicyCache invariant violated: positions not increasing");
            }
        }
    }

    const Policy& policy() const { return policy_; }
    const CacheState* buzz_state() const { return buzz_ ? &*buzz_ : nullptr; }
    std::uint64_t comparisons() const { return comparisons_; }
    const std::vector<EvictionOutcome>& evictions() const { return history_; }

private:
    Policy policy_;
    std::optional<CacheState> buzz_;
    std::vector<KvEntry> flat_;
    std::uint64_t comparisons_ = 0;
    std::vector<EvictionOutcome> history_;
};

}  // namespace hivekv
