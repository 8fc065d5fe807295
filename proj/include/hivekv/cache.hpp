// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hivekv/attention.hpp"
#include "hivekv/numeric.hpp"

namespace hivekv {

/// One cached token.
struct KvEntry {
    Vec key;
    Vec value;
    std::size_t position = 0;  // index in the full token stream
    TokenScore score;

    double score_value() const { return score.accumulated; }
};

/// Eviction parameters. The small stride and the capacity are derived.
struct BuzzConfig {
    std::size_t k = 4;    // sink tokens
    std::size_t w = 64;   // sliding window
    std::size_t s = 5;    // stride for new tokens
    std::size_t T = 260;  // cap on old + buffer

    std::size_t small_stride() const { return (s + 1) / 2; }
    std::size_t capacity() const { return k + T + w; }

    void validate() const {
        if (w < 1) throw std::invalid_argument("BuzzConfig: w must be >= 1");
        if (s < 1) throw std::invalid_argument("BuzzConfig: stride must be >= 1");
        if (T < s) throw std::invalid_argument("BuzzConfig: threshold must be >= stride");
    }

    friend bool operator==(const BuzzConfig&, const BuzzConfig&) = default;
};

struct Occupancy {
    std::size_t sink = 0;
    std::size_t old = 0;
    std::size_t buffer = 0;
    std::size_t window = 0;

    std::size_t middle() const { return old + buffer; }
    std::size_t total() const { return sink + old + buffer + window; }
};

/// Cache rows in attention order, ready for decode_step.
struct CacheView {
    Matrix keys;
    Matrix values;
    Vec scores;
    std::vector<std::size_t> positions;
};

/**
 * Partitioned KV cache: sink | old | buffer | window.
 *
 * Arrivals fill the sink, then the window; once both are full each arrival
 * pushes the oldest window token into the buffer. Old and buffer share the
 * threshold T: eviction is due when |old| + |buffer| reaches T. The cache
 * never evicts on its own; callers run an eviction round when due.
 */
class CacheState {
public:
    explicit CacheState(BuzzConfig config) : config_(config) { config_.validate(); }

    /// Returns true when eviction is due after the insertion.
    bool append_token(KvEntry entry) {
        if (last_position_ && entry.position <= *last_position_) {
            throw std::invalid_argument("append_token: position " + std::to_string(entry.position) +
                                        " does not exceed last cached position " +
                                        std::to_string(*last_position_));
        }
        last_position_ = entry.position;
        if (sink_.size() < config_.k) {
            sink_.push_back(std::move(entry));
        } else {
            window_.push_back(std::move(entry));
            if (window_.size() > config_.w) {
                buffer_.push_back(std::move(window_.front()));
                window_.pop_front();
            }
        }
        return eviction_due();
    }

    bool eviction_due() const { return old_.size() + buffer_.size() >= config_.T; }

    CacheView concat_regions() const {
        CacheView view;
        const std::size_t n = size();
        view.scores.reserve(n);
        view.positions.reserve(n);
        for_each_entry([&](const KvEntry& e) {
            view.keys.append_row(e.key);
            view.values.append_row(e.value);
            view.scores.push_back(e.score.accumulated);
            view.positions.push_back(e.position);
        });
        return view;
    }

    /// Adds one step's attention probabilities, given in concat_regions order.
    void accumulate(std::span<const double> probs) {
        if (probs.size() != size()) {
            throw std::invalid_argument("CacheState::accumulate: length mismatch");
        }
        std::size_t i = 0;
        for_each_entry_mut([&](KvEntry& e) { e.score.observe(probs[i++]); });
    }

    Occupancy occupancy() const {
        return {sink_.size(), old_.size(), buffer_.size(), window_.size()};
    }
    std::size_t size() const { return occupancy().total(); }

    std::vector<std::size_t> positions() const {
        std::vector<std::size_t> out;
        out.reserve(size());
        for_each_entry([&](const KvEntry& e) { out.push_back(e.position); });
        return out;
    }

    const std::vector<KvEntry>& sink() const { return sink_; }
    const std::vector<KvEntry>& old() const { return old_; }
    const std::vector<KvEntry>& buffer() const { return buffer_; }
    const std::deque<KvEntry>& window() const { return window_; }
    const BuzzConfig& config() const { return config_; }
    std::size_t epoch() const { return epoch_; }

    /// Installs the result of one sampling round: old := new_old, buffer := {}.
    void replace_middle(std::vector<KvEntry> new_old) {
        old_ = std::move(new_old);
        buffer_.clear();
        ++epoch_;
    }

    /// Places a prompt directly: sink from the head, window from the tail,
    /// the rest as old tokens. Used by prefill compaction.
    void install(std::vector<KvEntry> sink, std::vector<KvEntry> old, std::vector<KvEntry> buffer,
                 std::deque<KvEntry> window, std::size_t rounds) {
        sink_ = std::move(sink);
        old_ = std::move(old);
        buffer_ = std::move(buffer);
        window_ = std::move(window);
        epoch_ += rounds;
        last_position_.reset();
        for_each_entry([&](const KvEntry& e) { last_position_ = e.position; });
        validate();
    }

    /// Throws std::logic_error on any broken structural invariant.
    void validate() const {
        auto fail = [](const std::string& what) {
            throw std::logic_error("CacheState invariant violated: " + what);
        };
        if (sink_.size() > config_.k) fail("sink larger than k");
        if (window_.size() > config_.w) fail("window larger than w");
        if (old_.size() + buffer_.size() > config_.T) fail("old + buffer exceeds T");
        if (!buffer_.empty() && window_.size() < config_.w) fail("buffer filled before window");
        if (!window_.empty() && sink_.size() < config_.k) fail("window filled before sink");
        std::optional<std::size_t> prev;
        for_each_entry([&](const KvEntry& e) {
            if (prev && e.position <= *prev) fail("positions not strictly increasing");
            prev = e.position;
        });
    }

    nlohmann::json dump() const {
        auto list = [](const auto& region) {
            nlohmann::json a = nlohmann::json::array();
            for (const KvEntry& e : region) a.push_back(e.position);
            return a;
        };
        return {{"sink", list(sink_)},
                {"old", list(old_)},
                {"buffer", list(buffer_)},
                {"window", list(window_)}};
    }

private:
    template <class F>
    void for_each_entry(F&& f) const {
        for (const KvEntry& e : sink_) f(e);
        for (const KvEntry& e : old_) f(e);
        for (const KvEntry& e : buffer_) f(e);
        for (const KvEntry& e : window_) f(e);
    }
    template <class F>
    void for_each_entry_mut(F&& f) {
        for (KvEntry& e : sink_) f(e);
        for (KvEntry& e : old_) f(e);
        for (KvEntry& e : buffer_) f(e);
        for (KvEntry& e : window_) f(e);
    }

    BuzzConfig config_;
    std::vector<KvEntry> sink_;
    std::vector<KvEntry> old_;
    std::vector<KvEntry> buffer_;
    std::deque<KvEntry> window_;
    std::size_t epoch_ = 0;
    std::optional<std::size_t> last_position_;
};

}  // namespace hivekv
