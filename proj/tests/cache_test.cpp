// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "hivekv/cache.hpp"
#include "hivekv/eviction.hpp"

namespace hivekv {
namespace {

KvEntry token(std::size_t pos, double score = 0.0, std::size_t d = 0) {
    KvEntry e;
    e.key = Vec(d, static_cast<double>(pos));
    e.value = Vec(d, -static_cast<double>(pos));
    e.position = pos;
    e.score.accumulated = score;
    return e;
}

std::vector<std::size_t> positions(const auto& region) {
    std::vector<std::size_t> out;
    for (const KvEntry& e : region) out.push_back(e.position);
    return out;
}

using P = std::vector<std::size_t>;

TEST(AppendToken, WarmupFillsSinkThenWindow) {
    CacheState c(BuzzConfig{2, 3, 2, 10});
    for (std::size_t i = 0; i < 5; ++i) c.append_token(token(i));
    EXPECT_EQ(positions(c.sink()), (P{0, 1}));
    EXPECT_EQ(positions(c.window()), (P{2, 3, 4}));
    EXPECT_TRUE(c.buffer().empty());

    c.append_token(token(5));
    EXPECT_EQ(positions(c.window()), (P{3, 4, 5}));
    EXPECT_EQ(positions(c.buffer()), (P{2}));
    c.validate();
}

// k=1, w=2, T=4: tokens 0 sink, 1-2 window, then 3..6 push 1..4 into the
// buffer. The flag rises with the 7th token; the round runs when the 8th arrives.
TEST(AppendToken, EvictionDueTiming) {
    CacheState c(BuzzConfig{1, 2, 2, 4});
    for (std::size_t i = 0; i < 6; ++i) EXPECT_FALSE(c.append_token(token(i))) << i;
    EXPECT_TRUE(c.append_token(token(6)));
    EXPECT_EQ(c.occupancy().middle(), 4u);

    PolicyCache pc(Policy{PolicyKind::buzz, BuzzConfig{1, 2, 3, 4}, 0});
    for (std::size_t i = 0; i < 7; ++i) pc.admit(token(i), i);
    EXPECT_TRUE(pc.evictions().empty());
    pc.admit(token(7), 7);
    ASSERT_EQ(pc.evictions().size(), 1u);
    EXPECT_EQ(pc.evictions()[0].step, 7u);
}

TEST(AppendToken, RejectsNonMonotonePosition) {
    CacheState c(BuzzConfig{1, 2, 2, 4});
    c.append_token(token(3));
    EXPECT_THROW(c.append_token(token(3)), std::invalid_argument);
    EXPECT_THROW(c.append_token(token(1)), std::invalid_argument);
}

TEST(BuzzConfigTest, DerivedValuesAndValidation) {
    const BuzzConfig c{4, 64, 5, 260};
    EXPECT_EQ(c.small_stride(), 3u);
    EXPECT_EQ(c.capacity(), 328u);
    EXPECT_EQ((BuzzConfig{0, 1, 4, 4}).small_stride(), 2u);
    EXPECT_EQ((BuzzConfig{0, 1, 1, 4}).small_stride(), 1u);
    EXPECT_THROW(CacheState(BuzzConfig{1, 0, 2, 4}), std::invalid_argument);
    EXPECT_THROW(CacheState(BuzzConfig{1, 2, 0, 4}), std::invalid_argument);
    EXPECT_THROW(CacheState(BuzzConfig{1, 2, 5, 4}), std::invalid_argument);
}

TEST(ConcatRegions, EmptyAndSinkOnly) {
    CacheState c(BuzzConfig{3, 2, 2, 4});
    const CacheView empty = c.concat_regions();
    EXPECT_EQ(empty.keys.rows(), 0u);
    EXPECT_EQ(empty.values.rows(), 0u);

    for (std::size_t i = 0; i < 3; ++i) c.append_token(token(i, 0.0, 2));
    const CacheView v = c.concat_regions();
    ASSERT_EQ(v.keys.rows(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(v.keys(i, 0), static_cast<double>(i));
        EXPECT_EQ(v.values(i, 1), -static_cast<double>(i));
    }
}

// Rows come out sink -> old -> buffer -> window, which must equal a plain
// sort by original position.
TEST(ConcatRegions, RowOrderMatchesSortOracle) {
    std::mt19937_64 rng(99);
    PolicyCache pc(Policy{PolicyKind::buzz, BuzzConfig{2, 5, 3, 12}, 0});
    std::size_t pos = 0;
    for (std::size_t step = 0; step < 80; ++step) {
        pos += 1 + rng() % 3;
        pc.admit(token(pos, static_cast<double>(rng() % 1000), 1), step);
        const CacheView v = pc.view();
        P sorted = v.positions;
        std::ranges::sort(sorted);
        EXPECT_EQ(v.positions, sorted);
        for (std::size_t r = 0; r < v.keys.rows(); ++r) {
            EXPECT_EQ(v.keys(r, 0), static_cast<double>(v.positions[r]));
        }
    }
}

TEST(OccupancyTest, FreshAndWarm) {
    CacheState c(BuzzConfig{4, 64, 5, 260});
    EXPECT_EQ(c.occupancy().total(), 0u);
    for (std::size_t i = 0; i < 68; ++i) c.append_token(token(i));
    const Occupancy o = c.occupancy();
    EXPECT_EQ(o.total(), 68u);
    EXPECT_EQ(o.sink, 4u);
    EXPECT_EQ(o.window, 64u);
}

// Long runs with random score updates: container bound, disjointness, and
// no fabricated or duplicated positions.
TEST(OccupancyTest, ContainerBoundAcrossSeeds) {
    const BuzzConfig cfg{4, 64, 5, 260};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        PolicyCache pc(Policy{PolicyKind::buzz, cfg, 0});
        for (std::size_t t = 0; t < 3000; ++t) {
            pc.admit(token(t), t);
            Vec probs(pc.size());
            double z = 0.0;
            for (double& p : probs) z += (p = unit(rng));
            for (double& p : probs) p /= z;
            pc.accumulate(probs);
            pc.validate();
            ASSERT_LE(pc.size(), cfg.capacity());
            const P kept = pc.positions();
            const std::set<std::size_t> unique(kept.begin(), kept.end());
            ASSERT_EQ(unique.size(), kept.size());
            ASSERT_LE(kept.back(), t);
        }
    }
}

TEST(CacheStateDump, ListsRegions) {
    CacheState c(BuzzConfig{1, 2, 2, 4});
    for (std::size_t i = 0; i < 5; ++i) c.append_token(token(i));
    const nlohmann::json j = c.dump();
    EXPECT_EQ(j["sink"], nlohmann::json::parse("[0]"));
    EXPECT_EQ(j["old"], nlohmann::json::array());
    EXPECT_EQ(j["buffer"], nlohmann::json::parse("[1,2]"));
    EXPECT_EQ(j["window"], nlohmann::json::parse("[3,4]"));
}

TEST(CacheStateValidate, DetectsBrokenOrder) {
    CacheState c(BuzzConfig{1, 2, 2, 4});
    std::vector<KvEntry> sink{token(5)};
    std::vector<KvEntry> old{token(3)};
    std::deque<KvEntry> window{token(6), token(7)};
    EXPECT_THROW(c.install(sink, old, {}, window, 1), std::logic_error);
}

TEST(CacheStateAccumulate, LengthMismatchThrows) {
    CacheState c(BuzzConfig{1, 2, 2, 4});
    c.append_token(token(0));
    EXPECT_THROW(c.accumulate(Vec{0.5, 0.5}), std::invalid_argument);
    c.accumulate(Vec{1.0});
    EXPECT_DOUBLE_EQ(c.sink()[0].score.accumulated, 1.0);
}

}  // namespace
}  // namespace hivekv
