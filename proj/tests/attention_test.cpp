// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "hivekv/attention.hpp"

namespace hivekv {
namespace {

// Dense scaled dot-product attention written out directly, no stabilization.
Vec dense_output(const Matrix& keys, const Matrix& values, const Vec& q, double scale,
                 Vec* probs_out = nullptr) {
    const std::size_t n = keys.rows();
    Vec w(n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double logit = 0.0;
        for (std::size_t c = 0; c < q.size(); ++c) logit += q[c] * keys(j, c);
        w[j] = std::exp(scale * logit);
        z += w[j];
    }
    Vec out(values.cols(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        w[j] /= z;
        for (std::size_t c = 0; c < values.cols(); ++c) out[c] += w[j] * values(j, c);
    }
    if (probs_out) *probs_out = w;
    return out;
}

TEST(ProjectToken, IdentityWeightsAndZeroInput) {
    const AttentionModel m = AttentionModel::identity(4);
    const Projection p = project_token(m, Vec{1, 0, 0, 0});
    EXPECT_EQ(p.q, (Vec{1, 0, 0, 0}));
    EXPECT_EQ(p.k, p.q);
    EXPECT_EQ(p.v, p.q);

    const AttentionModel seeded = AttentionModel::seeded(4, Seed{3});
    const Projection z = project_token(seeded, Vec(4, 0.0));
    EXPECT_EQ(z.q, Vec(4, 0.0));
    EXPECT_EQ(z.k, Vec(4, 0.0));
    EXPECT_EQ(z.v, Vec(4, 0.0));
}

TEST(ProjectToken, SeededMatchesMatvec) {
    const AttentionModel m = AttentionModel::seeded(6, Seed{11});
    const Vec x = seeded_gaussian_vector(Seed{12}, 6);
    const Projection p = project_token(m, x);
    for (std::size_t r = 0; r < 6; ++r) {
        double q = 0, k = 0, v = 0;
        for (std::size_t c = 0; c < 6; ++c) {
            q += m.wq(r, c) * x[c];
            k += m.wk(r, c) * x[c];
            v += m.wv(r, c) * x[c];
        }
        EXPECT_NEAR(p.q[r], q, 1e-12);
        EXPECT_NEAR(p.k[r], k, 1e-12);
        EXPECT_NEAR(p.v[r], v, 1e-12);
    }
}

TEST(ProjectToken, DimensionMismatchThrows) {
    EXPECT_THROW(project_token(AttentionModel::identity(3), Vec{1, 2}), std::invalid_argument);
}

TEST(AttentionScale, PlainAndLogN) {
    AttentionModel m = AttentionModel::identity(64);
    EXPECT_DOUBLE_EQ(attention_scale(m, 1), 1.0 / 8.0);
    m.logn_enabled = true;
    EXPECT_DOUBLE_EQ(attention_scale(m, 512), 1.0 / 8.0);
    EXPECT_NEAR(attention_scale(m, 262144), 2.0 / 8.0, 1e-15);
    EXPECT_THROW(attention_scale(m, 1), std::invalid_argument);

    AttentionModel small = AttentionModel::identity(16);
    small.logn_enabled = true;
    EXPECT_NEAR(attention_scale(small, 1000), std::log(1000.0) / std::log(512.0) / 4.0, 1e-15);
}

TEST(DecodeStep, SingletonCache) {
    const AttentionModel m = AttentionModel::identity(3);
    const Matrix k(1, 3, std::vector<double>{1, 2, 3});
    const Matrix v(1, 3, std::vector<double>{4, 5, 6});
    const StepOutput out = decode_step(m, k, v, Vec{0.5, -1, 2});
    EXPECT_EQ(out.probs, (Vec{1.0}));
    EXPECT_EQ(out.output, (Vec{4, 5, 6}));
}

TEST(DecodeStep, IdenticalKeysAverageValues) {
    const AttentionModel m = AttentionModel::identity(2);
    const Matrix k(2, 2, std::vector<double>{1, 1, 1, 1});
    const Matrix v(2, 2, std::vector<double>{2, 0, 0, 4});
    const StepOutput out = decode_step(m, k, v, Vec{3, -2});
    EXPECT_DOUBLE_EQ(out.probs[0], 0.5);
    EXPECT_DOUBLE_EQ(out.probs[1], 0.5);
    EXPECT_DOUBLE_EQ(out.output[0], 1.0);
    EXPECT_DOUBLE_EQ(out.output[1], 2.0);
}

TEST(DecodeStep, MatchesDenseFormula) {
    const AttentionModel m = AttentionModel::seeded(4, Seed{21});
    const Matrix keys = seeded_gaussian_matrix(Seed{22}, 8, 4, 1.0);
    const Matrix values = seeded_gaussian_matrix(Seed{23}, 8, 4, 1.0);
    const Vec q = seeded_gaussian_vector(Seed{24}, 4);
    Vec probs;
    const Vec want = dense_output(keys, values, q, 0.5, &probs);
    const StepOutput got = decode_step(m, keys, values, q);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(got.probs[i], probs[i], 1e-10);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(got.output[c], want[c], 1e-10);
}

TEST(DecodeStep, Errors) {
    const AttentionModel m = AttentionModel::identity(2);
    EXPECT_THROW(decode_step(m, Matrix(), Matrix(), Vec{1, 1}), std::invalid_argument);
    EXPECT_THROW(decode_step(m, Matrix(2, 2), Matrix(1, 2), Vec{1, 1}), std::invalid_argument);
}

TEST(DecodeStep, LogNCoincidesAtBase) {
    AttentionModel plain = AttentionModel::seeded(8, Seed{31});
    AttentionModel scaled = plain;
    scaled.logn_enabled = true;
    const Matrix keys = seeded_gaussian_matrix(Seed{32}, 512, 8, 1.0);
    const Matrix values = seeded_gaussian_matrix(Seed{33}, 512, 8, 1.0);
    const Vec q = seeded_gaussian_vector(Seed{34}, 8);
    const StepOutput a = decode_step(plain, keys, values, q);
    const StepOutput b = decode_step(scaled, keys, values, q);
    for (std::size_t i = 0; i < 512; ++i) EXPECT_NEAR(a.probs[i], b.probs[i], 1e-12);
}

// Property: output lies in the coordinate box of the value rows and the
// probabilities form a distribution.
TEST(DecodeStep, ConvexCombinationProperty) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const std::size_t n = 1 + s % 13;
        const AttentionModel m = AttentionModel::seeded(5, Seed{s});
        const Matrix keys = seeded_gaussian_matrix(Seed{s + 100}, n, 5, 2.0);
        const Matrix values = seeded_gaussian_matrix(Seed{s + 200}, n, 5, 2.0);
        const StepOutput out = decode_step(m, keys, values, seeded_gaussian_vector(Seed{s + 300}, 5));
        double total = 0.0;
        for (double p : out.probs) total += p;
        EXPECT_NEAR(total, 1.0, 1e-9);
        for (std::size_t c = 0; c < 5; ++c) {
            double lo = values(0, c), hi = values(0, c);
            for (std::size_t j = 1; j < n; ++j) {
                lo = std::min(lo, values(j, c));
                hi = std::max(hi, values(j, c));
            }
            EXPECT_GE(out.output[c], lo - 1e-12);
            EXPECT_LE(out.output[c], hi + 1e-12);
        }
    }
}

TEST(UpdateScores, Examples) {
    ScoreTracker t;
    t.add_token();
    t = update_scores(t, Vec{1.0});
    EXPECT_DOUBLE_EQ(t.tokens[0].accumulated, 1.0);
    EXPECT_EQ(t.tokens[0].steps_observed, 1u);

    ScoreTracker u;
    for (int i = 0; i < 4; ++i) u.add_token();
    u = update_scores(u, Vec(4, 0.25));
    u = update_scores(u, Vec(4, 0.25));
    for (const TokenScore& s : u.tokens) EXPECT_DOUBLE_EQ(s.accumulated, 0.5);

    EXPECT_THROW(update_scores(u, Vec(3, 0.1)), std::invalid_argument);
}

// Scores after a growing-cache decode equal the column sums of the stacked
// attention rows, are nondecreasing, and never exceed steps observed.
TEST(UpdateScores, ColumnSumOracle) {
    const AttentionModel m = AttentionModel::seeded(4, Seed{41});
    Matrix keys, values;
    ScoreTracker tracker;
    std::vector<Vec> rows;
    for (std::size_t t = 0; t < 20; ++t) {
        const Projection p = project_token(m, seeded_gaussian_vector(Seed{500 + t}, 4));
        keys.append_row(p.k);
        values.append_row(p.v);
        tracker.add_token();
        const StepOutput out = decode_step(m, keys, values, p.q);
        const ScoreTracker before = tracker;
        tracker = update_scores(tracker, out.probs);
        for (std::size_t j = 0; j < before.size(); ++j) {
            EXPECT_GE(tracker.tokens[j].accumulated, before.tokens[j].accumulated);
            EXPECT_LE(tracker.tokens[j].accumulated,
                      static_cast<double>(tracker.tokens[j].steps_observed) + 1e-12);
        }
        rows.push_back(out.probs);
    }
    for (std::size_t j = 0; j < 20; ++j) {
        double col = 0.0;
        for (const Vec& r : rows) {
            if (j < r.size()) col += r[j];
        }
        EXPECT_NEAR(tracker.tokens[j].accumulated, col, 1e-12);
        EXPECT_EQ(tracker.tokens[j].steps_observed, 20 - j);
    }
}

}  // namespace
}  // namespace hivekv
