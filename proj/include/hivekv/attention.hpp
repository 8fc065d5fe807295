// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hivekv/numeric.hpp"

namespace hivekv {

/**
 * Single-head, single-layer decoder attention with fixed weights.
 *
 * Tokens are projected by q = W_Q x, k = W_K x, v = W_V x. Logits are scaled
 * by 1/sqrt(d), or by log_base(n)/sqrt(d) when log-n scaling is enabled, where
 * n is the number of cached rows the query attends to.
 */
struct AttentionModel {
    std::size_t d = 0;
    Matrix wq;
    Matrix wk;
    Matrix wv;
    bool logn_enabled = false;
    std::size_t logn_base = 512;

    /// Gaussian weights with std 1/sqrt(d); W_Q, W_K, W_V use derived streams 0, 1, 2.
    static AttentionModel seeded(std::size_t d, Seed seed, bool logn_enabled = false,
                                 std::size_t logn_base = 512) {
        if (d == 0) throw std::invalid_argument("AttentionModel: d must be >= 1");
        const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
        AttentionModel m{d,
                         seeded_gaussian_matrix(derive_seed(seed, 0), d, d, stddev),
                         seeded_gaussian_matrix(derive_seed(seed, 1), d, d, stddev),
                         seeded_gaussian_matrix(derive_seed(seed, 2), d, d, stddev),
                         logn_enabled,
                         logn_base};
        m.validate();
        return m;
    }

    static AttentionModel identity(std::size_t d) {
        AttentionModel m{d, Matrix::identity(d), Matrix::identity(d), Matrix::identity(d)};
        m.validate();
        return m;
    }

    void validate() const {
        if (d == 0) throw std::invalid_argument("AttentionModel: d must be >= 1");
        for (const Matrix* w : {&wq, &wk, &wv}) {
            if (w->rows() != d || w->cols() != d) {
                throw std::invalid_argument("AttentionModel: weights must be " + std::to_string(d) +
                                            "x" + std::to_string(d));
            }
        }
        if (logn_base < 2) throw std::invalid_argument("AttentionModel: logn_base must be >= 2");
    }
};

struct Projection {
    Vec q;
    Vec k;
    Vec v;
};

inline Projection project_token(const AttentionModel& model, std::span<const double> x) {
    if (x.size() != model.d) {
        throw std::invalid_argument("project_token: embedding length " + std::to_string(x.size()) +
                                    " != d " + std::to_string(model.d));
    }
    return {matvec(model.wq, x), matvec(model.wk, x), matvec(model.wv, x)};
}

inline double attention_scale(const AttentionModel& model, std::size_t n) {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(model.d));
    if (!model.logn_enabled) {
        if (n < 1) throw std::invalid_argument("attention_scale: n must be >= 1");
        return inv_sqrt_d;
    }
    if (n < 2) {
        throw std::invalid_argument("attention_scale: log-n scaling needs n >= 2");
    }
    return std::log(static_cast<double>(n)) / std::log(static_cast<double>(model.logn_base)) *
           inv_sqrt_d;
}

struct StepOutput {
    Vec probs;   // attention distribution over cached rows
    Vec output;  // probability-weighted sum of value rows
};

inline StepOutput decode_step(const AttentionModel& model, const Matrix& keys, const Matrix& values,
                              std::span<const double> q) {
    if (keys.rows() == 0) throw std::invalid_argument("decode_step: empty cache");
    if (keys.rows() != values.rows()) {
        throw std::invalid_argument("decode_step: key/value row counts differ");
    }
    if (keys.cols() != q.size()) {
        throw std::invalid_argument("decode_step: query length does not match key width");
    }
    const std::size_t n = keys.rows();
    Vec logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = dot(q, keys.row(j));

    StepOutput out;
    out.probs = softmax(logits, attention_scale(model, n));
    out.output.assign(values.cols(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto v = values.row(j);
        const double p = out.probs[j];
        for (std::size_t c = 0; c < v.size(); ++c) out.output[c] += p * v[c];
    }
    return out;
}

/// Attention mass a token has received while cached.
struct TokenScore {
    double accumulated = 0.0;
    std::size_t steps_observed = 0;

    void observe(double p) {
        accumulated += p;
        ++steps_observed;
    }

    friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

/// Per-token accumulated attention, in cache row order.
struct ScoreTracker {
    std::vector<TokenScore> tokens;

    void add_token() { tokens.emplace_back(); }
    std::size_t size() const { return tokens.size(); }
};

inline ScoreTracker update_scores(ScoreTracker tracker, std::span<const double> probs) {
    if (probs.size() != tracker.size()) {
        throw std::invalid_argument("update_scores: got " + std::to_string(probs.size()) +
                                    " probabilities for " + std::to_string(tracker.size()) +
                                    " tracked tokens");
    }
    for (std::size_t i = 0; i < probs.size(); ++i) tracker.tokens[i].observe(probs[i]);
    return tracker;
}

}  // namespace hivekv
