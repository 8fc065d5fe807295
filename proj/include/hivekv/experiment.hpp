// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hivekv/attention.hpp"
#include "hivekv/estimator.hpp"
#include "hivekv/eviction.hpp"
#include "hivekv/workload.hpp"

namespace hivekv {

/// Everything needed to reproduce one run. Model weights derive from workload.seed.
struct ExperimentSpec {
    Policy policy;
    Workload workload;
    bool logn = false;
    std::size_t logn_base = 512;

    AttentionModel model() const {
        return AttentionModel::seeded(workload.d, derive_seed(workload.seed, 1), logn, logn_base);
    }
};

struct StepRecord {
    std::size_t t = 0;
    double err_abs = 0.0;
    double err_rel = 0.0;
    std::size_t occupancy = 0;
};

using DecileHistogram = std::array<std::size_t, 10>;

struct ApproxReport {
    std::vector<StepRecord> steps;
    double mean_err_abs = 0.0;
    double max_err_abs = 0.0;
    double mean_err_rel = 0.0;
    double max_err_rel = 0.0;
    double mean_occupancy = 0.0;
    double budget_pct = 0.0;  // mean occupancy relative to the full cache
    DecileHistogram decile_hist{};
    std::uint64_t comparisons = 0;
    std::vector<std::size_t> kept_positions;
    std::vector<EvictionOutcome> evictions;
};

/// Kept-token counts per tenth of a stream of length n.
inline DecileHistogram positional_coverage(std::span<const std::size_t> kept, std::size_t n) {
    if (n == 0) throw std::invalid_argument("positional_coverage: n must be >= 1");
    DecileHistogram hist{};
    for (std::size_t p : kept) {
        if (p >= n) throw std::invalid_argument("positional_coverage: position beyond stream");
        ++hist[p * 10 / n];
    }
    return hist;
}

/// Mean cache size of a decode over n tokens when every step admits one token.
inline double full_mean_occupancy(std::size_t n) { return (static_cast<double>(n) + 1.0) / 2.0; }

/**
 * Decodes the workload twice in lockstep: once over the full cache and once
 * over the policy-managed cache, with the same query each step. Records
 * ||O_hat - O||_2 and its ratio to ||O||_2 per step.
 */
inline ApproxReport run_experiment(const AttentionModel& model, const Policy& policy,
                                   const Workload& workload) {
    model.validate();
    policy.validate();
    workload.validate_against(policy.cache.k, policy.cache.w);
    if (model.d != workload.d) {
        throw std::invalid_argument("run_experiment: model d " + std::to_string(model.d) +
                                    " != workload d " + std::to_string(workload.d));
    }
    const std::vector<Vec> stream = generate_workload(workload, model);

    ApproxReport report;
    report.steps.reserve(stream.size());
    Matrix dense_keys;
    Matrix dense_values;
    PolicyCache cache(policy);
    double occupancy_sum = 0.0;

    for (std::size_t t = 0; t < stream.size(); ++t) {
        Projection p = project_token(model, stream[t]);
        dense_keys.append_row(p.k);
        dense_values.append_row(p.v);
        cache.admit(KvEntry{std::move(p.k), std::move(p.v), t, {}}, t);

        const StepOutput dense = decode_step(model, dense_keys, dense_values, p.q);
        const CacheView view = cache.view();
        const StepOutput approx = decode_step(model, view.keys, view.values, p.q);
        cache.accumulate(approx.probs);
        cache.validate();

        Vec diff(dense.output.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = approx.output[i] - dense.output[i];
        StepRecord rec;
        rec.t = t;
        rec.err_abs = norm2(diff);
        const double ref = norm2(dense.output);
        rec.err_rel = ref > 0.0 ? rec.err_abs / ref : rec.err_abs;
        rec.occupancy = cache.size();
        occupancy_sum += static_cast<double>(rec.occupancy);
        report.steps.push_back(rec);
    }

    const auto steps = static_cast<double>(report.steps.size());
    for (const StepRecord& r : report.steps) {
        report.mean_err_abs += r.err_abs / steps;
        report.mean_err_rel += r.err_rel / steps;
        report.max_err_abs = std::max(report.max_err_abs, r.err_abs);
        report.max_err_rel = std::max(report.max_err_rel, r.err_rel);
    }
    report.mean_occupancy = occupancy_sum / steps;
    report.budget_pct = 100.0 * report.mean_occupancy / full_mean_occupancy(stream.size());
    report.kept_positions = cache.positions();
    report.decile_hist = positional_coverage(report.kept_positions, stream.size());
    report.comparisons = cache.comparisons();
    report.evictions = cache.evictions();
    return report;
}

inline ApproxReport run_experiment(const ExperimentSpec& spec) {
    return run_experiment(spec.model(), spec.policy, spec.workload);
}

/// Mean occupancy over n admitted tokens divided by the full cache's; scores are all zero.
inline double simulate_budget(const Policy& policy, std::size_t n) {
    PolicyCache cache(policy);
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        cache.admit(KvEntry{{}, {}, t, {}}, t);
        sum += static_cast<double>(cache.size());
    }
    return sum / static_cast<double>(n) / full_mean_occupancy(n);
}

/**
 * Sizes a policy so its mean occupancy over n steps is as close as possible
 * to `fraction` of the full cache. BUZZ variants keep base.k and base.s and
 * scan w with T = max(s, round(w * optimal_ratio(s))); sink_window keeps
 * base.k and scans w; local_window scans w; heavy_hitter_topk scans the
 * budget with a window of half the budget.
 */
inline Policy policy_at_budget(PolicyKind kind, std::size_t n, double fraction, BuzzConfig base) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("policy_at_budget: fraction must be in (0, 1]");
    }
    auto make = [&](std::size_t size) {
        Policy p{kind, base, 0};
        if (is_buzz(kind)) {
            p.cache.w = size;
            const double ratio = optimal_ratio(base.s).ratio;
            p.cache.T = std::max<std::size_t>(
                base.s, static_cast<std::size_t>(std::lround(static_cast<double>(size) * ratio)));
        } else if (kind == PolicyKind::heavy_hitter_topk) {
            p.budget = size;
            p.cache.w = std::max<std::size_t>(1, size / 2);
        } else {
            p.cache.w = size;
        }
        return p;
    };
    if (kind == PolicyKind::full) return Policy{kind, base, 0};

    Policy best = make(1);
    double best_gap = std::abs(simulate_budget(best, n) - fraction);
    for (std::size_t size = 2; size <= n; ++size) {
        const Policy candidate = make(size);
        const double got = simulate_budget(candidate, n);
        const double gap = std::abs(got - fraction);
        if (gap < best_gap) {
            best = candidate;
            best_gap = gap;
        }
        if (got > fraction + 0.1) break;
    }
    return best;
}

}  // namespace hivekv
