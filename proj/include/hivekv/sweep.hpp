// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hivekv/config.hpp"
#include "hivekv/experiment.hpp"

namespace hivekv {

struct SweepRow {
    double ratio = 0.0;  // requested T / w
    bool skipped = false;
    std::string reason;
    std::size_t w = 0;
    std::size_t T = 0;
    double mean_err_abs = 0.0;
    double mean_err_rel = 0.0;
    double max_err_rel = 0.0;
    double budget_pct = 0.0;
};

/// Splits capacity - k between w and T in the requested ratio.
inline ExperimentSpec sweep_point(const ExperimentSpec& base, std::size_t capacity, double ratio,
                                  std::string* why_infeasible) {
    ExperimentSpec spec = base;
    BuzzConfig& c = spec.policy.cache;
    auto infeasible = [&](std::string why) {
        if (why_infeasible) *why_infeasible = std::move(why);
        return spec;
    };
    if (!(ratio > 0.0) || !std::isfinite(ratio)) return infeasible("ratio must be positive");
    if (capacity <= c.k + 1) return infeasible("capacity leaves no room beyond the sink");
    const double room = static_cast<double>(capacity - c.k);
    const auto w = static_cast<long long>(std::lround(room / (1.0 + ratio)));
    if (w < 1) return infeasible("window would be smaller than 1");
    c.w = static_cast<std::size_t>(w);
    if (c.w >= capacity - c.k) return infeasible("threshold would be zero");
    c.T = capacity - c.k - c.w;
    if (c.T < c.s) return infeasible("threshold below stride");
    try {
        spec.policy.validate();
        spec.workload.validate_against(c.k, c.w);
    } catch (const std::invalid_argument& e) {
        return infeasible(e.what());
    }
    if (why_infeasible) why_infeasible->clear();
    return spec;
}

/// One run per grid ratio at constant k + T + w, at most settings.jobs at a time.
inline std::vector<SweepRow> ratio_sweep(const ExperimentSpec& base, const SweepSettings& settings) {
    std::vector<SweepRow> rows(settings.grid.size());
    std::vector<ExperimentSpec> specs;
    std::vector<std::size_t> runnable;
    for (std::size_t i = 0; i < settings.grid.size(); ++i) {
        rows[i].ratio = settings.grid[i];
        std::string why;
        ExperimentSpec spec = sweep_point(base, settings.capacity, settings.grid[i], &why);
        rows[i].w = spec.policy.cache.w;
        rows[i].T = spec.policy.cache.T;
        if (!why.empty()) {
            rows[i].skipped = true;
            rows[i].reason = why;
            continue;
        }
        specs.push_back(spec);
        runnable.push_back(i);
    }

    const std::size_t jobs = std::max<std::size_t>(1, settings.jobs);
    for (std::size_t begin = 0; begin < specs.size(); begin += jobs) {
        const std::size_t end = std::min(specs.size(), begin + jobs);
        std::vector<std::future<ApproxReport>> running;
        for (std::size_t j = begin; j < end; ++j) {
            running.push_back(std::async(std::launch::async,
                                         [spec = specs[j]] { return run_experiment(spec); }));
        }
        for (std::size_t j = begin; j < end; ++j) {
            const ApproxReport r = running[j - begin].get();
            SweepRow& row = rows[runnable[j]];
            row.mean_err_abs = r.mean_err_abs;
            row.mean_err_rel = r.mean_err_rel;
            row.max_err_rel = r.max_err_rel;
            row.budget_pct = r.budget_pct;
        }
    }
    return rows;
}

inline nlohmann::json to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        nlohmann::json row = {{"ratio", r.ratio}, {"w", r.w}, {"T", r.T}, {"skipped", r.skipped}};
        if (r.skipped) {
            row["warning"] = r.reason;
        } else {
            row["mean_err"] = r.mean_err_abs;
            row["mean_err_rel"] = r.mean_err_rel;
            row["max_err_rel"] = r.max_err_rel;
            row["budget_pct"] = r.budget_pct;
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace hivekv
