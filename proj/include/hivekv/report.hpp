// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "hivekv/experiment.hpp"

namespace hivekv {

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::json to_json(const ExperimentSpec& spec) {
    const Workload& w = spec.workload;
    const BuzzConfig& c = spec.policy.cache;
    nlohmann::json spike = nullptr;
    if (w.spike_position) spike = *w.spike_position;
    return {
        {"cache", {{"k", c.k}, {"w", c.w}, {"stride", c.s}, {"threshold", c.T}}},
        {"policy", {{"kind", to_string(spec.policy.kind)}, {"budget", spec.policy.budget}}},
        {"workload",
         {{"kind", to_string(w.kind)},
          {"n", w.n},
          {"d", w.d},
          {"seed", w.seed.value},
          {"spike_position", spike},
          {"spike_strength", w.spike_strength}}},
        {"model", {{"logn", spec.logn}, {"logn_base", spec.logn_base}}},
    };
}

/// Inverse of to_json(ExperimentSpec); every key is required.
inline ExperimentSpec experiment_spec_from_json(const nlohmann::json& j) {
    try {
        ExperimentSpec spec;
        const auto& c = j.at("cache");
        spec.policy.cache = {c.at("k").get<std::size_t>(), c.at("w").get<std::size_t>(),
                             c.at("stride").get<std::size_t>(),
                             c.at("threshold").get<std::size_t>()};
        const auto& p = j.at("policy");
        spec.policy.kind = parse_policy_kind(p.at("kind").get<std::string>());
        spec.policy.budget = p.at("budget").get<std::size_t>();
        const auto& w = j.at("workload");
        spec.workload.kind = parse_workload_kind(w.at("kind").get<std::string>());
        spec.workload.n = w.at("n").get<std::size_t>();
        spec.workload.d = w.at("d").get<std::size_t>();
        spec.workload.seed = Seed{w.at("seed").get<std::uint64_t>()};
        if (!w.at("spike_position").is_null()) {
            spec.workload.spike_position = w.at("spike_position").get<std::size_t>();
        }
        spec.workload.spike_strength = w.at("spike_strength").get<double>();
        const auto& m = j.at("model");
        spec.logn = m.at("logn").get<bool>();
        spec.logn_base = m.at("logn_base").get<std::size_t>();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad embedded config: ") + e.what());
    }
}

inline nlohmann::json per_step_json(const ApproxReport& report) {
    nlohmann::json steps = nlohmann::json::array();
    for (const StepRecord& r : report.steps) {
        steps.push_back({{"t", r.t},
                         {"err_abs", r.err_abs},
                         {"err_rel", r.err_rel},
                         {"occupancy", r.occupancy}});
    }
    return steps;
}

inline nlohmann::json to_json(const ExperimentSpec& spec, const ApproxReport& report) {
    return {
        {"schema_version", kReportSchemaVersion},
        {"config", to_json(spec)},
        {"policy", to_string(spec.policy.kind)},
        {"workload", to_string(spec.workload.kind)},
        {"per_step", per_step_json(report)},
        {"summary",
         {{"mean_err", report.mean_err_abs},
          {"max_err", report.max_err_abs},
          {"mean_err_rel", report.mean_err_rel},
          {"max_err_rel", report.max_err_rel},
          {"mean_occupancy", report.mean_occupancy},
          {"budget_pct", report.budget_pct},
          {"decile_hist", report.decile_hist},
          {"comparisons", report.comparisons},
          {"evictions", report.evictions.size()},
          {"kept_count", report.kept_positions.size()}}},
    };
}

inline constexpr const char* kCsvHeader = "t,err_abs,err_rel,occupancy";

/// One row per step; reals printed with %.17g so they round-trip.
inline std::string to_csv(const ApproxReport& report) {
    std::string out = std::string(kCsvHeader) + "\n";
    char line[128];
    for (const StepRecord& r : report.steps) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%zu\n", r.t, r.err_abs, r.err_rel,
                      r.occupancy);
        out += line;
    }
    return out;
}

}  // namespace hivekv
