// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hivekv/estimator.hpp"
#include "hivekv/experiment.hpp"

namespace hivekv {

/// Raised for any malformed or inconsistent configuration input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Flat "section.key" -> text view of a configuration source.
using ConfigMap = std::map<std::string, std::string>;

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "cache.k",           "cache.w",
        "cache.stride",      "cache.threshold",
        "policy.kind",       "policy.budget",
        "workload.kind",     "workload.n",
        "workload.d",        "workload.seed",
        "workload.spike_position", "workload.spike_strength",
        "model.logn",        "model.logn_base",
        "output.path",       "output.csv",
        "sweep.grid",        "sweep.capacity",
        "sweep.jobs",
    };
    return keys;
}

/**
 * Reads an INI-style file:
 *
 *   [cache]
 *   k = 4
 *   stride = 5
 *   [workload]
 *   kind = middle_spike
 *
 * Keys outside known_config_keys() are rejected.
 */
inline ConfigMap load_config_file(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot read config '" + path + "': " + e.what());
    }
    ConfigMap out;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError("config key '" + section + "' must live inside a [section]");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (!known_config_keys().contains(full)) {
                throw ConfigError("unknown config key '" + full + "'");
            }
            out[full] = value.get_value<std::string>();
        }
    }
    return out;
}

namespace detail {

inline std::uint64_t parse_u64(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(text) + "'");
    }
    return v;
}

inline double parse_real(std::string_view key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
        throw ConfigError("'" + std::string(key) + "' expects a finite number, got '" + text + "'");
    }
    return v;
}

inline bool parse_bool(std::string_view key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("'" + std::string(key) + "' expects a boolean, got '" + text + "'");
}

}  // namespace detail

inline std::vector<double> parse_real_list(std::string_view key, const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(detail::parse_real(key, item));
    if (out.empty()) throw ConfigError("'" + std::string(key) + "' is empty");
    return out;
}

inline std::vector<std::size_t> parse_count_list(std::string_view key, const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(detail::parse_u64(key, item));
    if (out.empty()) throw ConfigError("'" + std::string(key) + "' is empty");
    return out;
}

struct SweepSettings {
    std::vector<double> grid = {1.5, 2.5, 3.5, 4.5, 5.5, 6.5};
    std::size_t capacity = 200;  // k + T + w held constant
    std::size_t jobs = 1;
};

/// A fully resolved and validated run description.
struct RunConfig {
    ExperimentSpec experiment;
    std::string output_path;  // empty: stdout
    std::string csv_path;     // empty: no CSV
    SweepSettings sweep;
};

inline std::optional<Seed> seed_from_env() {
    const char* raw = std::getenv("HIVEKV_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    return Seed{detail::parse_u64("HIVEKV_SEED", raw)};
}

/**
 * Resolves layered sources into a RunConfig. Later layers win; the built-in
 * defaults (k=4, w=64, s=5, T = round(w * optimal_ratio(s)), seed from
 * HIVEKV_SEED or 42) sit underneath everything.
 */
inline RunConfig resolve_config(const std::vector<ConfigMap>& layers) {
    ConfigMap merged;
    for (const ConfigMap& layer : layers) {
        for (const auto& [key, value] : layer) {
            if (!known_config_keys().contains(key)) {
                throw ConfigError("unknown config key '" + key + "'");
            }
            merged[key] = value;
        }
    }
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = merged.find(key);
        return it == merged.end() ? nullptr : &it->second;
    };
    auto count = [&](const std::string& key, std::size_t fallback) -> std::size_t {
        const std::string* v = get(key);
        return v ? detail::parse_u64(key, *v) : fallback;
    };

    RunConfig cfg;
    ExperimentSpec& spec = cfg.experiment;
    BuzzConfig& c = spec.policy.cache;
    c.k = count("cache.k", 4);
    c.w = count("cache.w", 64);
    c.s = count("cache.stride", 5);
    if (c.s < 1) throw ConfigError("'cache.stride' must be >= 1");
    if (const std::string* v = get("cache.threshold")) {
        c.T = detail::parse_u64("cache.threshold", *v);
    } else {
        c.T = std::max<std::size_t>(
            c.s, static_cast<std::size_t>(
                     std::lround(static_cast<double>(c.w) * optimal_ratio(c.s).ratio)));
    }

    try {
        if (const std::string* v = get("policy.kind")) spec.policy.kind = parse_policy_kind(*v);
        if (const std::string* v = get("workload.kind")) {
            spec.workload.kind = parse_workload_kind(*v);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    spec.policy.budget = count("policy.budget", c.capacity());

    Workload& w = spec.workload;
    w.n = count("workload.n", 1024);
    w.d = count("workload.d", 64);
    if (const std::string* v = get("workload.seed")) {
        w.seed = Seed{detail::parse_u64("workload.seed", *v)};
    } else {
        w.seed = seed_from_env().value_or(Seed{42});
    }
    if (const std::string* v = get("workload.spike_position")) {
        w.spike_position = detail::parse_u64("workload.spike_position", *v);
    }
    if (const std::string* v = get("workload.spike_strength")) {
        w.spike_strength = detail::parse_real("workload.spike_strength", *v);
    }

    if (const std::string* v = get("model.logn")) spec.logn = detail::parse_bool("model.logn", *v);
    spec.logn_base = count("model.logn_base", 512);

    if (const std::string* v = get("output.path")) cfg.output_path = *v;
    if (const std::string* v = get("output.csv")) cfg.csv_path = *v;

    if (const std::string* v = get("sweep.grid")) cfg.sweep.grid = parse_real_list("sweep.grid", *v);
    cfg.sweep.capacity = count("sweep.capacity", cfg.sweep.capacity);
    cfg.sweep.jobs = std::max<std::size_t>(1, count("sweep.jobs", 1));

    try {
        spec.policy.validate();
        spec.workload.validate_against(c.k, c.w);
        if (spec.logn_base < 2) throw std::invalid_argument("model.logn_base must be >= 2");
        if (w.n < 1 || w.d < 1) throw std::invalid_argument("workload n and d must be >= 1");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace hivekv
