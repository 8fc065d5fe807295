// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hivekv/attention.hpp"
#include "hivekv/numeric.hpp"

namespace hivekv {

enum class WorkloadKind { uniform, middle_spike, skewed_decay };

inline std::string_view to_string(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::uniform: return "uniform";
        case WorkloadKind::middle_spike: return "middle_spike";
        case WorkloadKind::skewed_decay: return "skewed_decay";
    }
    return "unknown";
}

inline WorkloadKind parse_workload_kind(std::string_view name) {
    for (WorkloadKind kind :
         {WorkloadKind::uniform, WorkloadKind::middle_spike, WorkloadKind::skewed_decay}) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown workload '" + std::string(name) + "'");
}

/**
 * Synthetic token stream.
 *
 *  uniform       x_t ~ N(0, I). No token is favoured by the queries.
 *  middle_spike  x_t = mu + e_t with a shared topic mu ~ N(0, I), so queries
 *                share the mean direction qbar. The token at spike_position
 *                is mu + W_K^-1 (c * qbar / |qbar|): its key gains c along the
 *                mean direction of the queries that follow it.
 *  skewed_decay  like middle_spike but every token t gets the boost scaled by
 *                exp(-16 t / N); early tokens act as attention sinks and the
 *                preference decays along the stream.
 *
 * c is spike_strength.
 */
struct Workload {
    WorkloadKind kind = WorkloadKind::uniform;
    std::size_t n = 1024;
    std::size_t d = 64;
    Seed seed{42};
    std::optional<std::size_t> spike_position;
    double spike_strength = 8.0;

    std::size_t resolved_spike_position() const { return spike_position.value_or(n / 2); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("workload: n must be >= 1");
        if (d < 1) throw std::invalid_argument("workload: d must be >= 1");
        if (!std::isfinite(spike_strength) || spike_strength < 0.0) {
            throw std::invalid_argument("workload: spike_strength must be finite and >= 0");
        }
        if (kind == WorkloadKind::middle_spike) {
            const std::size_t p = resolved_spike_position();
            if (p + 1 >= n) {
                throw std::invalid_argument("workload: spike position " + std::to_string(p) +
                                            " leaves no later queries in a stream of " +
                                            std::to_string(n));
            }
        } else if (spike_position) {
            throw std::invalid_argument("workload: spike_position only applies to middle_spike");
        }
    }

    /// Spike must sit outside the sink and the final window.
    void validate_against(std::size_t k, std::size_t w) const {
        validate();
        if (kind != WorkloadKind::middle_spike) return;
        const std::size_t p = resolved_spike_position();
        if (p < k + w || p + w >= n) {
            throw std::invalid_argument("workload: spike position " + std::to_string(p) +
                                        " outside [k+w, N-w) = [" + std::to_string(k + w) + ", " +
                                        std::to_string(n >= w ? n - w : 0) + ")");
        }
    }
};

inline std::vector<Vec> generate_workload(const Workload& spec, const AttentionModel& model) {
    spec.validate();
    if (model.d != spec.d) {
        throw std::invalid_argument("generate_workload: model d " + std::to_string(model.d) +
                                    " != workload d " + std::to_string(spec.d));
    }
    const std::size_t d = spec.d;
    GaussianSource noise(derive_seed(spec.seed, 10));
    std::vector<Vec> stream(spec.n, Vec(d));
    for (Vec& x : stream) {
        for (double& v : x) v = noise.next();
    }
    if (spec.kind == WorkloadKind::uniform) return stream;

    const Vec topic = seeded_gaussian_vector(derive_seed(spec.seed, 11), d);
    for (Vec& x : stream) {
        for (std::size_t i = 0; i < d; ++i) x[i] += topic[i];
    }

    // Direction the queries after `from` point to on average.
    auto query_direction = [&](std::size_t from) {
        Vec mean(d, 0.0);
        for (std::size_t t = from; t < spec.n; ++t) {
            const Vec q = matvec(model.wq, stream[t]);
            for (std::size_t i = 0; i < d; ++i) mean[i] += q[i];
        }
        const double len = norm2(mean);
        if (len == 0.0) throw std::invalid_argument("generate_workload: degenerate query mean");
        for (double& v : mean) v /= len;
        return mean;
    };

    if (spec.kind == WorkloadKind::middle_spike) {
        const std::size_t p = spec.resolved_spike_position();
        Vec target = query_direction(p + 1);
        for (double& v : target) v *= spec.spike_strength;
        const Vec lift = solve(model.wk, target);
        for (std::size_t i = 0; i < d; ++i) stream[p][i] += lift[i];
        return stream;
    }

    const Vec lift = solve(model.wk, query_direction(0));
    const double tau = static_cast<double>(spec.n) / 16.0;
    for (std::size_t t = 0; t < spec.n; ++t) {
        const double c = spec.spike_strength * std::exp(-static_cast<double>(t) / tau);
        for (std::size_t i = 0; i < d; ++i) stream[t][i] += c * lift[i];
    }
    return stream;
}

}  // namespace hivekv
