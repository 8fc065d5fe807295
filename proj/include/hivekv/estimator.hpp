// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hivekv/numeric.hpp"

namespace hivekv {

enum class Parity { odd, even };

struct RatioPrediction {
    std::size_t stride = 0;
    double ratio = 0.0;  // recommended T / w
    Parity parity = Parity::odd;
};

/// Threshold-to-window ratio at which the old region settles at size w.
inline RatioPrediction optimal_ratio(std::size_t s) {
    if (s < 1) throw std::invalid_argument("optimal_ratio: stride must be >= 1");
    const auto sd = static_cast<double>(s);
    if (s % 2 == 1) return {s, (sd * sd + 1.0) / (sd + 1.0), Parity::odd};
    return {s, sd - 1.0, Parity::even};
}

/**
 * Old-region size across evictions. With a the old size after the previous
 * round, the next round keeps
 *
 *   sampling_ceil: ceil(a / s_hat) + ceil((T - a) / s)   (what the sampler does)
 *   proof_floor:   floor(a / s_hat) + floor((T - a) / s)
 *
 * Both start from floor(T / s). For odd s, a / s_hat == 2a / (s + 1).
 */
enum class RecursionVariant { sampling_ceil, proof_floor };

struct RecursionTrace {
    std::size_t stride = 0;
    std::size_t threshold = 0;
    RecursionVariant variant = RecursionVariant::sampling_ceil;
    std::vector<std::int64_t> a;
    bool converged = false;               // a value repeated within max_steps
    std::vector<std::int64_t> limit_set;  // the terminal cycle, length 1 at a fixed point
    std::size_t steps_to_converge = 0;    // index (1-based) where the cycle is first entered

    bool fixed_point() const { return converged && limit_set.size() == 1; }
    std::int64_t limit_sup() const { return *std::ranges::max_element(limit_set); }
    std::int64_t limit_inf() const { return *std::ranges::min_element(limit_set); }
};

namespace detail {
inline std::int64_t div_floor(std::int64_t a, std::int64_t b) { return a / b; }
inline std::int64_t div_ceil(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
}  // namespace detail

inline std::int64_t recursion_step(std::size_t s, std::size_t T, RecursionVariant variant,
                                   std::int64_t a) {
    const auto stride = static_cast<std::int64_t>(s);
    const auto small = static_cast<std::int64_t>((s + 1) / 2);
    const std::int64_t fresh = static_cast<std::int64_t>(T) - a;
    if (variant == RecursionVariant::proof_floor) {
        return detail::div_floor(a, small) + detail::div_floor(fresh, stride);
    }
    return detail::div_ceil(a, small) + detail::div_ceil(fresh, stride);
}

inline RecursionTrace simulate_recursion(std::size_t s, std::size_t T, std::size_t max_steps,
                                         RecursionVariant variant = RecursionVariant::sampling_ceil) {
    if (s < 1) throw std::invalid_argument("simulate_recursion: stride must be >= 1");
    if (T < s) throw std::invalid_argument("simulate_recursion: threshold must be >= stride");
    if (max_steps < 1) throw std::invalid_argument("simulate_recursion: max_steps must be >= 1");

    RecursionTrace trace;
    trace.stride = s;
    trace.threshold = T;
    trace.variant = variant;
    std::map<std::int64_t, std::size_t> seen;
    std::int64_t a = static_cast<std::int64_t>(T / s);
    for (std::size_t n = 0; n < max_steps; ++n) {
        if (auto it = seen.find(a); it != seen.end()) {
            trace.converged = true;
            trace.steps_to_converge = it->second + 1;
            trace.limit_set.assign(trace.a.begin() + static_cast<std::ptrdiff_t>(it->second),
                                   trace.a.end());
            return trace;
        }
        seen.emplace(a, trace.a.size());
        trace.a.push_back(a);
        a = recursion_step(s, T, variant, a);
    }
    return trace;
}

/**
 * Limit bounds on the recursion. With lambda = 1/s_hat - 1/s and
 * m = 1 - lambda (= (s^2+1)/(s^2+s) for odd s, (s-1)/s for even s):
 *
 *   proof_floor:   T/s - 2 <  m * liminf <= m * limsup <= T/s
 *   sampling_ceil: T/s     <= m * liminf <= m * limsup <  T/s + 2
 */
struct BoundCheck {
    bool holds = false;
    double lower = 0.0;
    double upper = 0.0;
    double scaled_inf = 0.0;  // m * liminf
    double scaled_sup = 0.0;  // m * limsup
    double lower_margin = 0.0;
    double upper_margin = 0.0;
};

inline double limit_coefficient(std::size_t s) {
    const auto small = static_cast<double>((s + 1) / 2);
    return 1.0 - (1.0 / small - 1.0 / static_cast<double>(s));
}

inline BoundCheck check_limsup_bounds(const RecursionTrace& trace) {
    if (!trace.converged) {
        throw std::logic_error("check_limsup_bounds: trace did not converge");
    }
    const double m = limit_coefficient(trace.stride);
    const double base = static_cast<double>(trace.threshold) / static_cast<double>(trace.stride);
    BoundCheck check;
    check.scaled_inf = m * static_cast<double>(trace.limit_inf());
    check.scaled_sup = m * static_cast<double>(trace.limit_sup());
    constexpr double eps = 1e-9;
    if (trace.variant == RecursionVariant::proof_floor) {
        check.lower = base - 2.0;
        check.upper = base;
        check.holds = check.scaled_inf > check.lower && check.scaled_sup <= check.upper + eps;
    } else {
        check.lower = base;
        check.upper = base + 2.0;
        check.holds = check.scaled_inf >= check.lower - eps && check.scaled_sup < check.upper;
    }
    check.lower_margin = check.scaled_inf - check.lower;
    check.upper_margin = check.upper - check.scaled_sup;
    return check;
}

/// H(softmax(lambda * scores)) in nats.
inline double softmax_entropy(std::span<const double> scores, double lambda) {
    const Vec p = softmax(scores, lambda);
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return std::clamp(h, 0.0, std::log(static_cast<double>(scores.size())));
}

enum class ScalePolicy { constant, logn };

inline double entropy_lambda(ScalePolicy policy, std::size_t n, std::size_t base) {
    if (policy == ScalePolicy::constant) return 1.0;
    return std::log(static_cast<double>(n)) / std::log(static_cast<double>(base));
}

/// Mean entropy per n over `trials` draws of n i.i.d. standard-normal scores.
/// Trial t at length n draws from derive_seed(derive_seed(seed, n), t), so
/// both policies see the same scores.
inline Vec entropy_curve(std::span<const std::size_t> n_grid, Seed seed, ScalePolicy policy,
                         std::size_t trials = 100, std::size_t base = 512) {
    if (trials < 1) throw std::invalid_argument("entropy_curve: trials must be >= 1");
    if (base < 2) throw std::invalid_argument("entropy_curve: base must be >= 2");
    Vec out;
    out.reserve(n_grid.size());
    for (std::size_t n : n_grid) {
        if (n < 1) throw std::invalid_argument("entropy_curve: n must be >= 1");
        if (n == 1) {
            out.push_back(0.0);
            continue;
        }
        const double lambda = entropy_lambda(policy, n, base);
        double total = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const Vec scores = seeded_gaussian_vector(derive_seed(derive_seed(seed, n), t), n);
            total += softmax_entropy(scores, lambda);
        }
        out.push_back(total / static_cast<double>(trials));
    }
    return out;
}

struct EntropyProbe {
    std::vector<std::size_t> n_grid;
    std::size_t trials = 0;
    std::size_t base = 512;
    Vec entropies_constant;
    Vec entropies_logn;
    double reference_constant = 0.0;  // mean entropy at n = base
    double reference_logn = 0.0;

    /// max over the grid of |H(n) - H(base)|.
    double drift(ScalePolicy policy) const {
        const Vec& h = policy == ScalePolicy::constant ? entropies_constant : entropies_logn;
        const double ref = policy == ScalePolicy::constant ? reference_constant : reference_logn;
        double worst = 0.0;
        for (double x : h) worst = std::max(worst, std::abs(x - ref));
        return worst;
    }
};

inline EntropyProbe entropy_probe(std::vector<std::size_t> n_grid, Seed seed,
                                  std::size_t trials = 100, std::size_t base = 512) {
    EntropyProbe probe;
    probe.trials = trials;
    probe.base = base;
    probe.entropies_constant = entropy_curve(n_grid, seed, ScalePolicy::constant, trials, base);
    probe.entropies_logn = entropy_curve(n_grid, seed, ScalePolicy::logn, trials, base);
    const std::size_t ref[] = {base};
    probe.reference_constant = entropy_curve(ref, seed, ScalePolicy::constant, trials, base)[0];
    probe.reference_logn = entropy_curve(ref, seed, ScalePolicy::logn, trials, base)[0];
    probe.n_grid = std::move(n_grid);
    return probe;
}

}  // namespace hivekv
