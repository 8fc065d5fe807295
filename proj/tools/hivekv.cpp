// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

// Batch runner for eviction experiments and parameter estimates.
//
// Exit codes: 0 success, 1 I/O failure, 2 bad configuration or usage,
// 3 internal invariant violation. Failures print {"error": {...}} on stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "hivekv/hivekv.hpp"

namespace {

using hivekv::ConfigMap;
using nlohmann::json;

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int fail(int code, const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
              << "\n";
    return code;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

/// Flags shared by run, sweep and validate-config. Unset flags leave the
/// lower configuration layers alone.
struct RunFlags {
    std::string config_path;
    ConfigMap values;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
        bind(cmd, "--policy", "policy.kind", "full|local_window|sink_window|heavy_hitter_topk|buzz|"
                                              "buzz_swapped_strides|buzz_no_local_max");
        bind(cmd, "--k", "cache.k", "sink size");
        bind(cmd, "--w", "cache.w", "sliding window size");
        bind(cmd, "--stride", "cache.stride", "stride for new tokens");
        bind(cmd, "--threshold", "cache.threshold", "cap on old + buffered tokens");
        bind(cmd, "--budget", "policy.budget", "heavy_hitter_topk token budget");
        bind(cmd, "--workload", "workload.kind", "uniform|middle_spike|skewed_decay");
        bind(cmd, "--n", "workload.n", "stream length");
        bind(cmd, "--d", "workload.d", "hidden dimension");
        bind(cmd, "--seed", "workload.seed", "root seed (default: $HIVEKV_SEED or 42)");
        bind(cmd, "--spike-position", "workload.spike_position", "middle_spike token index");
        bind(cmd, "--spike-strength", "workload.spike_strength", "spike key boost");
        bind(cmd, "--logn-base", "model.logn_base", "log-n scaling base");
        cmd.add_flag_function(
            "--logn", [this](std::int64_t) { values["model.logn"] = "true"; },
            "scale logits by log_base(n)");
        bind(cmd, "--out", "output.path", "report path (default stdout)");
        bind(cmd, "--csv", "output.csv", "also write per-step CSV here");
    }

    void bind(CLI::App& cmd, const std::string& flag, const std::string& key,
              const std::string& help) {
        cmd.add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }

    hivekv::RunConfig resolve() const {
        std::vector<ConfigMap> layers;
        if (!config_path.empty()) layers.push_back(hivekv::load_config_file(config_path));
        layers.push_back(values);
        return hivekv::resolve_config(layers);
    }
};

int cmd_run(const RunFlags& flags) {
    const hivekv::RunConfig cfg = flags.resolve();
    const hivekv::ApproxReport report = hivekv::run_experiment(cfg.experiment);
    write_text(cfg.output_path, hivekv::to_json(cfg.experiment, report).dump(2) + "\n");
    if (!cfg.csv_path.empty()) write_text(cfg.csv_path, hivekv::to_csv(report));
    return 0;
}

int cmd_sweep(const RunFlags& flags) {
    const hivekv::RunConfig cfg = flags.resolve();
    const auto rows = hivekv::ratio_sweep(cfg.experiment, cfg.sweep);
    for (const auto& row : rows) {
        if (row.skipped) {
            std::cerr << json{{"warning", {{"ratio", row.ratio}, {"reason", row.reason}}}}.dump()
                      << "\n";
        }
    }
    const json out = {{"schema_version", hivekv::kReportSchemaVersion},
                      {"config", hivekv::to_json(cfg.experiment)},
                      {"sweep",
                       {{"grid", cfg.sweep.grid},
                        {"capacity", cfg.sweep.capacity},
                        {"jobs", cfg.sweep.jobs}}},
                      {"rows", hivekv::to_json(rows)}};
    write_text(cfg.output_path, out.dump(2) + "\n");
    return 0;
}

int cmd_estimate(std::size_t stride) {
    const auto p = hivekv::optimal_ratio(stride);
    std::printf("stride %zu (%s): T/w = %.6f\n", p.stride,
                p.parity == hivekv::Parity::odd ? "odd" : "even", p.ratio);
    std::cout << json{{"stride", p.stride},
                      {"parity", p.parity == hivekv::Parity::odd ? "odd" : "even"},
                      {"ratio", p.ratio}}
                     .dump()
              << "\n";
    return 0;
}

json trace_json(const hivekv::RecursionTrace& t) {
    const auto bounds = hivekv::check_limsup_bounds(t);
    return {{"a", t.a},
            {"converged", t.converged},
            {"steps_to_converge", t.steps_to_converge},
            {"limit_set", t.limit_set},
            {"bounds",
             {{"holds", bounds.holds},
              {"lower", bounds.lower},
              {"upper", bounds.upper},
              {"scaled_inf", bounds.scaled_inf},
              {"scaled_sup", bounds.scaled_sup},
              {"lower_margin", bounds.lower_margin},
              {"upper_margin", bounds.upper_margin}}}};
}

int cmd_recursion(std::size_t stride, std::size_t threshold, std::size_t max_steps) {
    using hivekv::RecursionVariant;
    const auto ceil_trace =
        hivekv::simulate_recursion(stride, threshold, max_steps, RecursionVariant::sampling_ceil);
    const auto floor_trace =
        hivekv::simulate_recursion(stride, threshold, max_steps, RecursionVariant::proof_floor);
    if (!ceil_trace.converged || !floor_trace.converged) {
        throw std::invalid_argument("recursion did not converge within " +
                                    std::to_string(max_steps) + " steps");
    }
    const double predicted = static_cast<double>(threshold) /
                             (static_cast<double>(stride) * hivekv::limit_coefficient(stride));
    std::printf("stride %zu, threshold %zu: sampler settles at %lld after %zu steps "
                "(algebraic fixed point %.3f)\n",
                stride, threshold, static_cast<long long>(ceil_trace.limit_sup()),
                ceil_trace.steps_to_converge, predicted);
    std::cout << json{{"stride", stride},
                      {"threshold", threshold},
                      {"small_stride", (stride + 1) / 2},
                      {"algebraic_fixed_point", predicted},
                      {"sampling_ceil", trace_json(ceil_trace)},
                      {"proof_floor", trace_json(floor_trace)}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_entropy(const std::string& grid_text, std::uint64_t seed, std::size_t trials,
                std::size_t base) {
    const auto grid = hivekv::parse_count_list("--grid", grid_text);
    for (std::size_t n : grid) {
        if (n < 2) throw hivekv::ConfigError("--grid entries must be >= 2");
    }
    const auto probe = hivekv::entropy_probe(grid, hivekv::Seed{seed}, trials, base);
    std::printf("%8s %12s %12s\n", "n", "H_constant", "H_logn");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::printf("%8zu %12.6f %12.6f\n", grid[i], probe.entropies_constant[i],
                    probe.entropies_logn[i]);
    }
    const double drift_c = probe.drift(hivekv::ScalePolicy::constant);
    const double drift_l = probe.drift(hivekv::ScalePolicy::logn);
    std::printf("drift vs n=%zu: constant %.6f, logn %.6f\n", base, drift_c, drift_l);
    std::cout << json{{"n_grid", grid},
                      {"trials", trials},
                      {"seed", seed},
                      {"base", base},
                      {"entropies_constant", probe.entropies_constant},
                      {"entropies_logn", probe.entropies_logn},
                      {"drift_constant", drift_c},
                      {"drift_logn", drift_l}}
                     .dump()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hivekv: KV-cache eviction experiments"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "run one experiment and write a JSON report");
    run_flags.attach(*run);

    RunFlags sweep_flags;
    std::string sweep_grid;
    std::optional<std::size_t> sweep_capacity;
    std::optional<std::size_t> sweep_jobs;
    auto* sweep = app.add_subcommand("sweep", "error across T/w ratios at constant k + T + w");
    sweep_flags.attach(*sweep);
    sweep->add_option("--grid", sweep_grid, "comma-separated T/w ratios");
    sweep->add_option("--capacity", sweep_capacity, "k + T + w held constant");
    sweep->add_option("--jobs", sweep_jobs, "concurrent runs");

    RunFlags check_flags;
    auto* validate = app.add_subcommand("validate-config", "resolve and print a configuration");
    check_flags.attach(*validate);

    std::size_t est_stride = 5;
    auto* estimate = app.add_subcommand("estimate", "recommended T/w for a stride");
    estimate->add_option("--stride", est_stride)->required();

    std::size_t rec_stride = 5;
    std::size_t rec_threshold = 260;
    std::size_t rec_steps = 50;
    auto* recursion = app.add_subcommand("recursion", "iterate the old-region size recursion");
    recursion->add_option("--stride", rec_stride)->required();
    recursion->add_option("--threshold", rec_threshold)->required();
    recursion->add_option("--max-steps", rec_steps);

    std::string ent_grid = "64,128,256,512,1024,2048,4096,8192";
    std::optional<std::uint64_t> ent_seed;
    std::size_t ent_trials = 100;
    std::size_t ent_base = 512;
    auto* entropy = app.add_subcommand("entropy", "softmax entropy drift, constant vs log-n scale");
    entropy->add_option("--grid", ent_grid, "comma-separated lengths");
    entropy->add_option("--seed", ent_seed);
    entropy->add_option("--trials", ent_trials);
    entropy->add_option("--base", ent_base);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitConfig, "usage", e.what());
    }

    try {
        if (*run) return cmd_run(run_flags);
        if (*sweep) {
            if (!sweep_grid.empty()) sweep_flags.values["sweep.grid"] = sweep_grid;
            if (sweep_capacity) sweep_flags.values["sweep.capacity"] = std::to_string(*sweep_capacity);
            if (sweep_jobs) sweep_flags.values["sweep.jobs"] = std::to_string(*sweep_jobs);
            return cmd_sweep(sweep_flags);
        }
        if (*validate) {
            const auto cfg = check_flags.resolve();
            std::cout << json{{"valid", true}, {"config", hivekv::to_json(cfg.experiment)}}.dump(2)
                      << "\n";
            return 0;
        }
        if (*estimate) return cmd_estimate(est_stride);
        if (*recursion) return cmd_recursion(rec_stride, rec_threshold, rec_steps);
        if (*entropy) {
            const std::uint64_t seed =
                ent_seed.value_or(hivekv::seed_from_env().value_or(hivekv::Seed{42}).value);
            return cmd_entropy(ent_grid, seed, ent_trials, ent_base);
        }
    } catch (const IoError& e) {
        return fail(kExitIo, "io", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(kExitConfig, "config", e.what());
    } catch (const std::logic_error& e) {
        return fail(kExitInvariant, "invariant", e.what());
    } catch (const std::exception& e) {
        return fail(kExitInvariant, "internal", e.what());
    }
    return 0;
}
