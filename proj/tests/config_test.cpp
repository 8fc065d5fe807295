// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hivekv/config.hpp"

namespace hivekv {
namespace {

namespace fs = std::filesystem;

class ConfigFile : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hivekv_config_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        unsetenv("HIVEKV_SEED");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& text) {
        const fs::path p = dir_ / "run.ini";
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir_;
};

TEST_F(ConfigFile, ParsesSections) {
    const ConfigMap m = load_config_file(write(
        "; comment\n[cache]\nk = 2\nw = 32\nstride = 3\n\n[workload]\nkind = middle_spike\nn = 512\n"));
    EXPECT_EQ(m.at("cache.k"), "2");
    EXPECT_EQ(m.at("cache.w"), "32");
    EXPECT_EQ(m.at("workload.kind"), "middle_spike");
    const RunConfig cfg = resolve_config({m});
    EXPECT_EQ(cfg.experiment.policy.cache.s, 3u);
    EXPECT_EQ(cfg.experiment.policy.cache.T, 80u);  // round(32 * 2.5)
    EXPECT_EQ(cfg.experiment.workload.n, 512u);
    EXPECT_EQ(cfg.experiment.workload.kind, WorkloadKind::middle_spike);
}

TEST_F(ConfigFile, RejectsUnknownKeysAndBadSyntax) {
    EXPECT_THROW(load_config_file(write("[cache]\nsize = 3\n")), ConfigError);
    EXPECT_THROW(load_config_file(write("[cache\nk = 1\n")), ConfigError);
    EXPECT_THROW(load_config_file(write("k = 1\n")), ConfigError);
    EXPECT_THROW(load_config_file((dir_ / "missing.ini").string()), ConfigError);
}

TEST_F(ConfigFile, LaterLayersWin) {
    const ConfigMap file = load_config_file(write("[cache]\nw = 32\n[policy]\nkind = sink_window\n"));
    const RunConfig cfg = resolve_config({file, {{"cache.w", "16"}}});
    EXPECT_EQ(cfg.experiment.policy.cache.w, 16u);
    EXPECT_EQ(cfg.experiment.policy.kind, PolicyKind::sink_window);
}

TEST_F(ConfigFile, Defaults) {
    const RunConfig cfg = resolve_config({});
    const BuzzConfig& c = cfg.experiment.policy.cache;
    EXPECT_EQ(c.k, 4u);
    EXPECT_EQ(c.w, 64u);
    EXPECT_EQ(c.s, 5u);
    EXPECT_EQ(c.T, 277u);  // round(64 * 26 / 6)
    EXPECT_EQ(cfg.experiment.policy.kind, PolicyKind::buzz);
    EXPECT_EQ(cfg.experiment.workload.seed.value, 42u);
    EXPECT_EQ(cfg.experiment.workload.n, 1024u);
    EXPECT_EQ(cfg.experiment.workload.d, 64u);
    EXPECT_FALSE(cfg.experiment.logn);
    EXPECT_EQ(cfg.experiment.logn_base, 512u);
    EXPECT_EQ(cfg.sweep.capacity, 200u);
    EXPECT_TRUE(cfg.output_path.empty());
}

TEST_F(ConfigFile, SeedFromEnvironment) {
    setenv("HIVEKV_SEED", "1234", 1);
    EXPECT_EQ(resolve_config({}).experiment.workload.seed.value, 1234u);
    EXPECT_EQ(resolve_config({{{"workload.seed", "7"}}}).experiment.workload.seed.value, 7u);
    setenv("HIVEKV_SEED", "abc", 1);
    EXPECT_THROW(resolve_config({}), ConfigError);
    unsetenv("HIVEKV_SEED");
}

TEST_F(ConfigFile, ValueErrors) {
    EXPECT_THROW(resolve_config({{{"cache.k", "-1"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"cache.stride", "0"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"cache.stride", "2"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"cache.threshold", "3"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"policy.kind", "lru"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"model.logn", "maybe"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"workload.spike_strength", "nan"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"workload.kind", "middle_spike"}, {"workload.spike_position", "2"}}}),
                 ConfigError);
    EXPECT_THROW(resolve_config({{{"bogus.key", "1"}}}), ConfigError);
    EXPECT_THROW(resolve_config({{{"policy.kind", "heavy_hitter_topk"}, {"policy.budget", "10"}}}),
                 ConfigError);
}

TEST_F(ConfigFile, SweepAndModelKeys) {
    const RunConfig cfg = resolve_config({{{"sweep.grid", "1.5,3,4.5"},
                                           {"sweep.capacity", "300"},
                                           {"sweep.jobs", "0"},
                                           {"model.logn", "yes"},
                                           {"model.logn_base", "1024"}}});
    EXPECT_EQ(cfg.sweep.grid, (std::vector<double>{1.5, 3.0, 4.5}));
    EXPECT_EQ(cfg.sweep.capacity, 300u);
    EXPECT_EQ(cfg.sweep.jobs, 1u);
    EXPECT_TRUE(cfg.experiment.logn);
    EXPECT_EQ(cfg.experiment.logn_base, 1024u);
    EXPECT_THROW(parse_real_list("g", "1,,2"), ConfigError);
    EXPECT_THROW(parse_count_list("g", ""), ConfigError);
}

}  // namespace
}  // namespace hivekv
