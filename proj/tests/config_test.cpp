// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rbench/config.hpp"

#include <filesystem>

#include <gtest/gtest.h>

using namespace rbench;

namespace {

const char* kMinimal = R"({
  "name": "t",
  "noise": {"type": "depolarizing", "value": 0.99},
  "m_values": [1, 2, 3],
  "averaging": {"method": "exact"},
  "seed": 5
})";

std::string with(const std::string& key, const std::string& value) {
    auto doc = nlohmann::json::parse(kMinimal);
    doc[key] = nlohmann::json::parse(value);
    return doc.dump(2);
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(config, minimal_defaults) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.name, "t");
    EXPECT_EQ(cfg.n_qubits, 1);
    EXPECT_EQ(cfg.m_values, (std::vector<int>{1, 2, 3}));
    EXPECT_TRUE(std::holds_alternative<ExactRecursion>(cfg.averaging));
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.outputs, "out/t");
    EXPECT_EQ(cfg.spam, "ideal");
}

TEST(config, presets_parse_and_build) {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(RBENCH_CONFIG_DIR)) {
        if (entry.path().extension() != ".config") continue;
        ++count;
        const auto cfg = load_config(entry.path());
        const auto plan = build_plan(cfg);
        EXPECT_EQ(plan.m_values, cfg.m_values) << entry.path();
        EXPECT_EQ(plan.noise.dim(), 1 << cfg.n_qubits);
    }
    EXPECT_GE(count, 5);
}

TEST(config, echo_round_trips) {
    for (const auto& entry : std::filesystem::directory_iterator(RBENCH_CONFIG_DIR)) {
        if (entry.path().extension() != ".config") continue;
        const auto cfg = load_config(entry.path());
        const auto again = parse_config(cfg.echo());
        EXPECT_EQ(again.echo(), cfg.echo());
        EXPECT_EQ(again.m_values, cfg.m_values);
        EXPECT_EQ(describe(again.averaging), describe(cfg.averaging));
    }
    auto cfg = parse_config(kMinimal);
    cfg.set_seed(77);
    EXPECT_EQ(parse_config(cfg.echo()).seed, 77u);
}

TEST(config, m_value_ranges) {
    const auto cfg = parse_config(with("m_values", R"({"start": 2, "stop": 10, "step": 4})"));
    EXPECT_EQ(cfg.m_values, (std::vector<int>{2, 6, 10}));
    EXPECT_EQ(parse_config(with("m_values", R"({"start": 3, "stop": 5})")).m_values, (std::vector<int>{3, 4, 5}));
    EXPECT_NE(error_of(with("m_values", "[3, 2]")).find("strictly increasing"), std::string::npos);
    EXPECT_NE(error_of(with("m_values", "[0, 2]")).find("m_values[0]"), std::string::npos);
    EXPECT_NE(error_of(with("m_values", R"({"start": 1, "stop": 5, "by": 1})")).find("m_values.by"),
              std::string::npos);
}

TEST(config, averaging_methods) {
    EXPECT_TRUE(std::holds_alternative<Exhaustive>(parse_config(with("averaging", R"({"method": "exhaustive"})")).averaging));
    const auto mc = parse_config(with("averaging", R"({"method": "monte_carlo", "k": 40})"));
    EXPECT_EQ(std::get<MonteCarlo>(mc.averaging).k, 40u);
    const auto h = parse_config(with("averaging", R"({"method": "monte_carlo", "epsilon": 0.02, "delta": 0.05})"));
    EXPECT_EQ(std::get<MonteCarloHoeffding>(h.averaging).epsilon, 0.02);
    EXPECT_FALSE(error_of(with("averaging", R"({"method": "monte_carlo", "k": 1})")).empty());
    EXPECT_FALSE(error_of(with("averaging", R"({"method": "monte_carlo", "k": 10, "delta": 0.1})")).empty());
    EXPECT_FALSE(error_of(with("averaging", R"({"method": "exact", "k": 10})")).empty());
    EXPECT_NE(error_of(with("averaging", R"({"method": "bootstrap"})")).find("unknown method"), std::string::npos);
}

TEST(config, noise_specs) {
    const auto g = [](const std::string& noise) { return build_plan(parse_config(with("noise", noise))); };
    EXPECT_EQ(g(R"({"type": "overrotation", "delta": 0.1})").noise.label(), "overrotation(delta=0.10000000000000001)");
    EXPECT_NO_THROW(g(R"({"type": "overrotation", "range": [0.075, 1.125], "stream": "custom"})"));
    EXPECT_NO_THROW(g(R"({"type": "amplitude_damping", "range": [0.98, 0.99]})"));
    EXPECT_NO_THROW(g(R"({"type": "adversarial_inverse"})"));
    const auto composed =
        g(R"({"type": "composed", "outer": {"type": "overrotation", "delta": 0.1},
              "inner": {"type": "depolarizing", "value": 0.98}})");
    EXPECT_NEAR(depolarizing_parameter(composed.noise.error(3)), 0.98 * (4 * std::cos(0.1) * std::cos(0.1) - 1) / 3,
                1e-12);

    EXPECT_FALSE(error_of(with("noise", R"({"type": "overrotation", "delta": 0.1, "range": [0, 1]})")).empty());
    EXPECT_FALSE(error_of(with("noise", R"({"type": "depolarizing"})")).empty());
    EXPECT_NE(error_of(with("noise", R"({"type": "dephasing", "value": 0.9})")).find("unknown noise type"),
              std::string::npos);
    EXPECT_NE(error_of(with("noise", R"({"type": "composed", "outer": {"type": "adversarial_inverse"},
                                          "inner": {"type": "depolarizing", "value": 0.9, "extra": 1}})"))
                  .find("noise.inner.extra"),
              std::string::npos);
    // Semantic range errors surface when the model is built.
    EXPECT_THROW(g(R"({"type": "depolarizing", "value": 1.5})"), ValidationError);
}

TEST(config, different_seeds_draw_different_models) {
    const auto noise = R"({"type": "depolarizing", "range": [0.9, 0.99]})";
    auto a = parse_config(with("noise", noise));
    auto b = a;
    b.set_seed(6);
    EXPECT_NE(build_plan(a).noise.error(0).ptm(), build_plan(b).noise.error(0).ptm());
    EXPECT_EQ(build_plan(a).noise.error(0).ptm(), build_plan(parse_config(a.echo())).noise.error(0).ptm());
}

TEST(config, spam_channels) {
    const auto plan = build_plan(parse_config(with(
        "spam", R"({"prep_error": {"type": "depolarizing", "value": 0.9}, "meas_error": {"type": "amplitude_damping", "value": 0.8}})")));
    EXPECT_NEAR(plan.spam.rho.matrix()(0, 0).real(), 0.95, 1e-14);
    // Heisenberg picture of damping with survival 0.8: E = |0><0| + 0.2 |1><1|.
    EXPECT_NEAR(plan.spam.effect.matrix()(1, 1).real(), 0.2, 1e-14);
    EXPECT_NEAR(plan.spam.effect.matrix()(0, 0).real(), 1.0, 1e-14);
    EXPECT_FALSE(error_of(with("spam", R"("noisy")")).empty());
    EXPECT_FALSE(error_of(with("spam", R"({"prep_error": {"type": "bitflip", "value": 0.9}})")).empty());
}

TEST(config, strictness_and_context) {
    const std::string unknown = R"({
  "name": "t",
  "noise": {"type": "depolarizing", "value": 0.99},
  "m_values": [1, 2, 3],
  "averaging": {"method": "exact"},
  "seed": 5,
  "colour": "blue"
})";
    const auto msg = error_of(unknown);
    EXPECT_NE(msg.find("colour"), std::string::npos);
    EXPECT_NE(msg.find("line 7"), std::string::npos);

    const auto syntax = error_of("{\n  \"name\": \"t\",\n  \"seed\": ,\n}");
    EXPECT_NE(syntax.find("line 3"), std::string::npos);

    EXPECT_NE(error_of(R"({"name": "t"})").find("missing required key"), std::string::npos);
    EXPECT_FALSE(error_of(with("seed", "-1")).empty());
    EXPECT_FALSE(error_of(with("seed", "1.5")).empty());
    EXPECT_FALSE(error_of(with("n_qubits", "3")).empty());
    EXPECT_THROW(load_config("/nonexistent/file.config"), ConfigError);
}
