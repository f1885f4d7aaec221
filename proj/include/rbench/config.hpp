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

#ifndef RBENCH_CONFIG_HPP
#define RBENCH_CONFIG_HPP

// Experiment configuration files: JSON with optional // and /* */ comments, unknown keys rejected.
//
//   {
//     "name": "case_a",
//     "n_qubits": 1,
//     "noise": {"type": "overrotation", "delta": 0.1},
//     "spam": "ideal",
//     "m_values": {"start": 2, "stop": 100, "step": 2},
//     "averaging": {"method": "monte_carlo", "k": 3000},
//     "seed": 1001,
//     "outputs": "out/case_a"
//   }
//
// Noise types and their keys (every noise object also accepts "stream", the
// label of the random stream its parameters are drawn from):
//   overrotation         delta | range [lo, hi]
//   depolarizing         value | range [lo, hi]     (depolarizing parameter)
//   amplitude_damping    value | range [lo, hi]     (1 - damping probability)
//   composed             outer, inner               (outer acts after inner)
//   adversarial_inverse  (none)
// SPAM is "ideal" or {"prep_error": channel, "meas_error": channel} where a
// channel is "none" or {"type": "depolarizing" | "amplitude_damping", "value": x}.
// Averaging methods: exact, exhaustive, monte_carlo with k, or monte_carlo
// with epsilon and delta (Hoeffding sample count).

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbench/noise.hpp"
#include "rbench/protocol.hpp"

namespace rbench {

class ConfigError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

struct ExperimentConfig {
    std::string name;
    int n_qubits = 1;
    nlohmann::json noise;
    nlohmann::json spam;
    std::vector<int> m_values;
    Averaging averaging;
    std::uint64_t seed = 0;
    std::string outputs;
    /// Normalized document; parsing it again yields the same configuration.
    nlohmann::json document;

    std::string echo() const { return document.dump(); }
    void set_seed(std::uint64_t s) {
        seed = s;
        document["seed"] = s;
    }
};

namespace detail {

using nlohmann::json;

struct ConfigContext {
    const std::string& text;

    /// 1-based line of the first occurrence of "key" in the source, or 0.
    std::size_t line_of(const std::string& key) const {
        const auto pos = text.find('"' + key + '"');
        if (pos == std::string::npos) return 0;
        return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
    }

    [[noreturn]] void fail(const std::string& path, const std::string& msg, const std::string& key = {}) const {
        std::string where = path.empty() ? "<root>" : path;
        const std::size_t line = key.empty() ? 0 : line_of(key);
        if (line) where += " (line " + std::to_string(line) + ")";
        throw ConfigError("config error at " + where + ": " + msg);
    }

    void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& item : obj.items()) {
            if (!ok.count(item.key())) fail(join(path, item.key()), "unknown key", item.key());
        }
    }

    const json& require(const json& obj, const std::string& path, const std::string& key) const {
        if (!obj.contains(key)) fail(path, "missing required key '" + key + "'");
        return obj.at(key);
    }

    double number(const json& v, const std::string& path, const std::string& key) const {
        if (!v.is_number()) fail(path, "expected a number", key);
        return v.get<double>();
    }

    std::int64_t integer(const json& v, const std::string& path, const std::string& key) const {
        if (!v.is_number_integer()) fail(path, "expected an integer", key);
        return v.get<std::int64_t>();
    }

    std::string string(const json& v, const std::string& path, const std::string& key) const {
        if (!v.is_string()) fail(path, "expected a string", key);
        return v.get<std::string>();
    }

    std::pair<double, double> range(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(path, "expected a range [lo, hi]", "range");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
};

inline json normalize_noise(const ConfigContext& ctx, const json& n, const std::string& path) {
    if (!n.is_object()) ctx.fail(path, "expected a noise object");
    const std::string type = ctx.string(ctx.require(n, path, "type"), ConfigContext::join(path, "type"), "type");
    json out = {{"type", type}};
    auto copy_stream = [&] {
        if (n.contains("stream")) out["stream"] = ctx.string(n.at("stream"), ConfigContext::join(path, "stream"), "stream");
    };
    auto value_or_range = [&](const char* scalar) {
        const bool has_scalar = n.contains(scalar), has_range = n.contains("range");
        if (has_scalar == has_range) ctx.fail(path, std::string("give exactly one of '") + scalar + "' or 'range'");
        if (has_scalar) {
            out[scalar] = ctx.number(n.at(scalar), ConfigContext::join(path, scalar), scalar);
        } else {
            const auto [lo, hi] = ctx.range(n.at("range"), ConfigContext::join(path, "range"));
            out["range"] = {lo, hi};
        }
    };
    if (type == "overrotation") {
        ctx.only_keys(n, path, {"type", "delta", "range", "stream"});
        value_or_range("delta");
        copy_stream();
    } else if (type == "depolarizing" || type == "amplitude_damping") {
        ctx.only_keys(n, path, {"type", "value", "range", "stream"});
        value_or_range("value");
        copy_stream();
    } else if (type == "composed") {
        ctx.only_keys(n, path, {"type", "outer", "inner"});
        out["outer"] = normalize_noise(ctx, ctx.require(n, path, "outer"), ConfigContext::join(path, "outer"));
        out["inner"] = normalize_noise(ctx, ctx.require(n, path, "inner"), ConfigContext::join(path, "inner"));
    } else if (type == "adversarial_inverse") {
        ctx.only_keys(n, path, {"type"});
    } else {
        ctx.fail(ConfigContext::join(path, "type"),
                 "unknown noise type '" + type +
                     "' (expected overrotation, depolarizing, amplitude_damping, composed, adversarial_inverse)",
                 "type");
    }
    return out;
}

inline json normalize_channel(const ConfigContext& ctx, const json& c, const std::string& path) {
    if (c.is_string() && c.get<std::string>() == "none") return "none";
    if (!c.is_object()) ctx.fail(path, "expected \"none\" or a channel object");
    ctx.only_keys(c, path, {"type", "value"});
    const std::string type = ctx.string(ctx.require(c, path, "type"), ConfigContext::join(path, "type"), "type");
    if (type != "depolarizing" && type != "amplitude_damping") {
        ctx.fail(ConfigContext::join(path, "type"), "unknown channel type '" + type + "'", "type");
    }
    return {{"type", type}, {"value", ctx.number(ctx.require(c, path, "value"), ConfigContext::join(path, "value"), "value")}};
}

inline json normalize_spam(const ConfigContext& ctx, const json& s) {
    if (s.is_string()) {
        if (s.get<std::string>() != "ideal") ctx.fail("spam", "expected \"ideal\" or an object", "spam");
        return "ideal";
    }
    ctx.only_keys(s, "spam", {"prep_error", "meas_error"});
    json out = json::object();
    out["prep_error"] = s.contains("prep_error") ? normalize_channel(ctx, s.at("prep_error"), "spam.prep_error") : "none";
    out["meas_error"] = s.contains("meas_error") ? normalize_channel(ctx, s.at("meas_error"), "spam.meas_error") : "none";
    return out;
}

inline std::vector<int> parse_m_values(const ConfigContext& ctx, const json& v, json& normalized) {
    std::vector<int> ms;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto m = ctx.integer(v[i], "m_values[" + std::to_string(i) + "]", "m_values");
            if (m < 1 || m > 1000000) ctx.fail("m_values[" + std::to_string(i) + "]", "must lie in 1..1000000");
            ms.push_back(static_cast<int>(m));
        }
        normalized = ms;
    } else if (v.is_object()) {
        ctx.only_keys(v, "m_values", {"start", "stop", "step"});
        const auto start = ctx.integer(ctx.require(v, "m_values", "start"), "m_values.start", "start");
        const auto stop = ctx.integer(ctx.require(v, "m_values", "stop"), "m_values.stop", "stop");
        const auto step = v.contains("step") ? ctx.integer(v.at("step"), "m_values.step", "step") : 1;
        if (start < 1) ctx.fail("m_values.start", "must be >= 1", "start");
        if (step < 1) ctx.fail("m_values.step", "must be >= 1", "step");
        if (stop < start || stop > 1000000) ctx.fail("m_values.stop", "must lie in start..1000000", "stop");
        for (auto m = start; m <= stop; m += step) ms.push_back(static_cast<int>(m));
        normalized = {{"start", start}, {"stop", stop}, {"step", step}};
    } else {
        ctx.fail("m_values", "expected a list or {start, stop, step}", "m_values");
    }
    if (ms.empty()) ctx.fail("m_values", "no sequence lengths given", "m_values");
    for (std::size_t i = 1; i < ms.size(); ++i) {
        if (ms[i] <= ms[i - 1]) ctx.fail("m_values", "sequence lengths must be strictly increasing", "m_values");
    }
    return ms;
}

inline Averaging parse_averaging(const ConfigContext& ctx, const json& a, json& normalized) {
    ctx.only_keys(a, "averaging", {"method", "k", "epsilon", "delta"});
    const std::string method = ctx.string(ctx.require(a, "averaging", "method"), "averaging.method", "method");
    normalized = {{"method", method}};
    if (method == "exact" || method == "exhaustive") {
        if (a.size() != 1) ctx.fail("averaging", "method '" + method + "' takes no parameters", "method");
        if (method == "exact") return ExactRecursion{};
        return Exhaustive{};
    }
    if (method != "monte_carlo") {
        ctx.fail("averaging.method", "unknown method '" + method + "' (expected exact, exhaustive, monte_carlo)",
                 "method");
    }
    if (a.contains("k")) {
        if (a.contains("epsilon") || a.contains("delta")) ctx.fail("averaging", "give either k or epsilon/delta", "k");
        const auto k = ctx.integer(a.at("k"), "averaging.k", "k");
        if (k < 2) ctx.fail("averaging.k", "must be >= 2", "k");
        normalized["k"] = k;
        return MonteCarlo{static_cast<std::size_t>(k)};
    }
    const double eps = ctx.number(ctx.require(a, "averaging", "epsilon"), "averaging.epsilon", "epsilon");
    const double delta = ctx.number(ctx.require(a, "averaging", "delta"), "averaging.delta", "delta");
    if (!(eps > 0 && eps < 1)) ctx.fail("averaging.epsilon", "must lie in (0, 1)", "epsilon");
    if (!(delta > 0 && delta < 1)) ctx.fail("averaging.delta", "must lie in (0, 1)", "delta");
    normalized["epsilon"] = eps;
    normalized["delta"] = delta;
    return MonteCarloHoeffding{eps, delta};
}

}  // namespace detail

/// Parses and validates a configuration document. Syntax errors report
/// line and column; schema errors report the key path.
inline ExperimentConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const auto before = text.substr(0, byte == 0 ? 0 : byte - 1);
        const auto line = 1 + std::count(before.begin(), before.end(), '\n');
        const auto last_nl = before.rfind('\n');
        const auto col = last_nl == std::string::npos ? before.size() + 1 : before.size() - last_nl;
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    const detail::ConfigContext ctx{text};
    ctx.only_keys(doc, "", {"name", "n_qubits", "noise", "spam", "m_values", "averaging", "seed", "outputs"});

    ExperimentConfig cfg;
    json norm = json::object();
    cfg.name = ctx.string(ctx.require(doc, "", "name"), "name", "name");
    norm["name"] = cfg.name;
    cfg.n_qubits = static_cast<int>(doc.contains("n_qubits") ? ctx.integer(doc.at("n_qubits"), "n_qubits", "n_qubits") : 1);
    if (cfg.n_qubits != 1 && cfg.n_qubits != 2) ctx.fail("n_qubits", "must be 1 or 2", "n_qubits");
    norm["n_qubits"] = cfg.n_qubits;
    cfg.noise = detail::normalize_noise(ctx, ctx.require(doc, "", "noise"), "noise");
    norm["noise"] = cfg.noise;
    cfg.spam = detail::normalize_spam(ctx, doc.contains("spam") ? doc.at("spam") : json("ideal"));
    norm["spam"] = cfg.spam;
    json ms_norm, avg_norm;
    cfg.m_values = detail::parse_m_values(ctx, ctx.require(doc, "", "m_values"), ms_norm);
    norm["m_values"] = ms_norm;
    cfg.averaging = detail::parse_averaging(ctx, ctx.require(doc, "", "averaging"), avg_norm);
    norm["averaging"] = avg_norm;
    const json& seed = ctx.require(doc, "", "seed");
    if (!seed.is_number_unsigned()) ctx.fail("seed", "expected a non-negative integer", "seed");
    cfg.seed = seed.get<std::uint64_t>();
    norm["seed"] = cfg.seed;
    cfg.outputs = doc.contains("outputs") ? ctx.string(doc.at("outputs"), "outputs", "outputs") : "out/" + cfg.name;
    norm["outputs"] = cfg.outputs;
    cfg.document = std::move(norm);
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace detail {

inline Superoperator channel_from_spec(const nlohmann::json& c, int n_qubits) {
    const int d = 1 << n_qubits;
    if (c.is_string()) return Superoperator::identity(d);
    const std::string type = c.at("type");
    const double v = c.at("value");
    if (type == "depolarizing") return depolarizing(v, d);
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("amplitude damping value must lie in [0, 1]");
    const Superoperator one = amplitude_damping(1.0 - v);
    if (n_qubits == 1) return one;
    const auto k = amplitude_damping_kraus(1.0 - v);
    std::vector<CMatrix> kraus;
    for (const auto& a : k) {
        for (const auto& b : k) kraus.push_back(kron(a, b));
    }
    return ptm_from_kraus(kraus);
}

inline NoiseModel noise_from_spec(const nlohmann::json& n, const std::shared_ptr<const CliffordGroup>& group,
                                  std::uint64_t seed, const std::string& default_stream) {
    const std::string type = n.at("type");
    Stream rng(seed, n.value("stream", default_stream));
    auto bounds = [&](const char* scalar) -> std::pair<double, double> {
        if (n.contains(scalar)) return {n.at(scalar).get<double>(), n.at(scalar).get<double>()};
        return {n.at("range")[0].get<double>(), n.at("range")[1].get<double>()};
    };
    if (type == "overrotation") {
        if (n.contains("delta")) return overrotation_model(group, FixedDelta{n.at("delta").get<double>()}, rng);
        const auto [lo, hi] = bounds("delta");
        return overrotation_model(group, UniformDelta{lo, hi}, rng);
    }
    if (type == "depolarizing") {
        const auto [lo, hi] = bounds("value");
        return depolarizing_model(group, lo, hi, rng);
    }
    if (type == "amplitude_damping") {
        const auto [lo, hi] = bounds("value");
        return amplitude_damping_model(group, lo, hi, rng);
    }
    if (type == "composed") {
        return compose_models(noise_from_spec(n.at("outer"), group, seed, default_stream + "/outer"),
                              noise_from_spec(n.at("inner"), group, seed, default_stream + "/inner"));
    }
    return adversarial_inverse_model(group);
}

}  // namespace detail

/// Builds the noise model, SPAM and plan described by a configuration.
inline ExperimentPlan build_plan(const ExperimentConfig& cfg) {
    const auto group = clifford_group(cfg.n_qubits);
    const int d = group->dim();
    NoiseModel noise = detail::noise_from_spec(cfg.noise, group, cfg.seed, "noise");
    SpamModel spam = SpamModel::ideal(d);
    if (cfg.spam.is_object()) {
        const Superoperator prep = detail::channel_from_spec(cfg.spam.at("prep_error"), cfg.n_qubits);
        const Superoperator meas = detail::channel_from_spec(cfg.spam.at("meas_error"), cfg.n_qubits);
        spam.rho = DensityOperator(rbench::apply(prep, spam.rho));
        spam.effect = MeasurementEffect(rbench::apply(meas.adjoint(), spam.effect.matrix()));
    }
    ExperimentPlan plan{cfg.m_values, cfg.averaging, cfg.seed, std::move(noise), std::move(spam), cfg.echo()};
    plan.validate();
    return plan;
}

}  // namespace rbench

#endif  // RBENCH_CONFIG_HPP
