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

#ifndef RBENCH_PROTOCOL_HPP
#define RBENCH_PROTOCOL_HPP

// Sequence generation and averaged sequence fidelities.
//
// A sequence of length m holds m uniformly random gates followed by the
// recovery gate (the (m+1)-th), which inverts their ideal product. Each gate
// is followed by its error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "rbench/noise.hpp"

namespace rbench {

struct SpamModel {
    DensityOperator rho;
    MeasurementEffect effect;

    /// rho = E = |0...0><0...0|.
    static SpamModel ideal(int d) { return {DensityOperator::basis_state(d, 0), MeasurementEffect::projector(d, 0)}; }
};

struct SequenceSpec {
    std::vector<std::size_t> gates;
    std::size_t recovery;

    static SequenceSpec make(const CliffordGroup& group, std::vector<std::size_t> gates) {
        const std::size_t rec = group.recovery(gates);
        return {std::move(gates), rec};
    }
};

namespace detail {

/// Floors tiny floating-point excursions; anything beyond 1e-12 is a bug.
inline double clamp_probability(double f) {
    if (!(f >= -tol::kStructural && f <= 1.0 + tol::kStructural)) {
        throw InvariantError("survival probability " + format_double(f) + " outside [0, 1] beyond 1e-12");
    }
    return std::clamp(f, 0.0, 1.0);
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk, end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Tr[E S(rho)] for one sequence, with S the noisy gate product.
inline double sequence_fidelity(const SequenceSpec& spec, const NoiseModel& noise, const SpamModel& spam) {
    if (spec.gates.empty()) throw ValidationError("sequence must contain at least one random gate");
    Vector v = spam.rho.pauli_vector();
    int step = 1;
    for (std::size_t g : spec.gates) v = noise.noisy_gate(g, step++) * v;
    v = noise.noisy_gate(spec.recovery, step) * v;
    return detail::clamp_probability(spam.effect.pauli_vector().dot(v));
}

struct ExactOptions {
    /// Upper bound on m_max * K^2 noisy-gate applications.
    double step_budget = 5e7;
};

/// Average sequence fidelity at each requested m, exactly.
///
/// Keeps, for every group element g, the average over all length-j prefixes
/// whose ideal product is g of the noisy prefix applied to rho. A prefix
/// ending in g is closed by the recovery gate g^{-1}, so the average fidelity
/// is sum_g Tr[E Lambda_{g^-1} C_{g^-1} (t_j(g))] with the 1/K^j weights
/// already folded into t_j. Cost O(m K^2 d^4).
inline std::vector<double> exact_average_curve(std::span<const int> m_values, const NoiseModel& noise,
                                               const SpamModel& spam, const ExactOptions& opts = {}) {
    if (m_values.empty()) return {};
    const int m_max = *std::max_element(m_values.begin(), m_values.end());
    if (*std::min_element(m_values.begin(), m_values.end()) < 1) throw ValidationError("sequence lengths must be >= 1");
    const auto& group = noise.group();
    const std::size_t k = group.size();
    const double work = static_cast<double>(m_max) * static_cast<double>(k) * static_cast<double>(k);
    if (work > opts.step_budget) {
        throw ResourceError("exact recursion needs " + detail::format_double(work) + " gate applications (budget " +
                            detail::format_double(opts.step_budget) + "); use Monte Carlo averaging instead");
    }
    const Eigen::Index n = noise.dim() * noise.dim();
    const Vector effect = spam.effect.pauli_vector();
    const double inv_k = 1.0 / static_cast<double>(k);

    std::vector<Vector> cur(k, Vector::Zero(n)), next(k, Vector::Zero(n));
    cur[group.identity_index()] = spam.rho.pauli_vector();
    std::vector<Matrix> gates(k);
    auto load_gates = [&](int step) {
        for (std::size_t i = 0; i < k; ++i) gates[i] = noise.noisy_gate(i, step);
    };

    std::vector<double> by_m(static_cast<std::size_t>(m_max) + 1, 0.0);
    std::vector<char> wanted(static_cast<std::size_t>(m_max) + 1, 0);
    for (int m : m_values) wanted[static_cast<std::size_t>(m)] = 1;

    load_gates(1);
    for (int step = 1; step <= m_max; ++step) {
        if (noise.time_dependent() && step > 1) load_gates(step);
        for (auto& v : next) v.setZero();
        for (std::size_t g = 0; g < k; ++g) {
            for (std::size_t i = 0; i < k; ++i) next[group.compose(i, g)].noalias() += gates[i] * cur[g];
        }
        for (auto& v : next) v *= inv_k;
        std::swap(cur, next);
        if (!wanted[static_cast<std::size_t>(step)]) continue;
        double f = 0.0;
        for (std::size_t g = 0; g < k; ++g) {
            const std::size_t rec = group.inverse(g);
            f += effect.dot(noise.noisy_gate(rec, step + 1) * cur[g]);
        }
        by_m[static_cast<std::size_t>(step)] = detail::clamp_probability(f);
    }
    std::vector<double> out;
    for (int m : m_values) out.push_back(by_m[static_cast<std::size_t>(m)]);
    return out;
}

inline double exact_average_fidelity(int m, const NoiseModel& noise, const SpamModel& spam,
                                     const ExactOptions& opts = {}) {
    const int ms[] = {m};
    return exact_average_curve(ms, noise, spam, opts).front();
}

/// Mean of sequence_fidelity over all K^m sequences.
inline double exhaustive_average_fidelity(int m, const NoiseModel& noise, const SpamModel& spam,
                                          double budget = 1e7) {
    if (m < 1) throw ValidationError("sequence length must be >= 1");
    const auto& group = noise.group();
    const std::size_t k = group.size();
    const double total = std::pow(static_cast<double>(k), m);
    if (total > budget) {
        throw ResourceError("exhaustive enumeration of " + detail::format_double(total) + " sequences exceeds budget " +
                            detail::format_double(budget));
    }
    const Vector effect = spam.effect.pauli_vector();
    // prefix[j] = state after j noisy gates; ideal[j] = ideal product index.
    std::vector<Vector> prefix(static_cast<std::size_t>(m) + 1);
    std::vector<std::size_t> ideal(static_cast<std::size_t>(m) + 1, group.identity_index());
    std::vector<std::size_t> digits(static_cast<std::size_t>(m), 0);
    prefix[0] = spam.rho.pauli_vector();
    auto rebuild_from = [&](std::size_t j) {
        for (; j < digits.size(); ++j) {
            prefix[j + 1] = noise.noisy_gate(digits[j], static_cast<int>(j) + 1) * prefix[j];
            ideal[j + 1] = group.compose(digits[j], ideal[j]);
        }
    };
    rebuild_from(0);
    double sum = 0.0;
    for (;;) {
        const std::size_t rec = group.inverse(ideal.back());
        sum += detail::clamp_probability(effect.dot(noise.noisy_gate(rec, m + 1) * prefix.back()));
        std::size_t pos = digits.size();
        while (pos > 0 && ++digits[pos - 1] == k) digits[--pos] = 0;
        if (pos == 0) break;
        rebuild_from(pos - 1);
    }
    return sum / total;
}

struct McEstimate {
    double mean;
    double std_error;
    std::size_t samples;
};

/// Gates for sequence `index` of length m, drawn from the stream (seed, "sequence", m, index).
inline std::vector<std::size_t> sample_sequence(const CliffordGroup& group, int m, std::uint64_t seed,
                                                std::uint64_t index) {
    Stream rng(seed, "sequence", static_cast<std::uint64_t>(m), index);
    std::vector<std::size_t> gates(static_cast<std::size_t>(m));
    for (auto& g : gates) g = group.sample_uniform(rng);
    return gates;
}

/// Sample mean and standard error over k random sequences. The result is
/// bit-identical for any thread count: each sequence has its own stream and
/// the reduction runs in index order.
inline McEstimate monte_carlo_fidelity(int m, std::size_t k, const NoiseModel& noise, const SpamModel& spam,
                                       std::uint64_t seed, unsigned threads = 1) {
    if (k < 2) throw ValidationError("Monte Carlo averaging needs at least 2 sequences");
    if (m < 1) throw ValidationError("sequence length must be >= 1");
    std::vector<double> values(k);
    detail::parallel_for(k, threads, [&](std::size_t idx) {
        values[idx] = sequence_fidelity(SequenceSpec::make(noise.group(), sample_sequence(noise.group(), m, seed, idx)),
                                        noise, spam);
    });
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(k);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(k - 1);
    return {mean, std::sqrt(var / static_cast<double>(k)), k};
}

/// ceil(ln(2/delta) / (2 epsilon^2)); independent of m and the number of qubits.
inline std::size_t hoeffding_samples(double epsilon, double delta) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
    return static_cast<std::size_t>(std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

struct Exhaustive {};
struct ExactRecursion {};
struct MonteCarlo {
    std::size_t k;
};
struct MonteCarloHoeffding {
    double epsilon;
    double delta;
};
using Averaging = std::variant<Exhaustive, ExactRecursion, MonteCarlo, MonteCarloHoeffding>;

inline std::string describe(const Averaging& a) {
    struct V {
        std::string operator()(const Exhaustive&) const { return "exhaustive"; }
        std::string operator()(const ExactRecursion&) const { return "exact"; }
        std::string operator()(const MonteCarlo& mc) const { return "monte_carlo(k=" + std::to_string(mc.k) + ")"; }
        std::string operator()(const MonteCarloHoeffding& h) const {
            return "monte_carlo(epsilon=" + detail::format_double(h.epsilon) +
                   ",delta=" + detail::format_double(h.delta) + ")";
        }
    };
    return std::visit(V{}, a);
}

struct ExperimentPlan {
    std::vector<int> m_values;
    Averaging averaging;
    std::uint64_t seed;
    NoiseModel noise;
    SpamModel spam;
    /// Free-form echo of the originating configuration; copied into curve metadata.
    std::string description;
    double exhaustive_budget = 1e7;
    ExactOptions exact;

    void validate() const {
        if (m_values.empty()) throw ValidationError("plan has no sequence lengths");
        if (m_values.front() < 1) throw ValidationError("sequence lengths must be >= 1");
        for (std::size_t i = 1; i < m_values.size(); ++i) {
            if (m_values[i] <= m_values[i - 1]) throw ValidationError("sequence lengths must be strictly increasing");
        }
        if (noise.dim() != spam.rho.dim() || noise.dim() != spam.effect.dim()) {
            throw ValidationError("SPAM dimension does not match the noise model");
        }
        if (std::holds_alternative<Exhaustive>(averaging)) {
            const double total = std::pow(static_cast<double>(noise.group().size()), m_values.back());
            if (total > exhaustive_budget) {
                throw ValidationError("exhaustive averaging needs K^m = " + detail::format_double(total) +
                                      " sequences, above the budget " + detail::format_double(exhaustive_budget));
            }
        }
        if (const auto* mc = std::get_if<MonteCarlo>(&averaging); mc && mc->k < 2) {
            throw ValidationError("Monte Carlo averaging needs k >= 2");
        }
        if (const auto* h = std::get_if<MonteCarloHoeffding>(&averaging)) (void)hoeffding_samples(h->epsilon, h->delta);
    }
};

struct CurvePoint {
    int m;
    double f_mean;
    double f_stderr;
    /// Sequences averaged; 0 for the exact recursion, which covers all K^m.
    std::size_t n_sequences;
};

struct DecayCurve {
    std::vector<CurvePoint> points;
    /// Ordered key/value pairs written as `# key: value` comment lines.
    std::vector<std::pair<std::string, std::string>> metadata;

    std::vector<int> m_values() const {
        std::vector<int> out;
        for (const auto& p : points) out.push_back(p.m);
        return out;
    }
};

struct RunOptions {
    /// 0 selects the hardware concurrency.
    unsigned threads = 0;
};

inline DecayCurve run_experiment(const ExperimentPlan& plan, const RunOptions& opts = {}) {
    plan.validate();
    DecayCurve curve;
    curve.metadata = {{"seed", std::to_string(plan.seed)},
                      {"noise", plan.noise.label()},
                      {"averaging", describe(plan.averaging)}};
    if (!plan.description.empty()) curve.metadata.emplace_back("plan", plan.description);

    if (std::holds_alternative<ExactRecursion>(plan.averaging)) {
        const auto f = exact_average_curve(plan.m_values, plan.noise, plan.spam, plan.exact);
        for (std::size_t i = 0; i < f.size(); ++i) curve.points.push_back({plan.m_values[i], f[i], 0.0, 0});
        return curve;
    }
    if (std::holds_alternative<Exhaustive>(plan.averaging)) {
        const double k = static_cast<double>(plan.noise.group().size());
        for (int m : plan.m_values) {
            const double f = exhaustive_average_fidelity(m, plan.noise, plan.spam, plan.exhaustive_budget);
            curve.points.push_back({m, f, 0.0, static_cast<std::size_t>(std::pow(k, m))});
        }
        return curve;
    }
    std::size_t k;
    if (const auto* mc = std::get_if<MonteCarlo>(&plan.averaging)) {
        k = mc->k;
    } else {
        const auto& h = std::get<MonteCarloHoeffding>(plan.averaging);
        k = hoeffding_samples(h.epsilon, h.delta);
    }
    for (int m : plan.m_values) {
        const auto est = monte_carlo_fidelity(m, k, plan.noise, plan.spam, plan.seed, opts.threads);
        curve.points.push_back({m, est.mean, est.std_error, est.samples});
    }
    return curve;
}

}  // namespace rbench

#endif  // RBENCH_PROTOCOL_HPP
