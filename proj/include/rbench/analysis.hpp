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

#ifndef RBENCH_ANALYSIS_HPP
#define RBENCH_ANALYSIS_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rbench/fit.hpp"
#include "rbench/herm_norm.hpp"
#include "rbench/noise.hpp"
#include "rbench/protocol.hpp"

namespace rbench {

/// Coefficients of A p^m + B + C (m-1)(q - p^2) p^(m-2) computed from a known
/// noise model. Order 0 has C = 0 and q = p^2.
struct AnalyticCoefficients {
    int order = 0;
    double A = 0.0;
    double B = 0.0;
    double p = 0.0;
    double C = 0.0;
    double q = 0.0;
    /// q_j for j = 2..m_ref; constant for time-independent noise.
    std::vector<double> per_step_q;

    double gate_dependence() const { return q - p * p; }
    double evaluate(double m) const { return model_first(m, A, B, p, C * gate_dependence()); }
};

namespace detail {

struct SpamVectors {
    Vector rho, effect, mixed;
};

inline SpamVectors spam_vectors(const SpamModel& spam) {
    const int d = spam.rho.dim();
    return {spam.rho.pauli_vector(), spam.effect.pauli_vector(),
            pauli_vector(CMatrix::Identity(d, d) / static_cast<double>(d))};
}

}  // namespace detail

/// A0 = Tr[E L(rho - I/d)], B0 = Tr[E L(I/d)], p from L, with L the mean error.
inline AnalyticCoefficients analytic_zeroth(const NoiseModel& noise, const SpamModel& spam) {
    const auto v = detail::spam_vectors(spam);
    const auto mean = mean_error(noise);
    const Matrix& lam = mean.superop.ptm();
    AnalyticCoefficients c;
    c.order = 0;
    c.A = v.effect.dot(lam * (v.rho - v.mixed));
    c.B = v.effect.dot(lam * v.mixed);
    // The twirl preserves the trace, so p can be read off L directly.
    c.p = mean.p_bar;
    c.q = c.p * c.p;
    return c;
}

/// First-order coefficients for time-independent noise:
///   Q1 = (1/K) sum_i C_i^T L_i C_i,
///   R  = (1/K) sum_g L_{g^-1} C_g^T L C_g,
///   q  = p(Q1 L),
///   A1 = Tr[E L(Q1 rho / p - rho + (p-1) I/(p d))] + Tr[E R(rho/p - I/(p d))],
///   B1 = Tr[E R(I/d)],  C1 = Tr[E L(rho - I/d)].
inline AnalyticCoefficients analytic_first(const NoiseModel& noise, const SpamModel& spam, int m_ref) {
    if (noise.time_dependent()) {
        throw UnsupportedError("first-order coefficients require time-independent noise");
    }
    if (m_ref < 1) throw ValidationError("reference sequence length must be >= 1");
    const auto v = detail::spam_vectors(spam);
    const auto& group = noise.group();
    const std::size_t k = group.size();
    const auto mean = mean_error(noise);
    const Matrix& lam = mean.superop.ptm();
    const double p = mean.p_bar;
    if (std::abs(p) <= tol::kStructural) {
        throw ValidationError("first-order coefficients are undefined when the mean error has p = 0");
    }
    const Eigen::Index n = lam.rows();
    Matrix q1 = Matrix::Zero(n, n), r = Matrix::Zero(n, n);
    for (std::size_t g = 0; g < k; ++g) {
        const Matrix& c = group.transfer(g);
        q1 += c.transpose() * noise.error(g).ptm() * c;
        r += noise.error(group.inverse(g)).ptm() * c.transpose() * lam * c;
    }
    q1 /= static_cast<double>(k);
    r /= static_cast<double>(k);

    AnalyticCoefficients out;
    out.order = 1;
    out.p = p;
    out.q = depolarizing_parameter(Superoperator(noise.dim(), q1 * lam));
    out.A = v.effect.dot(lam * (q1 * v.rho / p - v.rho + (p - 1.0) * v.mixed / p)) +
            v.effect.dot(r * (v.rho / p - v.mixed / p));
    out.B = v.effect.dot(r * v.mixed);
    out.C = v.effect.dot(lam * (v.rho - v.mixed));
    if (m_ref >= 2) out.per_step_q.assign(static_cast<std::size_t>(m_ref - 1), out.q);
    return out;
}

/// (m + 1 - k) gamma / (1 + k): the ratio of consecutive order bounds.
inline double validity_ratio(int m, int k, double gamma) {
    if (m < 1 || k < 0) throw ValidationError("validity ratio needs m >= 1 and k >= 0");
    return (m + 1 - k) * gamma / (1.0 + k);
}

enum class Validity { Valid, Warning, Invalid };

inline constexpr double kValidityThreshold = 0.1;
inline constexpr double kValidityWarning = 0.5;

inline Validity classify_validity(double ratio) {
    if (ratio < kValidityThreshold) return Validity::Valid;
    if (ratio <= kValidityWarning) return Validity::Warning;
    return Validity::Invalid;
}

inline std::string to_string(Validity v) {
    switch (v) {
        case Validity::Valid:
            return "valid";
        case Validity::Warning:
            return "warning";
        case Validity::Invalid:
            return "invalid";
    }
    return "unknown";
}

/// Largest m >= 1 whose ratio for dropping order k+1 stays below the
/// threshold; 0 if none; nullopt when gamma = 0 (no limit).
inline std::optional<int> validity_m_max(double gamma, int k) {
    if (gamma < 0.0 || k < 0) throw ValidationError("validity window needs gamma >= 0 and k >= 0");
    if (gamma == 0.0) return std::nullopt;
    // (m + 1 - k) gamma / (1 + k) < t  <=>  m < t (1 + k) / gamma + k - 1
    const double limit = kValidityThreshold * (1.0 + k) / gamma + k - 1.0;
    if (limit > 1e6) return 1000000;
    int m = std::max(static_cast<int>(std::ceil(limit)) - 1, 0);
    while (m >= 1 && validity_ratio(m, k, gamma) >= kValidityThreshold) --m;
    while (validity_ratio(m + 1, k, gamma) < kValidityThreshold) ++m;
    return std::max(m, 0);
}

struct PerturbationBound {
    double bound;
    double validity_ratio;
};

/// (binomial(m+1, k) gamma^k, (m+1-k) gamma / (1+k)).
inline PerturbationBound perturbation_bound(int m, int k, double gamma) {
    if (m < 1 || k < 1) throw ValidationError("perturbation bound needs m >= 1 and k >= 1");
    if (gamma < 0.0) throw ValidationError("gamma must be non-negative");
    double binom = 1.0;
    for (int j = 1; j <= k; ++j) binom = binom * (m + 1 - k + j) / j;
    if (k > m + 1) binom = 0.0;
    return {binom * std::pow(gamma, k), validity_ratio(m, k, gamma)};
}

struct VariationDiagnostics {
    double gamma = 0.0;
    /// gamma_j for steps 1..horizon of a time-dependent model; gamma is then their maximum.
    std::vector<double> per_step_gamma;

    double bound_k2(int m) const { return perturbation_bound(m, 2, gamma).bound; }
    double validity(int m, int k) const { return validity_ratio(m, k, gamma); }
};

struct GammaOptions {
    HermNormOptions norm;
    /// Upper bound on the number of norm evaluations.
    std::size_t max_norms = 5000;
};

/// Mean over gates of the Hermitian 1->1 norm of L_i - L, L the mean error.
inline VariationDiagnostics gamma_variation(const NoiseModel& noise, const GammaOptions& opts = {}) {
    const auto mean = mean_error(noise).superop;
    const int steps = noise.time_dependent() ? noise.horizon() : 1;
    const std::size_t evaluations = noise.size() * static_cast<std::size_t>(steps);
    auto step_gamma = [&](int step, bool& budget_hit, std::size_t& used) {
        double sum = 0.0;
        for (std::size_t i = 0; i < noise.size(); ++i) {
            const Superoperator delta = noise.error_at(i, step) - mean;
            if (delta.ptm().cwiseAbs().maxCoeff() <= 1e-15) continue;
            if (++used > opts.max_norms) {
                budget_hit = true;
                return 0.0;
            }
            sum += herm_1to1_norm(delta, opts.norm);
        }
        return sum / static_cast<double>(noise.size());
    };
    VariationDiagnostics out;
    bool budget_hit = false;
    std::size_t used = 0;
    if (!noise.time_dependent()) {
        out.gamma = step_gamma(0, budget_hit, used);
    } else {
        for (int step = 1; step <= steps && !budget_hit; ++step) {
            out.per_step_gamma.push_back(step_gamma(step, budget_hit, used));
        }
        for (double g : out.per_step_gamma) out.gamma = std::max(out.gamma, g);
    }
    if (budget_hit) {
        throw ResourceError("gamma needs up to " + std::to_string(evaluations) +
                            " norm evaluations, above the budget of " + std::to_string(opts.max_norms));
    }
    return out;
}

}  // namespace rbench

#endif  // RBENCH_ANALYSIS_HPP
