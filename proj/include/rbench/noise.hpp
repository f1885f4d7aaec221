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

#ifndef RBENCH_NOISE_HPP
#define RBENCH_NOISE_HPP

// Gate-dependent error assignments. The error follows its gate: the noisy
// implementation of C_i is Lambda_i o C_i, and the recovery gate uses the
// same per-gate assignment evaluated at its own index.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rbench/clifford.hpp"
#include "rbench/rng.hpp"
#include "rbench/superop.hpp"

namespace rbench {

/// Optional per-step modification of a gate's base error: (step j >= 1, gate, base) -> error.
using TimeModifier = std::function<Superoperator(int step, std::size_t gate, const Superoperator& base)>;

class NoiseModel {
   public:
    NoiseModel(std::shared_ptr<const CliffordGroup> group, std::vector<Superoperator> per_gate, std::string label)
        : group_(std::move(group)), per_gate_(std::move(per_gate)), label_(std::move(label)) {
        if (!group_) throw ValidationError("noise model needs a Clifford group");
        if (per_gate_.size() != group_->size()) {
            throw ValidationError("noise model must assign one error per group element");
        }
        for (std::size_t i = 0; i < per_gate_.size(); ++i) validate(per_gate_[i], i, 0);
    }

    /// Returns a copy whose error at step j is modifier(j, gate, base). CP/TP is
    /// verified for every gate and every step in 1..horizon.
    NoiseModel with_time_modifier(TimeModifier modifier, int horizon) const {
        if (!modifier) throw ValidationError("time modifier is empty");
        if (horizon < 1) throw ValidationError("time modifier horizon must be positive");
        NoiseModel out = *this;
        out.modifier_ = std::move(modifier);
        out.horizon_ = horizon;
        for (int step = 1; step <= horizon; ++step) {
            for (std::size_t i = 0; i < out.per_gate_.size(); ++i) out.validate(out.error_at(i, step), i, step);
        }
        return out;
    }

    const CliffordGroup& group() const { return *group_; }
    const std::shared_ptr<const CliffordGroup>& group_ptr() const { return group_; }
    int dim() const { return group_->dim(); }
    std::size_t size() const { return per_gate_.size(); }
    const std::string& label() const { return label_; }
    const std::vector<Superoperator>& per_gate() const { return per_gate_; }
    const Superoperator& error(std::size_t gate) const { return per_gate_.at(gate); }

    bool time_dependent() const { return static_cast<bool>(modifier_); }
    int horizon() const { return horizon_; }

    Superoperator error_at(std::size_t gate, int step) const {
        if (!modifier_) return per_gate_.at(gate);
        return modifier_(step, gate, per_gate_.at(gate));
    }

    /// Transfer matrix of the noisy gate Lambda_i o C_i at time-independent settings.
    Matrix noisy_gate(std::size_t gate) const { return per_gate_.at(gate).ptm() * group_->transfer(gate); }
    Matrix noisy_gate(std::size_t gate, int step) const {
        if (!modifier_) return noisy_gate(gate);
        return error_at(gate, step).ptm() * group_->transfer(gate);
    }

   private:
    void validate(const Superoperator& s, std::size_t gate, int step) const {
        const auto where = [&] {
            return "error for gate " + std::to_string(gate) + (step ? " at step " + std::to_string(step) : "");
        };
        if (s.dim() != group_->dim()) throw ValidationError(where() + " has the wrong dimension");
        if (!s.is_trace_preserving(tol::kStructural * 100)) throw ValidationError(where() + " is not trace-preserving");
        if (!is_completely_positive(s)) throw ValidationError(where() + " fails the Choi positivity test");
    }

    std::shared_ptr<const CliffordGroup> group_;
    std::vector<Superoperator> per_gate_;
    std::string label_;
    TimeModifier modifier_;
    int horizon_ = 0;
};

struct FixedDelta {
    double delta;
};
struct UniformDelta {
    double lo;
    double hi;
};
using DeltaSpec = std::variant<FixedDelta, UniformDelta>;

/// Over/under-rotation of a single-qubit gate unitary by +-delta on its eigenphases.
///
/// Eigenvectors are ordered by ascending eigenphase of the phase-canonical
/// unitary; the first receives e^{+i delta}, the second e^{-i delta}. For a
/// degenerate unitary (the identity) the computational basis is used, so the
/// identity gate's error is diag(e^{i delta}, e^{-i delta}).
inline CMatrix overrotation_error_unitary(const CMatrix& gate, double delta) {
    if (gate.rows() != 2) throw UnsupportedError("over-rotation errors are implemented for single-qubit gates");
    Eigen::ComplexEigenSolver<CMatrix> es(gate);
    const CVector ev = es.eigenvalues();
    CMatrix basis;
    if (std::abs(ev(0) - ev(1)) < 1e-9) {
        basis = CMatrix::Identity(2, 2);
    } else {
        CMatrix vecs = es.eigenvectors();
        std::array<int, 2> order{0, 1};
        if (std::arg(ev(1)) < std::arg(ev(0))) order = {1, 0};
        basis.resize(2, 2);
        for (int k = 0; k < 2; ++k) basis.col(k) = vecs.col(order[k]).normalized();
    }
    CMatrix phases = CMatrix::Zero(2, 2);
    phases(0, 0) = std::polar(1.0, delta);
    phases(1, 1) = std::polar(1.0, -delta);
    return basis * phases * basis.adjoint();
}

inline NoiseModel overrotation_model(std::shared_ptr<const CliffordGroup> group, const DeltaSpec& spec, Stream& rng) {
    if (!group) throw ValidationError("noise model needs a Clifford group");
    if (group->n_qubits() != 1) throw UnsupportedError("over-rotation noise is implemented for one qubit only");
    if (const auto* r = std::get_if<UniformDelta>(&spec); r && r->hi < r->lo) {
        throw ValidationError("over-rotation range has hi < lo");
    }
    std::vector<Superoperator> errors;
    std::string label;
    for (std::size_t i = 0; i < group->size(); ++i) {
        double delta;
        if (const auto* f = std::get_if<FixedDelta>(&spec)) {
            delta = f->delta;
            label = "overrotation(delta=" + detail::format_double(f->delta) + ")";
        } else {
            const auto& r = std::get<UniformDelta>(spec);
            delta = rng.uniform(r.lo, r.hi);
            label = "overrotation(delta~U[" + detail::format_double(r.lo) + "," + detail::format_double(r.hi) + "])";
        }
        errors.push_back(ptm_from_unitary(overrotation_error_unitary(group->element(i).unitary, delta)));
    }
    return NoiseModel(std::move(group), std::move(errors), label);
}

inline NoiseModel depolarizing_model(std::shared_ptr<const CliffordGroup> group, double lo, double hi, Stream& rng) {
    if (!group) throw ValidationError("noise model needs a Clifford group");
    const int d = group->dim();
    if (hi < lo) throw ValidationError("depolarizing range has hi < lo");
    if (lo < -1.0 / (d * d - 1.0) || hi > 1.0) {
        throw ValidationError("depolarizing range leaves the completely positive interval [-1/(d^2-1), 1]");
    }
    std::vector<Superoperator> errors;
    for (std::size_t i = 0; i < group->size(); ++i) errors.push_back(depolarizing(rng.uniform(lo, hi), d));
    return NoiseModel(std::move(group), std::move(errors),
                      "depolarizing(p~U[" + detail::format_double(lo) + "," + detail::format_double(hi) + "])");
}

/// Amplitude damping on every qubit. The drawn parameter is the non-decay
/// weight 1 - gamma; two-qubit models damp both qubits independently.
inline NoiseModel amplitude_damping_model(std::shared_ptr<const CliffordGroup> group, double lo, double hi,
                                          Stream& rng) {
    if (!group) throw ValidationError("noise model needs a Clifford group");
    if (hi < lo) throw ValidationError("amplitude damping range has hi < lo");
    if (lo < 0.0 || hi > 1.0) throw ValidationError("amplitude damping range must lie within [0, 1]");
    std::vector<Superoperator> errors;
    for (std::size_t i = 0; i < group->size(); ++i) {
        const double gamma = 1.0 - rng.uniform(lo, hi);
        const auto k1 = amplitude_damping_kraus(std::clamp(gamma, 0.0, 1.0));
        if (group->n_qubits() == 1) {
            errors.push_back(ptm_from_kraus(std::span<const CMatrix>(k1)));
        } else {
            std::vector<CMatrix> k2;
            for (const auto& a : k1) {
                for (const auto& b : k1) k2.push_back(detail::kron(a, b));
            }
            errors.push_back(ptm_from_kraus(std::span<const CMatrix>(k2)));
        }
    }
    return NoiseModel(std::move(group), std::move(errors),
                      "amplitude_damping(1-gamma~U[" + detail::format_double(lo) + "," + detail::format_double(hi) +
                          "])");
}

/// Per-gate error outer_i o inner_i; `inner` acts first.
inline NoiseModel compose_models(const NoiseModel& outer, const NoiseModel& inner) {
    if (outer.group().n_qubits() != inner.group().n_qubits()) {
        throw ValidationError("cannot compose noise models over different groups");
    }
    if (outer.time_dependent() || inner.time_dependent()) {
        throw UnsupportedError("composition of time-dependent noise models is not supported");
    }
    std::vector<Superoperator> errors;
    for (std::size_t i = 0; i < outer.size(); ++i) errors.push_back(compose(outer.error(i), inner.error(i)));
    return NoiseModel(outer.group_ptr(), std::move(errors), outer.label() + " o " + inner.label());
}

/// Error after C_i is C_i^{-1}: every noisy gate is the identity.
inline NoiseModel adversarial_inverse_model(std::shared_ptr<const CliffordGroup> group) {
    if (!group) throw ValidationError("noise model needs a Clifford group");
    std::vector<Superoperator> errors;
    for (std::size_t i = 0; i < group->size(); ++i) errors.push_back(group->element(group->inverse(i)).transfer);
    return NoiseModel(std::move(group), std::move(errors), "adversarial_inverse");
}

inline NoiseModel gate_independent_model(std::shared_ptr<const CliffordGroup> group, const Superoperator& error,
                                         std::string label = "gate_independent") {
    if (!group) throw ValidationError("noise model needs a Clifford group");
    std::vector<Superoperator> errors(group->size(), error);
    return NoiseModel(std::move(group), std::move(errors), std::move(label));
}

inline NoiseModel noiseless_model(std::shared_ptr<const CliffordGroup> group) {
    const int d = group ? group->dim() : 2;
    return gate_independent_model(std::move(group), Superoperator::identity(d), "noiseless");
}

struct MeanError {
    Superoperator superop;
    double p_bar;
};

/// Arithmetic mean over gates (and over steps 1..horizon for time-dependent models).
inline MeanError mean_error(const NoiseModel& model) {
    Matrix acc = Matrix::Zero(model.dim() * model.dim(), model.dim() * model.dim());
    std::size_t count = 0;
    if (model.time_dependent()) {
        for (int step = 1; step <= model.horizon(); ++step) {
            for (std::size_t i = 0; i < model.size(); ++i, ++count) acc += model.error_at(i, step).ptm();
        }
    } else {
        for (const auto& e : model.per_gate()) {
            acc += e.ptm();
            ++count;
        }
    }
    Superoperator mean(model.dim(), acc / static_cast<double>(count));
    const double p = depolarizing_parameter(mean);
    return {std::move(mean), p};
}

}  // namespace rbench

#endif  // RBENCH_NOISE_HPP
