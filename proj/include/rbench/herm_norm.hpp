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

#ifndef RBENCH_HERM_NORM_HPP
#define RBENCH_HERM_NORM_HPP

// Hermitian 1->1 norm of a superoperator: max ||S(X)||_1 over Hermitian X
// with ||X||_1 <= 1. The unit ball is the convex hull of +-|phi><phi| and
// X -> ||S(X)||_1 is convex, so the maximum sits at a pure state. We search
// pure states on a fixed grid and polish the best candidates with a compass
// search. No randomness is involved.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "rbench/superop.hpp"

namespace rbench {

/// Raised when the refinement exhausts its evaluation budget.
class NormNotConverged : public Error {
   public:
    NormNotConverged(double best_bound, int evaluations)
        : Error("herm_1to1_norm did not converge within " + std::to_string(evaluations) +
                " evaluations; best bound " + detail::format_double(best_bound)),
          best_bound_(best_bound) {}
    double best_bound() const { return best_bound_; }

   private:
    double best_bound_;
};

struct HermNormOptions {
    double tol = 1e-9;
    int max_evaluations = 200000;
    int refine_starts = 8;
};

namespace detail {

/// Pure state from 2(d-1) angles: d-1 hyperspherical amplitude angles, then d-1 phases.
inline CVector pure_state_from_angles(int d, std::span<const double> x) {
    CVector psi(d);
    if (d == 2) {
        psi(0) = std::cos(x[0] / 2);
        psi(1) = std::polar(std::sin(x[0] / 2), x[1]);
        return psi;
    }
    double carry = 1.0;
    for (int k = 0; k < d - 1; ++k) {
        psi(k) = carry * std::cos(x[k]);
        carry *= std::sin(x[k]);
    }
    psi(d - 1) = carry;
    for (int k = 1; k < d; ++k) psi(k) *= std::polar(1.0, x[d - 2 + k]);
    return psi;
}

inline double trace_norm_of_pauli_vector(const Vector& out, int d) {
    if (d == 2) {
        // (x0 I + x.sigma)/sqrt(2) has eigenvalues (x0 +- |x|)/sqrt(2).
        return std::sqrt(2.0) * std::max(std::abs(out(0)), out.tail(3).norm());
    }
    return hermitian_eigenvalues(from_pauli_vector(out, d)).cwiseAbs().sum();
}

inline double output_trace_norm(const Superoperator& s, const CVector& psi) {
    const CMatrix rho = psi * psi.adjoint();
    return trace_norm_of_pauli_vector(s.ptm() * pauli_vector(rho), s.dim());
}

struct NormGrid {
    std::vector<int> counts;
    std::vector<double> lo, hi;
    bool periodic(std::size_t k, int d) const { return d == 2 ? k == 1 : k >= static_cast<std::size_t>(d - 1); }
};

inline NormGrid norm_grid(int d) {
    NormGrid g;
    if (d == 2) {
        g.counts = {64, 128};
        g.lo = {0.0, 0.0};
        g.hi = {std::numbers::pi, 2 * std::numbers::pi};
    } else {
        for (int k = 0; k < d - 1; ++k) {
            g.counts.push_back(5);
            g.lo.push_back(0.0);
            g.hi.push_back(std::numbers::pi / 2);
        }
        for (int k = 0; k < d - 1; ++k) {
            g.counts.push_back(6);
            g.lo.push_back(0.0);
            g.hi.push_back(2 * std::numbers::pi);
        }
    }
    return g;
}

}  // namespace detail

/// max over pure states phi of ||S(|phi><phi|)||_1, correct to opts.tol in the search parameters.
inline double herm_1to1_norm(const Superoperator& s, const HermNormOptions& opts = {}) {
    const int d = s.dim();
    const auto grid = detail::norm_grid(d);
    const std::size_t dims = grid.counts.size();

    // Grid spacing; periodic axes exclude the endpoint.
    std::vector<double> spacing(dims);
    for (std::size_t k = 0; k < dims; ++k) {
        const int n = grid.counts[k];
        spacing[k] = grid.periodic(k, d) ? (grid.hi[k] - grid.lo[k]) / n : (grid.hi[k] - grid.lo[k]) / (n - 1);
    }

    struct Candidate {
        double value;
        std::vector<double> x;
    };
    std::vector<Candidate> best;
    int evaluations = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        return detail::output_trace_norm(s, detail::pure_state_from_angles(d, x));
    };

    std::vector<int> idx(dims, 0);
    std::vector<double> x(dims);
    for (;;) {
        for (std::size_t k = 0; k < dims; ++k) x[k] = grid.lo[k] + spacing[k] * idx[k];
        const double v = eval(x);
        if (static_cast<int>(best.size()) < opts.refine_starts || v > best.back().value) {
            best.push_back({v, x});
            std::stable_sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
            if (static_cast<int>(best.size()) > opts.refine_starts) best.pop_back();
        }
        std::size_t k = 0;
        while (k < dims && ++idx[k] == grid.counts[k]) idx[k++] = 0;
        if (k == dims) break;
    }

    double result = best.front().value;
    for (auto& cand : best) {
        std::vector<double> step = spacing;
        double value = cand.value;
        std::vector<double> pos = cand.x;
        while (*std::max_element(step.begin(), step.end()) >= opts.tol) {
            if (evaluations > opts.max_evaluations) throw NormNotConverged(std::max(result, value), evaluations);
            bool moved = false;
            for (std::size_t k = 0; k < dims; ++k) {
                for (double sign : {1.0, -1.0}) {
                    std::vector<double> trial = pos;
                    trial[k] += sign * step[k];
                    const double v = eval(trial);
                    if (v > value) {
                        value = v;
                        pos = std::move(trial);
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) {
                for (auto& st : step) st *= 0.5;
            }
        }
        result = std::max(result, value);
    }
    return result;
}

inline double herm_1to1_norm(const Superoperator& s, double tol) {
    HermNormOptions opts;
    opts.tol = tol;
    return herm_1to1_norm(s, opts);
}

}  // namespace rbench

#endif  // RBENCH_HERM_NORM_HPP
