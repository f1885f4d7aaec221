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

#include "rbench/herm_norm.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace rbench;

namespace {

double bloch_brute_force(const Superoperator& s, int n) {
    double best = 0.0;
    for (const auto& psi : rbench::testing::fibonacci_bloch_states(n)) {
        const CMatrix out = rbench::apply(s, CMatrix(psi * psi.adjoint()));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (out + out.adjoint()));
        best = std::max(best, es.eigenvalues().cwiseAbs().sum());
    }
    return best;
}

}  // namespace

TEST(herm_norm, identity_and_positive_maps) {
    EXPECT_NEAR(herm_1to1_norm(Superoperator::identity(2)), 1.0, 1e-9);
    for (double p : {0.0, 0.3, 0.9, 1.0}) EXPECT_NEAR(herm_1to1_norm(depolarizing(p, 2)), 1.0, 1e-9);
    EXPECT_NEAR(herm_1to1_norm(Superoperator::identity(4)), 1.0, 1e-9);
}

TEST(herm_norm, depolarizing_difference) {
    const auto diff = depolarizing(0.9, 2) - Superoperator::identity(2);
    EXPECT_TRUE(diff.is_trace_annihilating());
    EXPECT_NEAR(herm_1to1_norm(diff), 0.1, 1e-9);
    EXPECT_NEAR(herm_1to1_norm(depolarizing(0.9, 4) - Superoperator::identity(4)), 2 * 0.1 * 3 / 4, 1e-6);
}

TEST(herm_norm, agrees_with_bloch_brute_force) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        const auto a = rbench::testing::random_weak_cptp(2, 0.2, rng);
        const auto b = rbench::testing::random_weak_cptp(2, 0.2, rng);
        const auto diff = a - b;
        const double fast = herm_1to1_norm(diff);
        const double brute = bloch_brute_force(diff, 10000);
        EXPECT_NEAR(fast, brute, 1e-4);
        EXPECT_GE(fast, brute - 1e-12);
    }
}

// The search only visits pure states; mixed Hermitian inputs of unit trace
// norm must never beat it.
TEST(herm_norm, pure_states_attain_the_maximum) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const auto diff = rbench::testing::random_cptp(2, rng) - rbench::testing::random_cptp(2, rng);
        const double norm = herm_1to1_norm(diff);
        for (int k = 0; k < 500; ++k) {
            const CMatrix a = rbench::testing::random_complex(2, 2, rng);
            CMatrix x = a + a.adjoint();
            Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
            x /= es.eigenvalues().cwiseAbs().sum();
            const CMatrix out = rbench::apply(diff, x);
            Eigen::SelfAdjointEigenSolver<CMatrix> eo(0.5 * (out + out.adjoint()));
            EXPECT_LE(eo.eigenvalues().cwiseAbs().sum(), norm + 1e-9);
        }
    }
}

TEST(herm_norm, budget_exhaustion_reports_best_bound) {
    HermNormOptions opts;
    opts.max_evaluations = 100;
    try {
        herm_1to1_norm(depolarizing(0.9, 2) - Superoperator::identity(2), opts);
        FAIL() << "expected NormNotConverged";
    } catch (const NormNotConverged& e) {
        EXPECT_NEAR(e.best_bound(), 0.1, 1e-9);
    }
}
