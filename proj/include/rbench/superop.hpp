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

#ifndef RBENCH_SUPEROP_HPP
#define RBENCH_SUPEROP_HPP

// Pauli-transfer-matrix representation of states, effects and channels.
//
// Basis convention: P_0 = I/sqrt(d), then the remaining normalized Paulis.
// For d = 2 the order is (I, X, Y, Z). For d = 4 it is the lexicographic
// tensor product, index 4*a + b <-> sigma_a (x) sigma_b / 2, so CSV dumps
// of transfer matrices are stable across runs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rbench/common.hpp"

namespace rbench {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cdouble = std::complex<double>;

namespace detail {

inline void require_supported_dim(int d) {
    if (d != 2 && d != 4) {
        throw ValidationError("dimension " + std::to_string(d) + " unsupported (expected 2 or 4)");
    }
}

inline std::vector<CMatrix> single_qubit_paulis() {
    const cdouble i1{0.0, 1.0};
    CMatrix id = CMatrix::Identity(2, 2);
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    y << 0.0, -i1, i1, 0.0;
    z << 1.0, 0.0, 0.0, -1.0;
    return {id, x, y, z};
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline std::vector<CMatrix> build_pauli_basis(int d) {
    const auto sigma = single_qubit_paulis();
    std::vector<CMatrix> basis;
    if (d == 2) {
        for (const auto& s : sigma) basis.push_back(s / std::sqrt(2.0));
    } else {
        for (const auto& a : sigma) {
            for (const auto& b : sigma) basis.push_back(kron(a, b) / 2.0);
        }
    }
    return basis;
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const CMatrix& m) { return max_abs(m - m.adjoint()); }

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

/// Normalized Pauli basis for d in {2, 4}.
inline const std::vector<CMatrix>& pauli_basis(int d) {
    static const std::vector<CMatrix> basis2 = detail::build_pauli_basis(2);
    static const std::vector<CMatrix> basis4 = detail::build_pauli_basis(4);
    detail::require_supported_dim(d);
    return d == 2 ? basis2 : basis4;
}

/// Coefficients Tr[P_k X]; complex in general, real for Hermitian X.
inline CVector pauli_coefficients(const CMatrix& x) {
    const int d = static_cast<int>(x.rows());
    const auto& basis = pauli_basis(d);
    CVector c(d * d);
    for (int k = 0; k < d * d; ++k) c(k) = (basis[k] * x).trace();
    return c;
}

inline Vector pauli_vector(const CMatrix& hermitian) { return pauli_coefficients(hermitian).real(); }

inline CMatrix from_pauli_coefficients(const CVector& c, int d) {
    const auto& basis = pauli_basis(d);
    CMatrix x = CMatrix::Zero(d, d);
    for (int k = 0; k < d * d; ++k) x += c(k) * basis[k];
    return x;
}

inline CMatrix from_pauli_vector(const Vector& v, int d) {
    return from_pauli_coefficients(v.cast<cdouble>(), d);
}

/// A unit-trace positive semidefinite operator (the prepared state).
class DensityOperator {
   public:
    explicit DensityOperator(CMatrix rho) : rho_(std::move(rho)) {
        if (rho_.rows() != rho_.cols()) throw ValidationError("density operator must be square");
        detail::require_supported_dim(static_cast<int>(rho_.rows()));
        if (detail::hermiticity_defect(rho_) > tol::kStructural) {
            throw ValidationError("density operator is not Hermitian to 1e-12");
        }
        if (std::abs(rho_.trace() - cdouble{1.0, 0.0}) > tol::kStructural) {
            throw ValidationError("density operator trace differs from 1 by more than 1e-12");
        }
        if (detail::hermitian_eigenvalues(rho_).minCoeff() < -tol::kPositivity) {
            throw ValidationError("density operator has an eigenvalue below -1e-10");
        }
    }

    /// |psi><psi| for a normalized vector.
    static DensityOperator pure(const CVector& psi) {
        if (std::abs(psi.norm() - 1.0) > tol::kStructural) {
            throw ValidationError("pure state vector is not normalized");
        }
        return DensityOperator(psi * psi.adjoint());
    }

    static DensityOperator basis_state(int d, int k) {
        CVector psi = CVector::Zero(d);
        psi(k) = 1.0;
        return pure(psi);
    }

    int dim() const { return static_cast<int>(rho_.rows()); }
    const CMatrix& matrix() const { return rho_; }
    Vector pauli_vector() const { return rbench::pauli_vector(rho_); }

   private:
    CMatrix rho_;
};

/// A POVM element 0 <= E <= I.
class MeasurementEffect {
   public:
    explicit MeasurementEffect(CMatrix e) : e_(std::move(e)) {
        if (e_.rows() != e_.cols()) throw ValidationError("measurement effect must be square");
        detail::require_supported_dim(static_cast<int>(e_.rows()));
        if (detail::hermiticity_defect(e_) > tol::kStructural) {
            throw ValidationError("measurement effect is not Hermitian to 1e-12");
        }
        const auto ev = detail::hermitian_eigenvalues(e_);
        if (ev.minCoeff() < -tol::kPositivity || ev.maxCoeff() > 1.0 + tol::kPositivity) {
            throw ValidationError("measurement effect spectrum leaves [0, 1] by more than 1e-10");
        }
    }

    static MeasurementEffect projector(int d, int k) {
        CMatrix e = CMatrix::Zero(d, d);
        e(k, k) = 1.0;
        return MeasurementEffect(e);
    }

    int dim() const { return static_cast<int>(e_.rows()); }
    const CMatrix& matrix() const { return e_; }
    Vector pauli_vector() const { return rbench::pauli_vector(e_); }

   private:
    CMatrix e_;
};

/// Hermitian-preserving linear map on d x d matrices, stored as its real
/// (d^2 x d^2) Pauli transfer matrix with entries Tr[P_i S(P_j)].
class Superoperator {
   public:
    Superoperator(int dim, Matrix ptm) : dim_(dim), ptm_(std::move(ptm)) {
        detail::require_supported_dim(dim_);
        if (ptm_.rows() != dim_ * dim_ || ptm_.cols() != dim_ * dim_) {
            throw ValidationError("transfer matrix must be d^2 x d^2");
        }
        if (!ptm_.allFinite()) throw ValidationError("transfer matrix has non-finite entries");
    }

    static Superoperator identity(int dim) { return Superoperator(dim, Matrix::Identity(dim * dim, dim * dim)); }
    static Superoperator zero(int dim) { return Superoperator(dim, Matrix::Zero(dim * dim, dim * dim)); }

    int dim() const { return dim_; }
    const Matrix& ptm() const { return ptm_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return ptm_(i, j); }

    bool is_trace_preserving(double tol = tol::kStructural) const {
        Vector expected = Vector::Zero(ptm_.cols());
        expected(0) = 1.0;
        return (ptm_.row(0).transpose() - expected).cwiseAbs().maxCoeff() <= tol;
    }

    /// Difference maps such as Lambda_i - mean annihilate the trace.
    bool is_trace_annihilating(double tol = tol::kStructural) const {
        return ptm_.row(0).cwiseAbs().maxCoeff() <= tol;
    }

    /// Heisenberg-picture adjoint; for unitary channels this is the inverse.
    Superoperator adjoint() const { return Superoperator(dim_, ptm_.transpose()); }

    friend Superoperator operator+(const Superoperator& a, const Superoperator& b) {
        require_same_dim(a, b);
        return Superoperator(a.dim_, a.ptm_ + b.ptm_);
    }
    friend Superoperator operator-(const Superoperator& a, const Superoperator& b) {
        require_same_dim(a, b);
        return Superoperator(a.dim_, a.ptm_ - b.ptm_);
    }
    friend Superoperator operator*(double s, const Superoperator& a) { return Superoperator(a.dim_, s * a.ptm_); }

    static void require_same_dim(const Superoperator& a, const Superoperator& b) {
        if (a.dim_ != b.dim_) {
            throw ValidationError("superoperator dimension mismatch: " + std::to_string(a.dim_) + " vs " +
                                  std::to_string(b.dim_));
        }
    }

   private:
    int dim_;
    Matrix ptm_;
};

inline bool is_unitary(const CMatrix& u, double tol = tol::kUnitarity) {
    if (u.rows() != u.cols()) return false;
    return detail::max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())) <= tol;
}

inline Superoperator ptm_from_unitary(const CMatrix& u) {
    if (u.rows() != u.cols()) throw ValidationError("unitary must be square");
    const int d = static_cast<int>(u.rows());
    detail::require_supported_dim(d);
    if (!is_unitary(u)) throw ValidationError("matrix is not unitary: U^dagger U deviates from I by more than 1e-10");
    const auto& basis = pauli_basis(d);
    const int n = d * d;
    Matrix ptm(n, n);
    const CMatrix ud = u.adjoint();
    for (int j = 0; j < n; ++j) {
        const CMatrix image = u * basis[j] * ud;
        for (int i = 0; i < n; ++i) ptm(i, j) = (basis[i] * image).trace().real();
    }
    return Superoperator(d, std::move(ptm));
}

inline Superoperator ptm_from_kraus(std::span<const CMatrix> kraus) {
    if (kraus.empty()) throw ValidationError("Kraus list is empty");
    const int d = static_cast<int>(kraus.front().rows());
    detail::require_supported_dim(d);
    CMatrix completeness = CMatrix::Zero(d, d);
    for (const auto& k : kraus) {
        if (k.rows() != d || k.cols() != d) throw ValidationError("Kraus operators must all be d x d");
        completeness += k.adjoint() * k;
    }
    if (detail::max_abs(completeness - CMatrix::Identity(d, d)) > tol::kUnitarity) {
        throw ValidationError("Kraus operators violate completeness sum K^dagger K = I beyond 1e-10");
    }
    const auto& basis = pauli_basis(d);
    const int n = d * d;
    Matrix ptm = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        CMatrix image = CMatrix::Zero(d, d);
        for (const auto& k : kraus) image += k * basis[j] * k.adjoint();
        for (int i = 0; i < n; ++i) ptm(i, j) = (basis[i] * image).trace().real();
    }
    return Superoperator(d, std::move(ptm));
}

inline Superoperator ptm_from_kraus(std::initializer_list<CMatrix> kraus) {
    std::vector<CMatrix> v(kraus);
    return ptm_from_kraus(std::span<const CMatrix>(v));
}

/// Kraus operators of amplitude damping with decay probability gamma (d = 2).
inline std::vector<CMatrix> amplitude_damping_kraus(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("damping probability must lie in [0, 1]");
    CMatrix k0 = CMatrix::Zero(2, 2), k1 = CMatrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return {k0, k1};
}

inline Superoperator amplitude_damping(double gamma) {
    const auto k = amplitude_damping_kraus(gamma);
    return ptm_from_kraus(std::span<const CMatrix>(k));
}

/// `before` acts first.
inline Superoperator compose(const Superoperator& after, const Superoperator& before) {
    Superoperator::require_same_dim(after, before);
    return Superoperator(after.dim(), after.ptm() * before.ptm());
}

/// Applies S to an arbitrary d x d matrix.
inline CMatrix apply(const Superoperator& s, const CMatrix& x) {
    if (x.rows() != s.dim() || x.cols() != s.dim()) throw ValidationError("operand dimension does not match superoperator");
    const CVector out = s.ptm().cast<cdouble>() * pauli_coefficients(x);
    return from_pauli_coefficients(out, s.dim());
}

inline CMatrix apply(const Superoperator& s, const DensityOperator& rho) { return rbench::apply(s, rho.matrix()); }

/// p * rho + (1 - p) Tr[rho] I / d.
inline Superoperator depolarizing(double p, int d) {
    detail::require_supported_dim(d);
    const double lower = -1.0 / (d * d - 1.0);
    if (!(p >= lower - tol::kStructural && p <= 1.0 + tol::kStructural)) {
        throw ValidationError("depolarizing parameter " + detail::format_double(p) +
                              " outside the completely positive range [-1/(d^2-1), 1]");
    }
    Matrix ptm = Matrix::Identity(d * d, d * d) * p;
    ptm(0, 0) = 1.0;
    return Superoperator(d, std::move(ptm));
}

/// (Tr ptm - 1) / (d^2 - 1): the depolarizing parameter of the twirl of S.
inline double depolarizing_parameter(const Superoperator& s) {
    const int d = s.dim();
    return (s.ptm().trace() - 1.0) / (d * d - 1.0);
}

/// Haar-averaged survival probability p + (1 - p) / d.
inline double average_gate_fidelity(const Superoperator& s) {
    if (!s.is_trace_preserving()) throw ValidationError("average gate fidelity requires a trace-preserving map");
    const double p = depolarizing_parameter(s);
    return p + (1.0 - p) / s.dim();
}

/// Group average (1/K) sum_g R_g^T S R_g over orthogonal transfer matrices R_g.
inline Superoperator twirl(const Superoperator& s, std::span<const Matrix> group_transfers) {
    if (group_transfers.empty()) throw ValidationError("cannot twirl over an empty group");
    const Eigen::Index n = s.ptm().rows();
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& r : group_transfers) {
        if (r.rows() != n) throw ValidationError("group transfer matrix dimension mismatch");
        acc.noalias() += r.transpose() * s.ptm() * r;
    }
    return Superoperator(s.dim(), acc / static_cast<double>(group_transfers.size()));
}

/// Choi matrix sum_{ij} |i><j| (x) S(|i><j|), of size d^2 x d^2.
inline CMatrix choi_matrix(const Superoperator& s) {
    const int d = s.dim();
    CMatrix choi = CMatrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            CMatrix unit = CMatrix::Zero(d, d);
            unit(i, j) = 1.0;
            choi.block(i * d, j * d, d, d) = rbench::apply(s, unit);
        }
    }
    return choi;
}

inline double choi_min_eigenvalue(const Superoperator& s) {
    const CMatrix choi = choi_matrix(s);
    return detail::hermitian_eigenvalues(0.5 * (choi + choi.adjoint())).minCoeff();
}

inline bool is_completely_positive(const Superoperator& s) { return choi_min_eigenvalue(s) >= -tol::kPositivity; }

/// d^2 rows of d^2 comma-separated entries, 17 significant digits.
inline void write_csv(std::ostream& out, const Superoperator& s) {
    const Matrix& m = s.ptm();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << detail::format_double(m(i, j));
        }
        out << '\n';
    }
}

}  // namespace rbench

#endif  // RBENCH_SUPEROP_HPP
