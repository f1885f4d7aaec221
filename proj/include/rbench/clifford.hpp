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

#ifndef RBENCH_CLIFFORD_HPP
#define RBENCH_CLIFFORD_HPP

// Exhaustive Clifford groups on one and two qubits.
//
// Elements are discovered breadth-first from the identity by left-multiplying
// generators in a fixed order:
//   n = 1: H, S
//   n = 2: H(x)I, I(x)H, S(x)I, I(x)S, CNOT (control = first tensor factor)
// Two unitaries are the same element iff their integer transfer matrices
// agree, which quotients out the global phase. Index 0 is the identity.

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rbench/rng.hpp"
#include "rbench/superop.hpp"

namespace rbench {

struct CliffordElement {
    std::size_t index;
    /// Phase-canonical: the first non-zero entry in row-major order is real positive.
    CMatrix unitary;
    Superoperator transfer;
};

class CliffordGroup {
   public:
    static constexpr std::size_t kIdentity = 0;

    /// Builds the full group; n_qubits must be 1 or 2.
    static CliffordGroup build(int n_qubits) { return CliffordGroup(n_qubits); }

    int n_qubits() const { return n_qubits_; }
    int dim() const { return dim_; }
    std::size_t size() const { return elements_.size(); }
    std::size_t identity_index() const { return kIdentity; }

    const CliffordElement& element(std::size_t i) const { return elements_.at(i); }
    const Matrix& transfer(std::size_t i) const { return elements_[i].transfer.ptm(); }
    std::span<const Matrix> transfers() const { return transfers_; }
    std::span<const std::int8_t> integer_transfer(std::size_t i) const {
        return {int_ptms_.data() + i * block(), block()};
    }

    /// Index of C_after o C_before (C_before applied first).
    std::size_t compose(std::size_t after, std::size_t before) const {
        check_index(after);
        check_index(before);
        if (!table_.empty()) return table_[after * size() + before];
        std::vector<std::int8_t> prod(block());
        multiply(integer_transfer(after), integer_transfer(before), prod);
        return lookup_or_throw(prod);
    }

    std::size_t inverse(std::size_t i) const {
        check_index(i);
        return inverse_[i];
    }

    /// Index of the gate returning C_{i_m} o ... o C_{i_1} to the identity.
    std::size_t recovery(std::span<const std::size_t> sequence) const {
        if (sequence.empty()) throw ValidationError("recovery gate needs a non-empty sequence");
        std::size_t acc = kIdentity;
        for (std::size_t g : sequence) acc = compose(g, acc);
        return inverse(acc);
    }

    std::size_t sample_uniform(Stream& rng) const { return static_cast<std::size_t>(rng.below(size())); }

    /// Lookup by integer transfer matrix; returns size() when absent.
    std::size_t find(std::span<const std::int8_t> int_ptm) const {
        auto it = lookup_.find(key_of(int_ptm));
        return it == lookup_.end() ? size() : it->second;
    }

    /// CSV rows `index,inverse_index,<d^4 ptm entries>` with a header line.
    void write_csv(std::ostream& out) const {
        out << "index,inverse_index";
        for (std::size_t k = 0; k < block(); ++k) out << ",r" << k / dim2() << 'c' << k % dim2();
        out << '\n';
        for (std::size_t i = 0; i < size(); ++i) {
            out << i << ',' << inverse_[i];
            for (auto v : integer_transfer(i)) out << ',' << static_cast<int>(v);
            out << '\n';
        }
    }

   private:
    explicit CliffordGroup(int n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits != 1 && n_qubits != 2) {
            throw UnsupportedError("Clifford groups are supported for 1 or 2 qubits only (got " +
                                   std::to_string(n_qubits) + ")");
        }
        dim_ = 1 << n_qubits;
        const auto gens = generators();
        std::vector<std::vector<std::int8_t>> gen_int;
        for (const auto& g : gens) gen_int.push_back(to_integer(ptm_from_unitary(g).ptm()));

        add_element(canonical_phase(CMatrix::Identity(dim_, dim_)), to_integer(Matrix::Identity(dim2(), dim2())));
        std::vector<std::int8_t> prod(block());
        for (std::size_t head = 0; head < elements_.size(); ++head) {
            for (std::size_t g = 0; g < gens.size(); ++g) {
                multiply(gen_int[g], integer_transfer(head), prod);
                if (find(prod) != size()) continue;
                add_element(canonical_phase(gens[g] * elements_[head].unitary), prod);
            }
        }

        const std::size_t expected = n_qubits == 1 ? 24 : 11520;
        if (size() != expected) {
            throw InvariantError("Clifford closure produced " + std::to_string(size()) + " elements, expected " +
                                 std::to_string(expected));
        }

        for (const auto& e : elements_) transfers_.push_back(e.transfer.ptm());

        inverse_.resize(size());
        std::vector<std::int8_t> t(block());
        for (std::size_t i = 0; i < size(); ++i) {
            const auto r = integer_transfer(i);
            for (std::size_t a = 0; a < dim2(); ++a) {
                for (std::size_t b = 0; b < dim2(); ++b) t[a * dim2() + b] = r[b * dim2() + a];
            }
            inverse_[i] = lookup_or_throw(t);
        }

        if (n_qubits == 1) {
            table_.resize(size() * size());
            for (std::size_t a = 0; a < size(); ++a) {
                for (std::size_t b = 0; b < size(); ++b) {
                    multiply(integer_transfer(a), integer_transfer(b), prod);
                    table_[a * size() + b] = static_cast<std::uint32_t>(lookup_or_throw(prod));
                }
            }
        }
    }

    std::size_t dim2() const { return static_cast<std::size_t>(dim_ * dim_); }
    std::size_t block() const { return dim2() * dim2(); }

    void check_index(std::size_t i) const {
        if (i >= size()) throw ValidationError("Clifford index " + std::to_string(i) + " out of range");
    }

    static std::string key_of(std::span<const std::int8_t> v) {
        return std::string(reinterpret_cast<const char*>(v.data()), v.size());
    }

    std::size_t lookup_or_throw(std::span<const std::int8_t> v) const {
        const std::size_t i = find(v);
        if (i == size()) throw InvariantError("transfer matrix not found in Clifford group");
        return i;
    }

    void multiply(std::span<const std::int8_t> a, std::span<const std::int8_t> b, std::vector<std::int8_t>& out) const {
        const std::size_t n = dim2();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                int acc = 0;
                for (std::size_t k = 0; k < n; ++k) acc += a[i * n + k] * b[k * n + j];
                out[i * n + j] = static_cast<std::int8_t>(acc);
            }
        }
    }

    std::vector<std::int8_t> to_integer(const Matrix& m) const {
        std::vector<std::int8_t> out(block());
        for (std::size_t i = 0; i < dim2(); ++i) {
            for (std::size_t j = 0; j < dim2(); ++j) {
                const double v = m(i, j);
                const double r = std::round(v);
                if (std::abs(v - r) > 1e-9 || std::abs(r) > 1) {
                    throw InvariantError("Clifford transfer matrix is not a signed permutation");
                }
                out[i * dim2() + j] = static_cast<std::int8_t>(r);
            }
        }
        return out;
    }

    void add_element(CMatrix u, std::span<const std::int8_t> int_ptm) {
        const std::size_t index = elements_.size();
        Matrix ptm(dim2(), dim2());
        for (std::size_t i = 0; i < dim2(); ++i) {
            for (std::size_t j = 0; j < dim2(); ++j) ptm(i, j) = int_ptm[i * dim2() + j];
        }
        elements_.push_back({index, std::move(u), Superoperator(dim_, std::move(ptm))});
        int_ptms_.insert(int_ptms_.end(), int_ptm.begin(), int_ptm.end());
        lookup_.emplace(key_of(int_ptm), index);
    }

    static CMatrix canonical_phase(const CMatrix& u) {
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            for (Eigen::Index j = 0; j < u.cols(); ++j) {
                if (std::abs(u(i, j)) > 1e-9) return u * std::polar(1.0, -std::arg(u(i, j)));
            }
        }
        return u;
    }

    std::vector<CMatrix> generators() const {
        const cdouble i1{0.0, 1.0};
        CMatrix h(2, 2), s(2, 2);
        h << 1.0, 1.0, 1.0, -1.0;
        h /= std::sqrt(2.0);
        s << 1.0, 0.0, 0.0, i1;
        if (n_qubits_ == 1) return {h, s};
        const CMatrix id = CMatrix::Identity(2, 2);
        CMatrix cnot = CMatrix::Zero(4, 4);
        cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
        return {detail::kron(h, id), detail::kron(id, h), detail::kron(s, id), detail::kron(id, s), cnot};
    }

    int n_qubits_;
    int dim_;
    std::vector<CliffordElement> elements_;
    std::vector<Matrix> transfers_;
    std::vector<std::int8_t> int_ptms_;
    std::unordered_map<std::string, std::size_t> lookup_;
    std::vector<std::size_t> inverse_;
    std::vector<std::uint32_t> table_;
};

/// Shared, lazily built group instance; construction is thread-safe.
inline std::shared_ptr<const CliffordGroup> clifford_group(int n_qubits) {
    if (n_qubits == 1) {
        static const auto g1 = std::make_shared<const CliffordGroup>(CliffordGroup::build(1));
        return g1;
    }
    if (n_qubits == 2) {
        static const auto g2 = std::make_shared<const CliffordGroup>(CliffordGroup::build(2));
        return g2;
    }
    throw UnsupportedError("Clifford groups are supported for 1 or 2 qubits only (got " + std::to_string(n_qubits) +
                           ")");
}

inline Superoperator clifford_twirl(const Superoperator& s, const CliffordGroup& group) {
    if (s.dim() != group.dim()) throw ValidationError("twirl: superoperator and group dimensions differ");
    return twirl(s, group.transfers());
}

}  // namespace rbench

#endif  // RBENCH_CLIFFORD_HPP
