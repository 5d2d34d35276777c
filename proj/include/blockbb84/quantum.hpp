// Copyright 2026 The blockbb84 Authors
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

// Dense statevector and density-matrix simulation of small qubit registers.
//
// Qubit 0 is the most significant bit of the amplitude index: for a k-qubit
// register, qubit q corresponds to bit (k - 1 - q) of the index.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "blockbb84/randomness.hpp"

namespace blockbb84 {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
/// Branches below this probability are treated as impossible.
inline constexpr double kDeterministicThreshold = 1e-12;

enum class Basis : std::uint8_t { Z = 0, X = 1 };

inline Basis basis_from_bit(Bit b) { return b ? Basis::X : Basis::Z; }
inline std::string_view to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

class StateVector {
public:
    explicit StateVector(Eigen::VectorXcd amplitudes, double tolerance = kNormTolerance)
        : amps_(std::move(amplitudes)) {
        const auto len = static_cast<std::size_t>(amps_.size());
        if (len < 2 || !std::has_single_bit(len))
            throw std::invalid_argument("statevector length must be a power of two >= 2");
        num_qubits_ = static_cast<std::size_t>(std::countr_zero(len));
        if (num_qubits_ > kMaxQubits)
            throw std::invalid_argument("register of " + std::to_string(num_qubits_) +
                                        " qubits exceeds the 12-qubit cap");
        if (std::abs(amps_.squaredNorm() - 1.0) > tolerance)
            throw std::invalid_argument("statevector is not normalized");
    }

    /// |0...0> on `num_qubits` qubits.
    static StateVector zeros(std::size_t num_qubits) {
        if (num_qubits == 0 || num_qubits > kMaxQubits)
            throw std::invalid_argument("register size out of range");
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
        v(0) = 1.0;
        return StateVector(std::move(v));
    }

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    Complex amplitude(std::size_t index) const { return amps_(static_cast<Eigen::Index>(index)); }
    double norm() const { return amps_.norm(); }

    /// this ⊗ other; this register's qubits come first.
    StateVector tensor(const StateVector& other) const {
        if (num_qubits_ + other.num_qubits_ > kMaxQubits)
            throw std::invalid_argument("tensor product exceeds the 12-qubit cap");
        Eigen::VectorXcd out(amps_.size() * other.amps_.size());
        for (Eigen::Index i = 0; i < amps_.size(); ++i)
            out.segment(i * other.amps_.size(), other.amps_.size()) = amps_(i) * other.amps_;
        return StateVector(std::move(out), 1e-10);
    }

private:
    Eigen::VectorXcd amps_;
    std::size_t num_qubits_ = 0;
};

/// Square complex matrix acting on a power-of-two dimensional space.
class Unitary {
public:
    explicit Unitary(Eigen::MatrixXcd m) : m_(std::move(m)) {
        const auto d = static_cast<std::size_t>(m_.rows());
        if (m_.rows() != m_.cols() || d < 2 || !std::has_single_bit(d))
            throw std::invalid_argument("unitary must be square with power-of-two dimension");
    }

    std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
    std::size_t num_qubits() const { return static_cast<std::size_t>(std::countr_zero(dimension())); }
    const Eigen::MatrixXcd& matrix() const { return m_; }

    /// max |U U^dagger - I|.
    double unitarity_error() const {
        const Eigen::MatrixXcd prod = m_ * m_.adjoint();
        return (prod - Eigen::MatrixXcd::Identity(m_.rows(), m_.cols())).cwiseAbs().maxCoeff();
    }
    bool is_unitary(double tolerance = kUnitaryTolerance) const {
        return unitarity_error() <= tolerance;
    }

    /// this ⊗ other.
    Unitary kron(const Unitary& other) const {
        const auto a = m_.rows(), b = other.m_.rows();
        Eigen::MatrixXcd out(a * b, a * b);
        for (Eigen::Index i = 0; i < a; ++i)
            for (Eigen::Index j = 0; j < a; ++j) out.block(i * b, j * b, b, b) = m_(i, j) * other.m_;
        return Unitary(std::move(out));
    }

    static Unitary identity(std::size_t num_qubits) {
        const auto d = Eigen::Index{1} << num_qubits;
        return Unitary(Eigen::MatrixXcd::Identity(d, d));
    }
    static Unitary hadamard() {
        const double s = 1.0 / std::sqrt(2.0);
        Eigen::MatrixXcd m(2, 2);
        m << s, s, s, -s;
        return Unitary(std::move(m));
    }
    static Unitary pauli_x() {
        Eigen::MatrixXcd m(2, 2);
        m << 0, 1, 1, 0;
        return Unitary(std::move(m));
    }
    static Unitary pauli_z() {
        Eigen::MatrixXcd m(2, 2);
        m << 1, 0, 0, -1;
        return Unitary(std::move(m));
    }
    /// Control is the first target, i.e. the more significant qubit.
    static Unitary cnot() {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
        m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
        return Unitary(std::move(m));
    }
    static Unitary swap() {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
        m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
        return Unitary(std::move(m));
    }
    /// The unitary exchanging the two eigenstates of `basis`: X for Z, Z for X.
    static Unitary basis_flip(Basis basis) { return basis == Basis::Z ? pauli_x() : pauli_z(); }

private:
    Eigen::MatrixXcd m_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Eigen::MatrixXcd entries) : rho_(std::move(entries)) {
        const auto d = static_cast<std::size_t>(rho_.rows());
        if (rho_.rows() != rho_.cols() || d < 2 || !std::has_single_bit(d))
            throw std::invalid_argument("density matrix must be square with power-of-two dimension");
        num_qubits_ = static_cast<std::size_t>(std::countr_zero(d));
    }

    static DensityMatrix pure(const StateVector& psi) {
        return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
    }

    std::size_t num_qubits() const { return num_qubits_; }
    const Eigen::MatrixXcd& entries() const { return rho_; }
    Complex trace() const { return rho_.trace(); }

    /// Hermitian and unit trace within 1e-12, eigenvalues >= -1e-10.
    bool is_valid() const {
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return false;
        if (std::abs(trace() - Complex(1.0)) > 1e-12) return false;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_);
        return es.eigenvalues().minCoeff() >= -1e-10;
    }

    DensityMatrix tensor(const DensityMatrix& other) const {
        const auto a = rho_.rows(), b = other.rho_.rows();
        Eigen::MatrixXcd out(a * b, a * b);
        for (Eigen::Index i = 0; i < a; ++i)
            for (Eigen::Index j = 0; j < a; ++j) out.block(i * b, j * b, b, b) = rho_(i, j) * other.rho_;
        return DensityMatrix(std::move(out));
    }

    static DensityMatrix maximally_mixed(std::size_t num_qubits) {
        const auto d = Eigen::Index{1} << num_qubits;
        return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
    }

private:
    Eigen::MatrixXcd rho_;
    std::size_t num_qubits_ = 0;
};

/// Largest absolute entry of a - b.
inline double max_abs_difference(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("density matrix sizes differ");
    return (a.entries() - b.entries()).cwiseAbs().maxCoeff();
}

namespace detail {

inline std::size_t bit_of(std::size_t num_qubits, std::size_t qubit) { return num_qubits - 1 - qubit; }

inline void check_qubit(std::size_t num_qubits, std::size_t qubit) {
    if (qubit >= num_qubits)
        throw std::out_of_range("qubit index " + std::to_string(qubit) + " out of range for " +
                                std::to_string(num_qubits) + "-qubit register");
}

/// In-place application of `u` on `targets` (targets[0] is the most
/// significant qubit of u's index). No validation.
inline void apply_in_place(Eigen::VectorXcd& amps, std::size_t num_qubits, const Eigen::MatrixXcd& u,
                           std::span<const std::size_t> targets) {
    const std::size_t k = targets.size();
    const std::size_t sub = std::size_t{1} << k;
    std::vector<std::size_t> masks(k);
    std::size_t target_mask = 0;
    for (std::size_t t = 0; t < k; ++t) {
        masks[t] = std::size_t{1} << bit_of(num_qubits, targets[t]);
        target_mask |= masks[t];
    }
    std::vector<std::size_t> offsets(sub);
    for (std::size_t s = 0; s < sub; ++s) {
        std::size_t off = 0;
        for (std::size_t t = 0; t < k; ++t)
            if (s & (std::size_t{1} << (k - 1 - t))) off |= masks[t];
        offsets[s] = off;
    }
    Eigen::VectorXcd gathered(static_cast<Eigen::Index>(sub));
    const std::size_t dim = std::size_t{1} << num_qubits;
    for (std::size_t base = 0; base < dim; ++base) {
        if (base & target_mask) continue;
        for (std::size_t s = 0; s < sub; ++s)
            gathered(static_cast<Eigen::Index>(s)) = amps(static_cast<Eigen::Index>(base | offsets[s]));
        const Eigen::VectorXcd out = u * gathered;
        for (std::size_t s = 0; s < sub; ++s)
            amps(static_cast<Eigen::Index>(base | offsets[s])) = out(static_cast<Eigen::Index>(s));
    }
}

inline void check_targets(std::size_t num_qubits, const Unitary& u, std::span<const std::size_t> targets) {
    if (u.dimension() != (std::size_t{1} << targets.size()))
        throw std::invalid_argument("unitary dimension " + std::to_string(u.dimension()) +
                                    " does not match " + std::to_string(targets.size()) + " targets");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        check_qubit(num_qubits, targets[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (targets[i] == targets[j]) throw std::invalid_argument("duplicate target qubit");
    }
}

/// Probability of `outcome` when measuring `qubit` in `basis`, and the
/// unnormalized projected amplitudes.
inline double project_in_place(Eigen::VectorXcd& amps, std::size_t num_qubits, std::size_t qubit,
                               Basis basis, Bit outcome) {
    const std::size_t targets[1] = {qubit};
    const Eigen::MatrixXcd h = Unitary::hadamard().matrix();
    if (basis == Basis::X) apply_in_place(amps, num_qubits, h, targets);
    const std::size_t mask = std::size_t{1} << bit_of(num_qubits, qubit);
    double prob = 0.0;
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        const bool one = (static_cast<std::size_t>(i) & mask) != 0;
        if (one != (outcome != 0))
            amps(i) = 0.0;
        else
            prob += std::norm(amps(i));
    }
    if (basis == Basis::X) apply_in_place(amps, num_qubits, h, targets);
    return prob;
}

}  // namespace detail

/// BB84 encoding: Z gives |bit>, X gives (|0> + (-1)^bit |1>)/sqrt(2).
inline StateVector prepare_bb84(Bit bit, Basis basis) {
    Eigen::VectorXcd v(2);
    if (basis == Basis::Z) {
        v << (bit ? 0.0 : 1.0), (bit ? 1.0 : 0.0);
    } else {
        const double s = 1.0 / std::sqrt(2.0);
        v << s, (bit ? -s : s);
    }
    return StateVector(std::move(v));
}

/// (|01> - |10>)/sqrt(2).
inline StateVector prepare_singlet() {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd v(4);
    v << 0.0, s, -s, 0.0;
    return StateVector(std::move(v));
}

inline StateVector apply_unitary(const StateVector& state, const Unitary& u,
                                 std::span<const std::size_t> targets) {
    detail::check_targets(state.num_qubits(), u, targets);
    if (!u.is_unitary()) throw std::invalid_argument("matrix is not unitary within 1e-10");
    Eigen::VectorXcd amps = state.amplitudes();
    detail::apply_in_place(amps, state.num_qubits(), u.matrix(), targets);
    return StateVector(std::move(amps), 1e-10);
}

inline StateVector apply_unitary(const StateVector& state, const Unitary& u,
                                 std::initializer_list<std::size_t> targets) {
    return apply_unitary(state, u, std::span<const std::size_t>(targets.begin(), targets.size()));
}

struct Projection {
    double probability = 0.0;
    /// Normalized post-measurement state; empty when the branch is impossible.
    std::optional<StateVector> post;
};

/// Deterministic branch of a projective measurement.
inline Projection project(const StateVector& state, std::size_t qubit, Basis basis, Bit outcome) {
    detail::check_qubit(state.num_qubits(), qubit);
    Eigen::VectorXcd amps = state.amplitudes();
    const double p = detail::project_in_place(amps, state.num_qubits(), qubit, basis, outcome);
    if (p < kDeterministicThreshold) return {p, std::nullopt};
    amps /= std::sqrt(p);
    return {p, StateVector(std::move(amps), 1e-10)};
}

struct MeasurementResult {
    Bit outcome;
    StateVector post;
};

/// Born-rule measurement. Draws from `coin` only when both outcomes are possible.
inline MeasurementResult measure(const StateVector& state, std::size_t qubit, Basis basis,
                                 const RandomSource& coin) {
    auto zero = project(state, qubit, basis, 0);
    if (!zero.post) return {1, *project(state, qubit, basis, 1).post};
    if (zero.probability > 1.0 - kDeterministicThreshold) return {0, std::move(*zero.post)};
    if (coin.uniform01() < zero.probability) return {0, std::move(*zero.post)};
    return {1, *project(state, qubit, basis, 1).post};
}

/// Partial trace onto `keep`, in the order given.
inline DensityMatrix reduced_density(const StateVector& state, std::span<const std::size_t> keep) {
    if (keep.empty()) throw std::invalid_argument("reduced_density: keep set is empty");
    const std::size_t n = state.num_qubits();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        detail::check_qubit(n, keep[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (keep[i] == keep[j]) throw std::invalid_argument("reduced_density: duplicate qubit");
    }
    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < n; ++q)
        if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);

    auto spread = [n](std::span<const std::size_t> qubits, std::size_t value) {
        std::size_t idx = 0;
        for (std::size_t t = 0; t < qubits.size(); ++t)
            if (value & (std::size_t{1} << (qubits.size() - 1 - t)))
                idx |= std::size_t{1} << detail::bit_of(n, qubits[t]);
        return idx;
    };
    const std::size_t dk = std::size_t{1} << keep.size();
    const std::size_t dr = std::size_t{1} << rest.size();
    // psi reshaped as (kept index) x (traced index).
    Eigen::MatrixXcd psi(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dr));
    for (std::size_t a = 0; a < dk; ++a) {
        const std::size_t ia = spread(keep, a);
        for (std::size_t b = 0; b < dr; ++b)
            psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                state.amplitude(ia | spread(rest, b));
    }
    return DensityMatrix(psi * psi.adjoint());
}

inline DensityMatrix reduced_density(const StateVector& state, std::initializer_list<std::size_t> keep) {
    return reduced_density(state, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// The qubits of one protocol block in flight. Product form holds one
/// 1-qubit state per position; joint form holds a single register with the
/// block qubits first, followed by any extra (eavesdropper) qubits.
class QubitBlock {
public:
    explicit QubitBlock(std::vector<StateVector> qubits) : qubits_(std::move(qubits)) {
        for (const auto& q : qubits_)
            if (q.num_qubits() != 1) throw std::invalid_argument("product block holds 1-qubit states");
    }

    std::size_t size() const { return joint_ ? block_size_ : qubits_.size(); }
    bool is_joint() const { return joint_.has_value(); }
    std::size_t extra_qubits() const { return joint_ ? joint_->num_qubits() - block_size_ : 0; }

    const StateVector& qubit(std::size_t i) const {
        if (joint_) throw std::logic_error("qubit(): block is held in joint form");
        return qubits_.at(i);
    }
    const StateVector& joint_state() const {
        if (!joint_) throw std::logic_error("joint_state(): block is in product form");
        return *joint_;
    }

    /// Single-qubit unitary on block position i.
    void apply(std::size_t i, const Unitary& u) {
        if (joint_) {
            const std::size_t t[1] = {check_position(i)};
            joint_ = apply_unitary(*joint_, u, t);
        } else {
            const std::size_t t[1] = {0};
            qubits_.at(i) = apply_unitary(qubits_.at(i), u, t);
        }
    }

    Bit measure(std::size_t i, Basis basis, const RandomSource& coin) {
        if (joint_) return measure_register(check_position(i), basis, coin);
        auto r = blockbb84::measure(qubits_.at(i), 0, basis, coin);
        qubits_.at(i) = std::move(r.post);
        return r.outcome;
    }

    /// Append `extra` qubits in |0> and apply `u` to block + extra qubits.
    void entangle(const Unitary& u, std::size_t extra) {
        if (joint_) throw std::logic_error("entangle(): block already in joint form");
        const std::size_t total = qubits_.size() + extra;
        if (total > kMaxQubits) throw std::invalid_argument("block + ancillas exceed 12 qubits");
        if (u.dimension() != (std::size_t{1} << total))
            throw std::invalid_argument("unitary dimension does not match block + ancillas");
        std::optional<StateVector> reg;
        for (const auto& q : qubits_) reg = reg ? reg->tensor(q) : q;
        if (extra > 0) reg = reg->tensor(StateVector::zeros(extra));
        std::vector<std::size_t> targets(total);
        for (std::size_t q = 0; q < total; ++q) targets[q] = q;
        block_size_ = qubits_.size();
        joint_ = apply_unitary(*reg, u, targets);
        qubits_.clear();
    }

    Bit measure_extra(std::size_t j, Basis basis, const RandomSource& coin) {
        if (!joint_ || j >= extra_qubits()) throw std::out_of_range("extra qubit index out of range");
        return measure_register(block_size_ + j, basis, coin);
    }

private:
    std::size_t check_position(std::size_t i) const {
        if (i >= block_size_) throw std::out_of_range("block position out of range");
        return i;
    }
    Bit measure_register(std::size_t q, Basis basis, const RandomSource& coin) {
        auto r = blockbb84::measure(*joint_, q, basis, coin);
        joint_ = std::move(r.post);
        return r.outcome;
    }

    std::vector<StateVector> qubits_;
    std::optional<StateVector> joint_;
    std::size_t block_size_ = 0;
};

}  // namespace blockbb84
