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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blockbb84/attacks.hpp"
#include "blockbb84/quantum.hpp"

namespace bb = blockbb84;
using bb::Basis;
using bb::Complex;

namespace {

const double kHalf = 1.0 / std::sqrt(2.0);

bb::StateVector random_state(std::size_t nq, std::mt19937_64& g) {
    std::normal_distribution<double> d;
    Eigen::VectorXcd v(Eigen::Index{1} << nq);
    for (auto& a : v) a = Complex(d(g), d(g));
    v.normalize();
    return bb::StateVector(v);
}

bb::RandomSource coin(bb::CountingRng& rng) { return {&rng, bb::Party::bob, bb::Stage::bob_measurement}; }

}  // namespace

TEST(Prepare, Bb84Encodings) {
    auto z1 = bb::prepare_bb84(1, Basis::Z);
    EXPECT_EQ(z1.amplitude(0), Complex(0.0));
    EXPECT_EQ(z1.amplitude(1), Complex(1.0));
    auto x1 = bb::prepare_bb84(1, Basis::X);
    EXPECT_NEAR(x1.amplitude(0).real(), kHalf, 1e-15);
    EXPECT_NEAR(x1.amplitude(1).real(), -kHalf, 1e-15);
    auto x0 = bb::prepare_bb84(0, Basis::X);
    EXPECT_NEAR(x0.amplitude(1).real(), kHalf, 1e-15);
}

TEST(Prepare, SingletAmplitudes) {
    auto s = bb::prepare_singlet();
    EXPECT_EQ(s.num_qubits(), 2u);
    EXPECT_NEAR(std::abs(s.amplitude(0)), 0.0, 1e-15);
    EXPECT_NEAR(s.amplitude(1).real(), kHalf, 1e-15);
    EXPECT_NEAR(s.amplitude(2).real(), -kHalf, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(3)), 0.0, 1e-15);
}

TEST(StateVector, QubitZeroIsMostSignificant) {
    auto s = bb::prepare_bb84(1, Basis::Z).tensor(bb::prepare_bb84(0, Basis::Z));
    EXPECT_EQ(s.amplitude(2), Complex(1.0));  // |10>
}

TEST(StateVector, RejectsBadInput) {
    EXPECT_THROW(bb::StateVector(Eigen::VectorXcd::Ones(3).normalized()), std::invalid_argument);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2);
    v(0) = 2.0;
    EXPECT_THROW(bb::StateVector{v}, std::invalid_argument);
    EXPECT_THROW(bb::StateVector::zeros(13), std::invalid_argument);
    EXPECT_THROW(bb::StateVector::zeros(7).tensor(bb::StateVector::zeros(6)), std::invalid_argument);
    EXPECT_NO_THROW(bb::StateVector::zeros(12));
}

TEST(ApplyUnitary, HadamardMapsZeroToPlus) {
    auto s = bb::apply_unitary(bb::prepare_bb84(0, Basis::Z), bb::Unitary::hadamard(), {0});
    EXPECT_NEAR(std::abs(s.amplitude(0) - Complex(kHalf)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitude(1) - Complex(kHalf)), 0.0, 1e-15);
}

TEST(ApplyUnitary, IdentityLeavesStateUnchanged) {
    std::mt19937_64 g(1);
    auto s = random_state(3, g);
    auto t = bb::apply_unitary(s, bb::Unitary::identity(2), {2, 0});
    EXPECT_LT((s.amplitudes() - t.amplitudes()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ApplyUnitary, SwapOnSingletFlipsGlobalSignOnly) {
    const auto s = bb::prepare_singlet();
    const auto t = bb::apply_unitary(s, bb::Unitary::swap(), {0, 1});
    EXPECT_LT((t.amplitudes() + s.amplitudes()).cwiseAbs().maxCoeff(), 1e-15);
    for (std::size_t q : {0u, 1u})
        EXPECT_LT(bb::max_abs_difference(bb::reduced_density(s, {q}), bb::reduced_density(t, {q})), 1e-15);
}

TEST(ApplyUnitary, CnotControlIsFirstTarget) {
    auto s = bb::prepare_bb84(1, Basis::Z).tensor(bb::StateVector::zeros(2));
    auto t = bb::apply_unitary(s, bb::Unitary::cnot(), {0, 2});
    EXPECT_EQ(t.amplitude(0b101), Complex(1.0));
    auto u = bb::apply_unitary(s, bb::Unitary::cnot(), {2, 0});
    EXPECT_EQ(u.amplitude(0b100), Complex(1.0));
}

TEST(ApplyUnitary, Errors) {
    auto s = bb::StateVector::zeros(2);
    EXPECT_THROW(bb::apply_unitary(s, bb::Unitary::cnot(), {0}), std::invalid_argument);
    EXPECT_THROW(bb::apply_unitary(s, bb::Unitary::hadamard(), {2}), std::out_of_range);
    EXPECT_THROW(bb::apply_unitary(s, bb::Unitary::cnot(), {1, 1}), std::invalid_argument);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
    m(0, 1) = 0.5;
    EXPECT_THROW(bb::apply_unitary(s, bb::Unitary(m), {0}), std::invalid_argument);
    EXPECT_THROW(bb::Unitary(Eigen::MatrixXcd::Identity(3, 3)), std::invalid_argument);
}

TEST(ApplyUnitary, PreservesNormOnRandomInputs) {
    std::mt19937_64 g(77);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t nq = 1 + seed % 5;
        auto s = random_state(nq, g);
        const std::size_t k = 1 + seed % std::min<std::size_t>(nq, 3);
        std::vector<std::size_t> targets(k);
        for (std::size_t i = 0; i < k; ++i) targets[i] = (i * 2 + seed) % nq;
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        auto u = bb::random_unitary(targets.size(), seed);
        auto t = bb::apply_unitary(s, u, targets);
        EXPECT_NEAR(t.norm(), 1.0, 1e-12);
    }
}

TEST(Measure, EigenstateIsDeterministicAndDrawsNothing) {
    bb::CountingRng rng(1);
    for (bb::Bit b : {0, 1})
        for (Basis basis : {Basis::Z, Basis::X}) {
            auto r = bb::measure(bb::prepare_bb84(b, basis), 0, basis, coin(rng));
            EXPECT_EQ(r.outcome, b);
        }
    EXPECT_EQ(rng.ledger().total(), 0u);
}

TEST(Measure, PostStateIsEigenstateAndNormalized) {
    std::mt19937_64 g(5);
    bb::CountingRng rng(2);
    for (int t = 0; t < 50; ++t) {
        auto s = random_state(3, g);
        const Basis basis = t % 2 ? Basis::X : Basis::Z;
        const std::size_t q = t % 3;
        auto r = bb::measure(s, q, basis, coin(rng));
        EXPECT_NEAR(r.post.norm(), 1.0, 1e-12);
        auto again = bb::project(r.post, q, basis, r.outcome);
        EXPECT_NEAR(again.probability, 1.0, 1e-12);
    }
}

TEST(Measure, BasisDuality) {
    // Outcome probabilities of X on psi equal those of Z on H psi.
    std::mt19937_64 g(8);
    for (int t = 0; t < 20; ++t) {
        auto s = random_state(2, g);
        auto hs = bb::apply_unitary(s, bb::Unitary::hadamard(), {1});
        for (bb::Bit v : {0, 1})
            EXPECT_NEAR(bb::project(s, 1, Basis::X, v).probability, bb::project(hs, 1, Basis::Z, v).probability,
                        1e-12);
    }
}

TEST(Measure, ProjectionProbabilitiesSumToOne) {
    std::mt19937_64 g(9);
    for (int t = 0; t < 20; ++t) {
        auto s = random_state(4, g);
        for (std::size_t q = 0; q < 4; ++q)
            for (Basis b : {Basis::Z, Basis::X})
                EXPECT_NEAR(bb::project(s, q, b, 0).probability + bb::project(s, q, b, 1).probability, 1.0, 1e-12);
    }
}

TEST(ReducedDensity, SingletHalvesAreMaximallyMixed) {
    const auto s = bb::prepare_singlet();
    for (std::size_t q : {0u, 1u}) {
        auto rho = bb::reduced_density(s, {q});
        EXPECT_TRUE(rho.is_valid());
        EXPECT_LT(bb::max_abs_difference(rho, bb::DensityMatrix::maximally_mixed(1)), 1e-15);
    }
}

TEST(ReducedDensity, ProductStateFactorsAndKeepOrderIsRespected) {
    const auto a = bb::prepare_bb84(1, Basis::X), b = bb::prepare_bb84(0, Basis::Z);
    const auto s = a.tensor(b).tensor(bb::prepare_singlet());
    const auto ra = bb::DensityMatrix::pure(a), rb = bb::DensityMatrix::pure(b);
    EXPECT_LT(bb::max_abs_difference(bb::reduced_density(s, {0, 1}), ra.tensor(rb)), 1e-15);
    EXPECT_LT(bb::max_abs_difference(bb::reduced_density(s, {1, 0}), rb.tensor(ra)), 1e-15);
    EXPECT_LT(bb::max_abs_difference(bb::reduced_density(s, {0, 1, 2, 3}),
                                     bb::DensityMatrix::pure(s)),
              1e-15);
}

TEST(ReducedDensity, RandomStatesGiveValidDensityMatrices) {
    std::mt19937_64 g(10);
    for (int t = 0; t < 20; ++t) {
        auto s = random_state(4, g);
        EXPECT_TRUE(bb::reduced_density(s, {static_cast<std::size_t>(t % 4)}).is_valid());
        EXPECT_TRUE(bb::reduced_density(s, {3, 1}).is_valid());
    }
}

TEST(ReducedDensity, Errors) {
    const auto s = bb::prepare_singlet();
    EXPECT_THROW(bb::reduced_density(s, std::span<const std::size_t>{}), std::invalid_argument);
    EXPECT_THROW(bb::reduced_density(s, {2}), std::out_of_range);
    EXPECT_THROW(bb::reduced_density(s, {0, 0}), std::invalid_argument);
}

TEST(QubitBlock, ProductAndJointFormsAgree) {
    bb::CountingRng rng(3);
    bb::QubitBlock blk({bb::prepare_bb84(0, Basis::Z), bb::prepare_bb84(1, Basis::X)});
    EXPECT_EQ(blk.size(), 2u);
    blk.apply(0, bb::Unitary::pauli_x());
    EXPECT_EQ(blk.measure(0, Basis::Z, coin(rng)), 1);
    blk.entangle(bb::Unitary::identity(3), 1);
    EXPECT_TRUE(blk.is_joint());
    EXPECT_EQ(blk.extra_qubits(), 1u);
    EXPECT_EQ(blk.measure(1, Basis::X, coin(rng)), 1);
    EXPECT_EQ(blk.measure_extra(0, Basis::Z, coin(rng)), 0);
    EXPECT_EQ(rng.ledger().total(), 0u);
    EXPECT_THROW(blk.measure(2, Basis::Z, coin(rng)), std::out_of_range);
    EXPECT_THROW(blk.measure_extra(1, Basis::Z, coin(rng)), std::out_of_range);
    EXPECT_THROW(blk.qubit(0), std::logic_error);
}
