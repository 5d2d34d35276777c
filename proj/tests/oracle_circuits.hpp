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

// Test-only oracle circuits. Each one is an independent, gate-level model of
// a protocol fragment; the exact distributions come from enumerate_outcomes
// and are compared with the simulator and with Monte Carlo sampling.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "blockbb84/circuit.hpp"
#include "blockbb84/infotheory.hpp"

namespace blockbb84::oracle {

inline Circuit singlet_both(Basis b0, Basis b1) {
    Circuit c;
    c.prepare_singlet().measure("q0", 0, static_cast<int>(b0)).measure("q1", 1, static_cast<int>(b1));
    return c;
}

inline Circuit bb84_measured(Bit bit, Basis prep, Basis meas) {
    Circuit c;
    c.prepare_bb84(bit, static_cast<int>(prep)).measure("m", 0, static_cast<int>(meas));
    return c;
}

inline Circuit repeated_measurement(Bit bit, Basis prep, Basis meas) {
    Circuit c;
    c.prepare_bb84(bit, static_cast<int>(prep))
        .measure("first", 0, static_cast<int>(meas))
        .measure("second", 0, static_cast<int>(meas));
    return c;
}

/// Alice sends a random bit in Z, Bob measures in X (a basis mismatch).
inline Circuit mismatched_bases() {
    Circuit c;
    c.coin("a").prepare_bb84(std::string("a"), 0).measure("b", 0, 1);
    return c;
}

/// One sifted BB84 position: random Alice bit and basis; Eve intercepts
/// with probability p in a random basis and resends her eigenstate; the
/// channel flips in Alice's preparation basis with probability c; Bob
/// measures in Alice's basis. Variables: a, alpha, hit, e_basis, eve, flip, b.
inline Circuit intercept_resend_position(double p, double c = 0.0) {
    Circuit k;
    k.coin("a").coin("alpha").coin("hit", p).coin("e_basis");
    k.prepare_bb84(std::string("a"), std::string("alpha"));
    k.measure("eve", 0, std::string("e_basis"), {{"hit", 1}});
    k.coin("flip", c);
    k.apply(Unitary::pauli_x(), {0}, {{"flip", 1}, {"alpha", 0}});
    k.apply(Unitary::pauli_z(), {0}, {{"flip", 1}, {"alpha", 1}});
    k.measure("b", 0, std::string("alpha"));
    return k;
}

/// (A, B, E) with E the bit Eve holds in the announced basis or kErasure.
inline JointDistribution sifted_abe(const JointDistribution& pos) {
    const auto ia = pos.index_of("a"), ialpha = pos.index_of("alpha"), ihit = pos.index_of("hit"),
               ie = pos.index_of("e_basis"), ieve = pos.index_of("eve"), ib = pos.index_of("b");
    return pos.transform({"A", "B", "E"}, [=](const Outcome& o) {
        const bool knows = o[ihit] == 1 && o[ie] == o[ialpha];
        return Outcome{o[ia], o[ib], knows ? o[ieve] : 2};
    });
}

/// Exact Csiszar-Korner rate of a sifted position under intercept-resend.
inline double exact_ck_rate(double p, double c = 0.0) {
    const JointDistribution abe = sifted_abe(enumerate_outcomes(intercept_resend_position(p, c)));
    return ck_rate(mutual_information(abe, "A", "B"), mutual_information(abe, "E", "A"),
                   mutual_information(abe, "E", "B"))
        .ck_rate;
}

/// Exact error probability of a sifted position.
inline double exact_qber(double p, double c = 0.0) {
    const JointDistribution abe = sifted_abe(enumerate_outcomes(intercept_resend_position(p, c)));
    double q = 0.0;
    for (const auto& [o, pr] : abe.table())
        if (o[0] != o[1]) q += pr;
    return q;
}

/// Two-qubit block, one block basis for Alice (and Bob, sifted) and one for
/// Eve, who intercepts both qubits. Variables: a0, a1, alpha, e_basis,
/// eve0, eve1, b0, b1.
inline Circuit block_intercept_resend_n2() {
    Circuit k;
    k.coin("a0").coin("a1").coin("alpha").coin("e_basis");
    k.prepare_bb84(std::string("a0"), std::string("alpha")).prepare_bb84(std::string("a1"), std::string("alpha"));
    k.measure("eve0", 0, std::string("e_basis")).measure("eve1", 1, std::string("e_basis"));
    k.measure("b0", 0, std::string("alpha")).measure("b1", 1, std::string("alpha"));
    return k;
}

/// Error pattern (a0 != b0, a1 != b1) of block_intercept_resend_n2.
inline JointDistribution block_error_pattern(const JointDistribution& d) {
    const auto a0 = d.index_of("a0"), a1 = d.index_of("a1"), b0 = d.index_of("b0"), b1 = d.index_of("b1");
    return d.transform({"err0", "err1"}, [=](const Outcome& o) {
        return Outcome{o[a0] != o[b0] ? 1 : 0, o[a1] != o[b1] ? 1 : 0};
    });
}

/// Singlet simulation with U = identity, n = 2: qubit 0 is Alice's, qubit 1
/// the simulated slot, qubit 2 Eve's kept half. Bob measures both block
/// slots in the announced basis; Eve measures her half in it either after
/// Bob (`eve_first` false) or before him.
inline Circuit singlet_simulation_n2(Bit alice_bit, Basis announced, bool eve_first = false) {
    Circuit k;
    const int b = static_cast<int>(announced);
    k.prepare_bb84(alice_bit, b).prepare_singlet();
    if (eve_first) k.measure("eve", 2, b);
    k.measure("bob0", 0, b).measure("bob1", 1, b);
    if (!eve_first) k.measure("eve", 2, b);
    return k;
}

}  // namespace blockbb84::oracle
