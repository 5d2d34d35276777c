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

// Eavesdropping models and the block-to-single-qubit reduction verifier.
//
// The reduction: an eavesdropper holding a machine U that attacks blocks of n
// same-basis qubits (plus m ancillas) can run it against a single qubit by
// filling the other n-1 block slots with halves of singlets. Once the basis
// is announced she measures the kept singlet halves in that basis; by
// anti-correlation each simulated slot then carries the complement of her
// outcome, encoded in the announced basis. verify_reduction() checks this
// exactly on density matrices.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blockbb84/quantum.hpp"
#include "blockbb84/randomness.hpp"

namespace blockbb84 {

enum class AttackKind : std::uint8_t { none, intercept_resend, unitary_block };
enum class Granularity : std::uint8_t { per_qubit, per_block };

inline std::string_view to_string(AttackKind k) {
    switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::intercept_resend: return "intercept_resend";
    case AttackKind::unitary_block: return "unitary_block";
    }
    return "?";
}
inline std::string_view to_string(Granularity g) { return g == Granularity::per_qubit ? "per_qubit" : "per_block"; }

inline AttackKind attack_kind_from_string(std::string_view s) {
    for (auto k : {AttackKind::none, AttackKind::intercept_resend, AttackKind::unitary_block})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown attack '" + std::string(s) + "'");
}
inline Granularity granularity_from_string(std::string_view s) {
    if (s == "per_qubit") return Granularity::per_qubit;
    if (s == "per_block") return Granularity::per_block;
    throw std::invalid_argument("unknown granularity '" + std::string(s) + "'");
}

/// Basis in which Eve measures ancilla `index`, given the announced basis.
using AncillaPolicy = std::function<Basis(std::size_t index, Basis announced)>;

inline Basis measure_in_announced_basis(std::size_t, Basis announced) { return announced; }

struct BlockAttackSpec {
    AttackKind kind = AttackKind::none;
    double fraction = 0.0;
    Granularity granularity = Granularity::per_qubit;
    std::optional<Unitary> unitary;
    std::size_t block_qubits = 0;
    std::size_t ancillas = 0;
    AncillaPolicy ancilla_policy = measure_in_announced_basis;
    /// Eve holds her ancillas until the basis announcement.
    bool delayed = false;

    static BlockAttackSpec none() { return {}; }

    static BlockAttackSpec intercept_resend(double fraction, Granularity g) {
        BlockAttackSpec s;
        s.kind = AttackKind::intercept_resend;
        s.fraction = fraction;
        s.granularity = g;
        s.validate();
        return s;
    }

    static BlockAttackSpec unitary_block(Unitary u, std::size_t n, std::size_t m, bool delayed = true,
                                         AncillaPolicy policy = measure_in_announced_basis) {
        BlockAttackSpec s;
        s.kind = AttackKind::unitary_block;
        s.unitary = std::move(u);
        s.block_qubits = n;
        s.ancillas = m;
        s.delayed = delayed;
        s.ancilla_policy = std::move(policy);
        s.validate();
        return s;
    }

    void validate() const {
        switch (kind) {
        case AttackKind::none:
            break;
        case AttackKind::intercept_resend:
            if (!(fraction >= 0.0 && fraction <= 1.0))
                throw std::invalid_argument("intercept fraction must lie in [0,1]");
            if (delayed) throw std::invalid_argument("intercept-resend cannot delay its measurement");
            break;
        case AttackKind::unitary_block:
            if (!unitary) throw std::invalid_argument("unitary_block attack needs a unitary");
            if (block_qubits == 0) throw std::invalid_argument("unitary_block attack needs n >= 1");
            if (block_qubits + ancillas > 10)
                throw std::invalid_argument("unitary_block attack limited to n + m <= 10");
            if (unitary->dimension() != (std::size_t{1} << (block_qubits + ancillas)))
                throw std::invalid_argument("unitary dimension must equal 2^(n+m)");
            if (!unitary->is_unitary()) throw std::invalid_argument("attack matrix is not unitary within 1e-10");
            break;
        }
    }
};

/// Eve's symbol for a position she learned nothing about (or measured in the wrong basis).
inline constexpr int kErasure = 2;

/// Per-block eavesdropper record. Position i carries Eve's measurement basis
/// and outcome (-1 when she holds nothing for it).
struct EveRecord {
    std::vector<int> basis;
    std::vector<int> outcome;
    std::vector<Bit> ancilla_bits;
    bool pending = false;

    static EveRecord empty(std::size_t n) { return {std::vector<int>(n, -1), std::vector<int>(n, -1), {}, false}; }

    /// Eve's knowledge of position i once `announced` is public: her outcome
    /// if she measured in that basis, else kErasure.
    int symbol(std::size_t i, Basis announced) const {
        if (pending) throw std::logic_error("Eve record read before delayed measurement");
        if (outcome[i] < 0 || basis[i] != static_cast<int>(announced)) return kErasure;
        return outcome[i];
    }
};

struct AttackedBlock {
    QubitBlock forwarded;
    EveRecord record;
};

/// Each qubit is attacked with probability spec.fraction: measured in a
/// random basis (fresh per qubit, or one per block) and resent in the
/// observed eigenstate. All of Eve's draws are charged to (eve, attack).
inline AttackedBlock intercept_resend(QubitBlock qubits, const BlockAttackSpec& spec, CountingRng& rng) {
    if (spec.kind != AttackKind::intercept_resend) throw std::invalid_argument("spec is not intercept_resend");
    const std::size_t n = qubits.size();
    EveRecord rec = EveRecord::empty(n);
    if (spec.fraction <= 0.0) return {std::move(qubits), std::move(rec)};
    const RandomSource eve{&rng, Party::eve, Stage::attack};
    std::optional<Basis> block_basis;
    if (spec.granularity == Granularity::per_block) block_basis = basis_from_bit(eve.bit());
    for (std::size_t i = 0; i < n; ++i) {
        if (!eve.bernoulli(spec.fraction)) continue;
        const Basis b = block_basis ? *block_basis : basis_from_bit(eve.bit());
        rec.basis[i] = static_cast<int>(b);
        rec.outcome[i] = qubits.measure(i, b, eve);
    }
    return {std::move(qubits), std::move(rec)};
}

/// U on block + fresh ancillas. Non-delayed attacks measure the ancillas
/// at once in a guessed basis; delayed ones leave the record pending.
inline AttackedBlock unitary_block_attack(QubitBlock qubits, const BlockAttackSpec& spec, CountingRng& rng) {
    if (spec.kind != AttackKind::unitary_block) throw std::invalid_argument("spec is not unitary_block");
    if (qubits.size() != spec.block_qubits)
        throw std::invalid_argument("unitary_block attack sized for " + std::to_string(spec.block_qubits) +
                                    " qubits, block has " + std::to_string(qubits.size()));
    EveRecord rec = EveRecord::empty(qubits.size());
    qubits.entangle(*spec.unitary, spec.ancillas);
    if (spec.delayed) {
        rec.pending = spec.ancillas > 0;
        return {std::move(qubits), std::move(rec)};
    }
    const RandomSource eve{&rng, Party::eve, Stage::attack};
    const Basis guess = basis_from_bit(eve.bit());
    for (std::size_t j = 0; j < spec.ancillas; ++j) {
        const Basis b = spec.ancilla_policy(j, guess);
        const Bit v = qubits.measure_extra(j, b, eve);
        rec.ancilla_bits.push_back(v);
        if (j < rec.outcome.size()) {
            rec.basis[j] = static_cast<int>(b);
            rec.outcome[j] = v;
        }
    }
    return {std::move(qubits), std::move(rec)};
}

/// Post-announcement ancilla measurement for a delayed unitary_block attack.
/// `announced` holds the public basis of each block position.
inline void resolve_delayed(QubitBlock& qubits, EveRecord& rec, const BlockAttackSpec& spec,
                            const std::vector<Basis>& announced, CountingRng& rng) {
    if (!rec.pending) throw std::logic_error("no delayed measurement outstanding");
    const RandomSource eve{&rng, Party::eve, Stage::attack};
    for (std::size_t j = 0; j < qubits.extra_qubits(); ++j) {
        const Basis ann = announced[std::min(j, announced.size() - 1)];
        const Basis b = spec.ancilla_policy(j, ann);
        const Bit v = qubits.measure_extra(j, b, eve);
        rec.ancilla_bits.push_back(v);
        if (j < rec.outcome.size()) {
            rec.basis[j] = static_cast<int>(b);
            rec.outcome[j] = v;
        }
    }
    rec.pending = false;
}

namespace detail {

/// New qubit i is old qubit order[i].
inline StateVector permute_qubits(const StateVector& s, const std::vector<std::size_t>& order) {
    const std::size_t n = s.num_qubits();
    if (order.size() != n) throw std::invalid_argument("permutation size mismatch");
    Eigen::VectorXcd out(s.amplitudes().size());
    for (std::size_t idx = 0; idx < s.dimension(); ++idx) {
        std::size_t src = 0;
        for (std::size_t q = 0; q < n; ++q)
            if (idx & (std::size_t{1} << bit_of(n, q))) src |= std::size_t{1} << bit_of(n, order[q]);
        out(static_cast<Eigen::Index>(idx)) = s.amplitude(src);
    }
    return StateVector(std::move(out), 1e-10);
}

}  // namespace detail

/// Register layout: [block slots 0..n-1][m ancillas][n-1 kept singlet halves].
/// Alice's qubit sits in `alice_slot`; kept half k is the partner of the
/// k-th non-Alice slot in increasing slot order.
struct SimulatedBlock {
    StateVector state;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t alice_slot = 0;
    bool measured = false;

    std::vector<std::size_t> block_and_ancilla_qubits() const {
        std::vector<std::size_t> q(n + m);
        for (std::size_t i = 0; i < n + m; ++i) q[i] = i;
        return q;
    }
    std::vector<std::size_t> kept_qubits() const {
        std::vector<std::size_t> q(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) q[i] = n + m + i;
        return q;
    }
    std::vector<std::size_t> simulated_slots() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (i != alice_slot) s.push_back(i);
        return s;
    }
};

/// Embeds Alice's single qubit into an n-slot block padded with singlet
/// halves, then runs the block attack U on the n slots plus m fresh ancillas.
inline SimulatedBlock singlet_simulation(const StateVector& alice_qubit, std::size_t n, const Unitary& u,
                                         std::size_t m, std::size_t alice_slot = 0) {
    if (alice_qubit.num_qubits() != 1) throw std::invalid_argument("Alice's input must be one qubit");
    if (n < 1 || alice_slot >= n) throw std::invalid_argument("alice_slot outside the block");
    if (u.dimension() != (std::size_t{1} << (n + m)))
        throw std::invalid_argument("block attack dimension must equal 2^(n+m)");
    const std::size_t total = n + m + (n - 1);
    if (total > kMaxQubits) throw std::invalid_argument("simulated block exceeds 12 qubits");

    // Natural order: alice, (slot half, kept half) x (n-1), ancillas.
    StateVector reg = alice_qubit;
    for (std::size_t k = 0; k + 1 < n; ++k) reg = reg.tensor(prepare_singlet());
    if (m > 0) reg = reg.tensor(StateVector::zeros(m));

    std::vector<std::size_t> order(total);
    std::size_t k = 0;
    for (std::size_t slot = 0; slot < n; ++slot) {
        if (slot == alice_slot) {
            order[slot] = 0;
        } else {
            order[slot] = 1 + 2 * k;
            order[n + m + k] = 2 + 2 * k;
            ++k;
        }
    }
    for (std::size_t a = 0; a < m; ++a) order[n + a] = 1 + 2 * (n - 1) + a;
    reg = detail::permute_qubits(reg, order);

    SimulatedBlock out{std::move(reg), n, m, alice_slot, false};
    const auto targets = out.block_and_ancilla_qubits();
    out.state = apply_unitary(out.state, u, targets);
    return out;
}

struct DelayedOutcome {
    /// For each non-Alice slot (increasing order): the bit it carries in the
    /// announced basis, i.e. the complement of Eve's kept-half outcome.
    Bits simulated_bits;
    Bits ancilla_bits;
};

/// Measures every kept singlet half in `announced`, then the ancillas per `policy`.
inline DelayedOutcome delayed_measurement(SimulatedBlock& block, Basis announced, const RandomSource& coin,
                                          const AncillaPolicy& policy = measure_in_announced_basis) {
    if (block.measured) throw std::logic_error("kept register already measured");
    DelayedOutcome out;
    for (std::size_t q : block.kept_qubits()) {
        auto r = measure(block.state, q, announced, coin);
        block.state = std::move(r.post);
        out.simulated_bits.push_back(static_cast<Bit>(1 - r.outcome));
    }
    for (std::size_t a = 0; a < block.m; ++a) {
        auto r = measure(block.state, block.n + a, policy(a, announced), coin);
        block.state = std::move(r.post);
        out.ancilla_bits.push_back(r.outcome);
    }
    block.measured = true;
    return out;
}

struct AliceInput {
    Bit bit;
    Basis basis;
    double weight;
};

/// Alice's bit and basis uniform.
inline std::vector<AliceInput> uniform_alice_inputs() {
    return {{0, Basis::Z, 0.25}, {1, Basis::Z, 0.25}, {0, Basis::X, 0.25}, {1, Basis::X, 0.25}};
}

struct BranchComparison {
    Basis basis;
    Bit alice_bit;
    Bits pattern;          // full simulated block bit pattern
    double weight;         // probability of this kept-half outcome
    double state_deviation;
    double weight_deviation;
};

struct EquivalenceReport {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<BranchComparison> branches;
    /// Deviation of the input-weighted averaged ensembles.
    double ensemble_deviation = 0.0;
    double max_deviation = 0.0;
    double tolerance = 1e-9;
    bool passed = false;
};

/// Density matrix of U applied to a genuine block with every slot prepared
/// in `basis` with the given bits, plus m ancillas in |0>.
inline DensityMatrix genuine_block_state(const Unitary& u, const Bits& pattern, Basis basis, std::size_t m) {
    StateVector reg = prepare_bb84(pattern.at(0), basis);
    for (std::size_t i = 1; i < pattern.size(); ++i) reg = reg.tensor(prepare_bb84(pattern[i], basis));
    if (m > 0) reg = reg.tensor(StateVector::zeros(m));
    std::vector<std::size_t> targets(pattern.size() + m);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
    return DensityMatrix::pure(apply_unitary(reg, u, targets));
}

/// For every announced basis and Alice bit, branches on all kept-half
/// outcomes of the singlet-simulated block and compares each conditional
/// (block + ancilla) state with the genuine same-basis block carrying the
/// matching bit pattern. Branch weights must all be 2^-(n-1).
inline EquivalenceReport verify_reduction(const Unitary& u, std::size_t n, std::size_t m,
                                          const std::vector<AliceInput>& inputs = uniform_alice_inputs(),
                                          std::size_t alice_slot = 0, double tolerance = 1e-9) {
    if (n < 2 || n > 3) throw std::invalid_argument("verify_reduction requires n in {2, 3}");
    if (n + m > 8) throw std::invalid_argument("verify_reduction requires n + m <= 8");
    if (u.dimension() != (std::size_t{1} << (n + m)))
        throw std::invalid_argument("unitary dimension must equal 2^(n+m)");
    if (!u.is_unitary()) throw std::invalid_argument("matrix is not unitary within 1e-10");
    double total_weight = 0.0;
    for (const auto& in : inputs) {
        if (in.weight < 0.0) throw std::invalid_argument("negative input weight");
        total_weight += in.weight;
    }
    if (std::abs(total_weight - 1.0) > 1e-9) throw std::invalid_argument("input weights must sum to 1");

    EquivalenceReport rep;
    rep.n = n;
    rep.m = m;
    rep.tolerance = tolerance;
    const std::size_t branches = std::size_t{1} << (n - 1);
    const double expected_weight = 1.0 / static_cast<double>(branches);
    const auto dim = Eigen::Index{1} << (n + m);
    Eigen::MatrixXcd sim_ensemble = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd real_ensemble = Eigen::MatrixXcd::Zero(dim, dim);

    for (const auto& in : inputs) {
        if (in.weight == 0.0) continue;
        const SimulatedBlock sim = singlet_simulation(prepare_bb84(in.bit, in.basis), n, u, m, alice_slot);
        const auto kept = sim.kept_qubits();
        const auto slots = sim.simulated_slots();
        const auto keep = sim.block_and_ancilla_qubits();
        for (std::size_t mask = 0; mask < branches; ++mask) {
            std::optional<StateVector> state = sim.state;
            double weight = 1.0;
            Bits pattern(n);
            pattern[alice_slot] = in.bit;
            for (std::size_t k = 0; k < kept.size() && state; ++k) {
                const Bit eve_outcome = static_cast<Bit>((mask >> (kept.size() - 1 - k)) & 1u);
                auto proj = project(*state, kept[k], in.basis, eve_outcome);
                weight *= proj.probability;
                state = std::move(proj.post);
                pattern[slots[k]] = static_cast<Bit>(1 - eve_outcome);
            }
            BranchComparison cmp{in.basis, in.bit, pattern, weight, 0.0, std::abs(weight - expected_weight)};
            const DensityMatrix genuine = genuine_block_state(u, pattern, in.basis, m);
            real_ensemble += in.weight * expected_weight * genuine.entries();
            if (state) {
                const DensityMatrix conditional = reduced_density(*state, keep);
                cmp.state_deviation = max_abs_difference(conditional, genuine);
                sim_ensemble += in.weight * weight * conditional.entries();
            } else {
                cmp.state_deviation = 1.0;
            }
            rep.max_deviation = std::max({rep.max_deviation, cmp.state_deviation, cmp.weight_deviation});
            rep.branches.push_back(std::move(cmp));
        }
    }
    rep.ensemble_deviation = (sim_ensemble - real_ensemble).cwiseAbs().maxCoeff();
    rep.max_deviation = std::max(rep.max_deviation, rep.ensemble_deviation);
    rep.passed = rep.max_deviation < tolerance;
    return rep;
}

/// Embeds a k-qubit unitary acting on `targets` into a num_qubits space.
inline Unitary embed_unitary(const Unitary& u, const std::vector<std::size_t>& targets, std::size_t num_qubits) {
    detail::check_targets(num_qubits, u, targets);
    const auto d = Eigen::Index{1} << num_qubits;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        Eigen::VectorXcd col = out.col(c);
        detail::apply_in_place(col, num_qubits, u.matrix(), targets);
        out.col(c) = col;
    }
    return Unitary(std::move(out));
}

/// CNOT from block qubit 0 onto ancilla 0, or onto block qubit 1 when m == 0.
inline Unitary cnot_entangler(std::size_t n, std::size_t m) {
    const std::size_t target = m > 0 ? n : 1;
    return embed_unitary(Unitary::cnot(), {0, target}, n + m);
}

/// Haar-style random unitary: QR of a complex Gaussian matrix with the phase
/// of R's diagonal folded into Q. Gaussians come from Box-Muller over
/// 53-bit uniforms of mt19937_64, so the corpus is identical on every platform.
inline Unitary random_unitary(std::size_t num_qubits, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    auto uniform = [&engine] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
    const auto d = Eigen::Index{1} << num_qubits;
    Eigen::MatrixXcd g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const double r = std::sqrt(-2.0 * std::log(uniform()));
            const double t = 2.0 * M_PI * uniform();
            g(i, j) = Complex(r * std::cos(t), r * std::sin(t));
        }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex diag = r(j, j);
        q.col(j) *= diag / std::abs(diag);
    }
    return Unitary(std::move(q));
}

struct ReductionCase {
    std::string name;
    std::size_t n;
    std::size_t m;
    Unitary u;
};

/// For each (n, m): identity, the CNOT entangler, and `random_count` random
/// unitaries seeded with seed + running index.
inline std::vector<ReductionCase> reduction_corpus(const std::vector<std::size_t>& ns,
                                                   const std::vector<std::size_t>& ms,
                                                   std::size_t random_count, std::uint64_t seed) {
    std::vector<ReductionCase> out;
    std::uint64_t counter = 0;
    for (auto n : ns)
        for (auto m : ms) {
            const std::string tag = "n=" + std::to_string(n) + ",m=" + std::to_string(m);
            out.push_back({"identity " + tag, n, m, Unitary::identity(n + m)});
            out.push_back({"cnot " + tag, n, m, cnot_entangler(n, m)});
            for (std::size_t r = 0; r < random_count; ++r) {
                const std::uint64_t s = seed + counter++;
                out.push_back({"random#" + std::to_string(r) + " seed=" + std::to_string(s) + " " + tag, n, m,
                               random_unitary(n + m, s)});
            }
        }
    return out;
}

// Matrix file: "dim d", then d rows of d whitespace-separated "re,im" entries.

inline Eigen::MatrixXcd parse_matrix(std::istream& in) {
    std::string word;
    long long d = 0;
    if (!(in >> word) || word != "dim" || !(in >> d) || d < 1 || d > 4096)
        throw std::invalid_argument("matrix file must start with 'dim d'");
    Eigen::MatrixXcd m(d, d);
    for (long long i = 0; i < d; ++i)
        for (long long j = 0; j < d; ++j) {
            std::string tok;
            if (!(in >> tok))
                throw std::invalid_argument("matrix file truncated at row " + std::to_string(i));
            const auto comma = tok.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("matrix entry '" + tok + "' is not 're,im'");
            try {
                std::size_t used_re = 0, used_im = 0;
                const std::string re = tok.substr(0, comma), im = tok.substr(comma + 1);
                const double vr = std::stod(re, &used_re), vi = std::stod(im, &used_im);
                if (used_re != re.size() || used_im != im.size()) throw std::invalid_argument(tok);
                m(i, j) = Complex(vr, vi);
            } catch (const std::logic_error&) {
                throw std::invalid_argument("matrix entry '" + tok + "' is not 're,im'");
            }
        }
    std::string extra;
    if (in >> extra) throw std::invalid_argument("trailing data after matrix");
    return m;
}

/// Reads a matrix file. The result is not checked for unitarity.
inline Unitary read_unitary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
    return Unitary(parse_matrix(in));
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
    std::ostringstream s;
    s.precision(17);
    s << "dim " << m.rows() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            s << (j ? " " : "") << m(i, j).real() << ',' << m(i, j).imag();
        s << '\n';
    }
    out << s.str();
}

}  // namespace blockbb84
