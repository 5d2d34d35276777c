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

// BB84 sessions with either one basis choice per qubit (the usual protocol)
// or one basis choice per block of n qubits. In block mode sifting keeps or
// discards whole blocks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockbb84/attacks.hpp"
#include "blockbb84/infotheory.hpp"
#include "blockbb84/quantum.hpp"
#include "blockbb84/randomness.hpp"

namespace blockbb84 {

enum class Mode : std::uint8_t { per_qubit, per_block };

inline std::string_view to_string(Mode m) { return m == Mode::per_qubit ? "per_qubit" : "per_block"; }
inline Mode mode_from_string(std::string_view s) {
    if (s == "per_qubit") return Mode::per_qubit;
    if (s == "per_block") return Mode::per_block;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

struct ProtocolConfig {
    std::size_t block_size = 2;
    std::size_t num_blocks = 1;
    Mode mode = Mode::per_block;
    double channel_flip_prob = 0.0;
    double sample_fraction = 0.2;
    std::uint64_t seed = 0;
    /// Test hook: Bob reuses Alice's bases and draws no basis bits.
    bool force_matching_bases = false;

    std::size_t raw_qubits() const { return block_size * num_blocks; }

    /// Everything except the block-mode premise n >= 2.
    void validate_ranges() const {
        if (block_size < 1) throw std::invalid_argument("block_size must be >= 1");
        if (num_blocks < 1) throw std::invalid_argument("num_blocks must be >= 1");
        if (!(channel_flip_prob >= 0.0 && channel_flip_prob <= 1.0))
            throw std::invalid_argument("channel_flip_prob must lie in [0,1]");
        if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
            throw std::invalid_argument("sample_fraction must lie in (0,1)");
    }

    void validate() const {
        validate_ranges();
        if (mode == Mode::per_block && block_size < 2)
            throw std::invalid_argument("per_block mode requires block_size >= 2");
    }
};

struct AlicePreparation {
    std::vector<Basis> bases;  // one entry per position
    Bits bits;
    QubitBlock qubits;
};

struct BobMeasurement {
    std::vector<Basis> bases;
    Bits outcomes;
};

struct BlockRecord {
    Bits alice_bits;
    std::vector<Basis> alice_bases;
    std::vector<Basis> bob_bases;
    Bits bob_outcomes;
    std::vector<bool> sifted;
    EveRecord eve;

    std::size_t sifted_count() const { return static_cast<std::size_t>(std::count(sifted.begin(), sifted.end(), true)); }
};

namespace detail {

inline std::vector<Basis> draw_bases(CountingRng& rng, Party party, Stage stage, Mode mode, std::size_t n) {
    if (mode == Mode::per_block) return std::vector<Basis>(n, basis_from_bit(rng.draw_bit(party, stage)));
    std::vector<Basis> out;
    out.reserve(n);
    for (Bit b : rng.draw_bits(party, stage, n)) out.push_back(basis_from_bit(b));
    return out;
}

}  // namespace detail

/// Basis bit(s) first, then the n data bits.
inline AlicePreparation alice_prepare_block(const ProtocolConfig& config, CountingRng& rng) {
    const std::size_t n = config.block_size;
    auto bases = detail::draw_bases(rng, Party::alice, Stage::alice_basis, config.mode, n);
    Bits bits = rng.draw_bits(Party::alice, Stage::alice_bits, n);
    std::vector<StateVector> qubits;
    qubits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) qubits.push_back(prepare_bb84(bits[i], bases[i]));
    return {std::move(bases), std::move(bits), QubitBlock(std::move(qubits))};
}

/// Measures every qubit; measurement randomness is charged to bob_measurement.
/// `forced_bases` replaces the basis draw (test hook).
inline BobMeasurement bob_measure_block(QubitBlock& qubits, const ProtocolConfig& config, CountingRng& rng,
                                        const std::vector<Basis>* forced_bases = nullptr) {
    const std::size_t n = config.block_size;
    if (qubits.size() != n)
        throw std::invalid_argument("bob_measure_block: expected " + std::to_string(n) + " qubits, got " +
                                    std::to_string(qubits.size()));
    BobMeasurement out;
    out.bases = forced_bases ? *forced_bases : detail::draw_bases(rng, Party::bob, Stage::bob_basis, config.mode, n);
    const RandomSource coin{&rng, Party::bob, Stage::bob_measurement};
    out.outcomes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.outcomes.push_back(qubits.measure(i, out.bases[i], coin));
    return out;
}

/// Each qubit independently has its two preparation-basis eigenstates
/// exchanged with probability flip_prob.
inline QubitBlock transmit(QubitBlock qubits, const std::vector<Basis>& preparation_bases, double flip_prob,
                           CountingRng& rng) {
    if (preparation_bases.size() != qubits.size()) throw std::invalid_argument("transmit: basis count mismatch");
    for (std::size_t i = 0; i < qubits.size(); ++i)
        if (rng.bernoulli(Party::shared, Stage::channel, flip_prob))
            qubits.apply(i, Unitary::basis_flip(preparation_bases[i]));
    return qubits;
}

struct SiftResult {
    Bits alice_key;
    Bits bob_key;
    /// Eve's symbol per sifted bit: 0/1, or kErasure.
    std::vector<int> eve_symbols;
    /// Announced basis of each sifted bit.
    Bits bases;
    /// Kept blocks (per_block) or kept positions (per_qubit).
    std::size_t kept_units = 0;
    std::vector<std::vector<bool>> flags;
};

/// per_block keeps a block iff its block bases agree (all n bits or none);
/// per_qubit keeps matching positions.
inline SiftResult sift(const std::vector<BlockRecord>& records, Mode mode) {
    SiftResult out;
    for (const auto& r : records) {
        const std::size_t n = r.alice_bits.size();
        std::vector<bool> keep(n, false);
        if (mode == Mode::per_block) {
            const bool match = n > 0 && r.alice_bases[0] == r.bob_bases[0];
            std::fill(keep.begin(), keep.end(), match);
            out.kept_units += match ? 1 : 0;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                keep[i] = r.alice_bases[i] == r.bob_bases[i];
                out.kept_units += keep[i] ? 1 : 0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!keep[i]) continue;
            out.alice_key.push_back(r.alice_bits[i]);
            out.bob_key.push_back(r.bob_outcomes[i]);
            out.eve_symbols.push_back(r.eve.symbol(i, r.alice_bases[i]));
            out.bases.push_back(static_cast<Bit>(r.alice_bases[i]));
        }
        out.flags.push_back(std::move(keep));
    }
    return out;
}

struct QberEstimate {
    double estimate = 0.0;
    std::vector<std::size_t> disclosed;  // sorted
};

/// Discloses round(fraction * length) uniformly chosen positions (partial
/// Fisher-Yates, draws charged to sampling) and compares them.
inline QberEstimate estimate_qber(const Bits& alice, const Bits& bob, double sample_fraction, CountingRng& rng) {
    if (alice.size() != bob.size()) throw std::invalid_argument("estimate_qber: key lengths differ");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw std::invalid_argument("estimate_qber: sample_fraction must lie in (0,1)");
    const std::size_t len = alice.size();
    if (static_cast<double>(len) * sample_fraction < 1.0)
        throw std::invalid_argument("estimate_qber: key of length " + std::to_string(len) +
                                    " too short for sample fraction");
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(len))));
    std::vector<std::size_t> idx(len);
    for (std::size_t i = 0; i < len; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + rng.uniform_below(Party::shared, Stage::sampling, len - i);
        std::swap(idx[i], idx[j]);
    }
    QberEstimate out;
    out.disclosed.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.disclosed.begin(), out.disclosed.end());
    std::size_t errors = 0;
    for (auto i : out.disclosed) errors += alice[i] != bob[i];
    out.estimate = static_cast<double>(errors) / static_cast<double>(k);
    return out;
}

/// Copy of `v` without the (sorted) positions in `drop`.
template <class T>
std::vector<T> remove_indices(const std::vector<T>& v, const std::vector<std::size_t>& drop) {
    std::vector<T> out;
    out.reserve(v.size() - std::min(v.size(), drop.size()));
    std::size_t d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (d < drop.size() && drop[d] == i) {
            ++d;
            continue;
        }
        out.push_back(v[i]);
    }
    return out;
}

inline std::size_t hamming_distance(const Bits& a, const Bits& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

struct SessionReport {
    ProtocolConfig config;
    std::size_t raw_qubits = 0;
    std::size_t sifted_bits = 0;
    std::size_t kept_units = 0;
    double qber_estimated = 0.0;
    /// Over the full sifted key, disclosed positions included.
    double qber_true = 0.0;
    std::vector<std::size_t> disclosed_indices;
    RandomnessLedger ledger;
    Bits sifted_alice;
    Bits sifted_bob;
    std::vector<int> sifted_eve;
    Bits sifted_basis;
    std::vector<BlockRecord> records;

    Bits downstream_alice() const { return remove_indices(sifted_alice, disclosed_indices); }
    Bits downstream_bob() const { return remove_indices(sifted_bob, disclosed_indices); }
    std::vector<int> downstream_eve() const { return remove_indices(sifted_eve, disclosed_indices); }
};

/// Session loop without the block-mode n >= 2 premise (used for the n = 1
/// mode-equivalence check). Continues drawing from `rng`.
inline SessionReport simulate(const ProtocolConfig& config, const BlockAttackSpec& attack, CountingRng& rng) {
    config.validate_ranges();
    attack.validate();
    if (attack.kind == AttackKind::unitary_block && attack.block_qubits != config.block_size)
        throw std::invalid_argument("unitary_block attack is sized for blocks of " +
                                    std::to_string(attack.block_qubits) + " qubits");

    SessionReport rep;
    rep.config = config;
    rep.raw_qubits = config.raw_qubits();
    rep.records.reserve(config.num_blocks);
    for (std::size_t b = 0; b < config.num_blocks; ++b) {
        AlicePreparation prep = alice_prepare_block(config, rng);
        AttackedBlock attacked{std::move(prep.qubits), EveRecord::empty(config.block_size)};
        if (attack.kind == AttackKind::intercept_resend)
            attacked = intercept_resend(std::move(attacked.forwarded), attack, rng);
        else if (attack.kind == AttackKind::unitary_block)
            attacked = unitary_block_attack(std::move(attacked.forwarded), attack, rng);
        QubitBlock qubits = transmit(std::move(attacked.forwarded), prep.bases, config.channel_flip_prob, rng);
        BobMeasurement bob =
            bob_measure_block(qubits, config, rng, config.force_matching_bases ? &prep.bases : nullptr);
        // Announcement: Alice's bases become public.
        if (attacked.record.pending) resolve_delayed(qubits, attacked.record, attack, prep.bases, rng);
        rep.records.push_back(BlockRecord{std::move(prep.bits), std::move(prep.bases), std::move(bob.bases),
                                          std::move(bob.outcomes), {}, std::move(attacked.record)});
    }

    SiftResult s = sift(rep.records, config.mode);
    for (std::size_t b = 0; b < rep.records.size(); ++b) rep.records[b].sifted = std::move(s.flags[b]);
    rep.sifted_alice = std::move(s.alice_key);
    rep.sifted_bob = std::move(s.bob_key);
    rep.sifted_eve = std::move(s.eve_symbols);
    rep.sifted_basis = std::move(s.bases);
    rep.sifted_bits = rep.sifted_alice.size();
    rep.kept_units = s.kept_units;
    if (rep.sifted_bits > 0) {
        rep.qber_true = static_cast<double>(hamming_distance(rep.sifted_alice, rep.sifted_bob)) /
                        static_cast<double>(rep.sifted_bits);
        if (static_cast<double>(rep.sifted_bits) * config.sample_fraction >= 1.0) {
            QberEstimate est = estimate_qber(rep.sifted_alice, rep.sifted_bob, config.sample_fraction, rng);
            rep.qber_estimated = est.estimate;
            rep.disclosed_indices = std::move(est.disclosed);
        }
    }
    rep.ledger = rng.ledger();
    return rep;
}

inline SessionReport run_session(const ProtocolConfig& config, const BlockAttackSpec& attack, CountingRng& rng) {
    config.validate();
    return simulate(config, attack, rng);
}

/// prepare -> attack -> transmit -> measure -> sift -> estimate, seeded from config.seed.
inline SessionReport run_session(const ProtocolConfig& config, const BlockAttackSpec& attack = {}) {
    CountingRng rng(config.seed);
    return run_session(config, attack, rng);
}

/// Plug-in I(A:B), I(E:A), I(E:B) over the full sifted key. With `bases`
/// (the announced basis per bit) every term is conditioned on the basis,
/// which is public once sifting is done.
inline RateReport information_rates(const Bits& alice, const Bits& bob, const std::vector<int>& eve,
                                    const Bits& bases = {}) {
    if (alice.empty()) throw std::invalid_argument("information_rates: empty sifted key");
    if (alice.size() != bob.size() || alice.size() != eve.size() || (!bases.empty() && bases.size() != alice.size()))
        throw std::invalid_argument("information_rates: length mismatch");
    std::vector<Outcome> samples;
    samples.reserve(alice.size());
    for (std::size_t i = 0; i < alice.size(); ++i)
        samples.push_back({alice[i], bob[i], eve[i], bases.empty() ? 0 : bases[i]});
    const JointDistribution joint = empirical_joint({"A", "B", "E", "K"}, samples);
    return ck_rate(conditional_mutual_information(joint, "A", "B", "K"),
                   conditional_mutual_information(joint, "E", "A", "K"),
                   conditional_mutual_information(joint, "E", "B", "K"));
}

inline RateReport information_rates(const SessionReport& rep) {
    return information_rates(rep.sifted_alice, rep.sifted_bob, rep.sifted_eve, rep.sifted_basis);
}

}  // namespace blockbb84
