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

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blockbb84 {

using Bit = std::uint8_t;
using Bits = std::vector<Bit>;

enum class Party : std::uint8_t { alice, bob, eve, shared };

/// Protocol stage a random draw is charged to. `channel` carries the
/// simulated channel noise; like `bob_measurement` it is simulation-internal
/// and never enters the protocol-consumption ratios.
enum class Stage : std::uint8_t {
    alice_basis,
    alice_bits,
    bob_basis,
    bob_measurement,
    sampling,
    ec_permutation,
    pa_seed,
    attack,
    channel,
};

inline constexpr std::array<Party, 4> kAllParties = {Party::alice, Party::bob, Party::eve,
                                                     Party::shared};
inline constexpr std::array<Stage, 9> kAllStages = {
    Stage::alice_basis,    Stage::alice_bits, Stage::bob_basis, Stage::bob_measurement,
    Stage::sampling,       Stage::ec_permutation, Stage::pa_seed, Stage::attack,
    Stage::channel,
};

inline std::string_view to_string(Party p) {
    switch (p) {
    case Party::alice: return "alice";
    case Party::bob: return "bob";
    case Party::eve: return "eve";
    case Party::shared: return "shared";
    }
    throw std::invalid_argument("unknown party");
}

inline std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::alice_basis: return "alice_basis";
    case Stage::alice_bits: return "alice_bits";
    case Stage::bob_basis: return "bob_basis";
    case Stage::bob_measurement: return "bob_measurement";
    case Stage::sampling: return "sampling";
    case Stage::ec_permutation: return "ec_permutation";
    case Stage::pa_seed: return "pa_seed";
    case Stage::attack: return "attack";
    case Stage::channel: return "channel";
    }
    throw std::invalid_argument("unknown stage");
}

inline Stage stage_from_string(std::string_view name) {
    for (Stage s : kAllStages)
        if (to_string(s) == name) return s;
    throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

inline Party party_from_string(std::string_view name) {
    for (Party p : kAllParties)
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown party '" + std::string(name) + "'");
}

inline void check_stage(Stage s) {
    if (static_cast<std::size_t>(s) >= kAllStages.size()) throw std::invalid_argument("unknown stage");
}

/// Counts of random bits drawn, keyed by (party, stage). Entries only grow.
class RandomnessLedger {
public:
    using Key = std::pair<Party, Stage>;

    void add(Party party, Stage stage, std::uint64_t bits) {
        check_stage(stage);
        counts_[{party, stage}] += bits;
    }

    std::uint64_t count(Party party, Stage stage) const {
        auto it = counts_.find({party, stage});
        return it == counts_.end() ? 0 : it->second;
    }

    std::uint64_t stage_total(Stage stage) const {
        std::uint64_t sum = 0;
        for (const auto& [key, bits] : counts_)
            if (key.second == stage) sum += bits;
        return sum;
    }

    std::uint64_t total() const {
        return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0},
                               [](std::uint64_t acc, const auto& kv) { return acc + kv.second; });
    }

    const std::map<Key, std::uint64_t>& entries() const { return counts_; }

    RandomnessLedger& operator+=(const RandomnessLedger& other) {
        for (const auto& [key, bits] : other.counts_) counts_[key] += bits;
        return *this;
    }

    friend RandomnessLedger operator+(RandomnessLedger a, const RandomnessLedger& b) { return a += b; }
    friend bool operator==(const RandomnessLedger&, const RandomnessLedger&) = default;

private:
    std::map<Key, std::uint64_t> counts_;
};

/// The single source of randomness: a seeded mt19937_64 whose output is
/// consumed bit by bit, every bit charged to the ledger.
class CountingRng {
public:
    explicit CountingRng(std::uint64_t seed) : engine_(seed) {}

    Bit draw_bit(Party party, Stage stage) {
        check_stage(stage);
        ledger_.add(party, stage, 1);
        return next_bit();
    }

    Bits draw_bits(Party party, Stage stage, std::size_t count) {
        check_stage(stage);
        Bits out(count);
        for (auto& b : out) b = next_bit();
        ledger_.add(party, stage, count);
        return out;
    }

    /// Unsigned integer assembled from `width` fresh bits, most significant first.
    std::uint64_t draw_uint(Party party, Stage stage, unsigned width) {
        if (width > 64) throw std::invalid_argument("draw_uint width exceeds 64");
        check_stage(stage);
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | next_bit();
        ledger_.add(party, stage, width);
        return v;
    }

    /// Uniform integer in [0, bound) via ceil(log2 bound)-bit draws with rejection.
    /// bound == 1 consumes nothing.
    std::uint64_t uniform_below(Party party, Stage stage, std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below bound must be positive");
        if (bound == 1) return 0;
        const unsigned width = std::bit_width(bound - 1);
        for (;;) {
            std::uint64_t v = draw_uint(party, stage, width);
            if (v < bound) return v;
        }
    }

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform01(Party party, Stage stage) {
        return static_cast<double>(draw_uint(party, stage, 53)) * 0x1.0p-53;
    }

    /// Bernoulli(p). p <= 0 and p >= 1 are deterministic and draw nothing.
    bool bernoulli(Party party, Stage stage, double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01(party, stage) < p;
    }

    const RandomnessLedger& ledger() const { return ledger_; }

private:
    Bit next_bit() {
        if (available_ == 0) {
            buffer_ = engine_();
            available_ = 64;
        }
        --available_;
        return static_cast<Bit>((buffer_ >> available_) & 1u);
    }

    std::mt19937_64 engine_;
    std::uint64_t buffer_ = 0;
    unsigned available_ = 0;
    RandomnessLedger ledger_;
};

/// A CountingRng bound to one (party, stage) account.
struct RandomSource {
    CountingRng* rng;
    Party party;
    Stage stage;

    Bit bit() const { return rng->draw_bit(party, stage); }
    double uniform01() const { return rng->uniform01(party, stage); }
    bool bernoulli(double p) const { return rng->bernoulli(party, stage, p); }
    std::uint64_t uniform_below(std::uint64_t bound) const {
        return rng->uniform_below(party, stage, bound);
    }
};

/// Exact non-negative rational, always reduced.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Rational of(std::uint64_t n, std::uint64_t d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        const std::uint64_t g = std::gcd(n, d);
        return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Ledger summary of one session, with the quantum-phase aggregates.
struct ConsumptionReport {
    std::uint64_t raw_qubits = 0;
    std::map<Stage, std::uint64_t> per_stage;

    std::uint64_t stage(Stage s) const {
        auto it = per_stage.find(s);
        return it == per_stage.end() ? 0 : it->second;
    }
    std::uint64_t quantum_phase_alice() const {
        return stage(Stage::alice_basis) + stage(Stage::alice_bits);
    }
    std::uint64_t quantum_phase_bob() const { return stage(Stage::bob_basis); }
    std::uint64_t quantum_phase_total() const { return quantum_phase_alice() + quantum_phase_bob(); }
};

inline ConsumptionReport make_consumption_report(const RandomnessLedger& ledger,
                                                 std::uint64_t raw_qubits) {
    ConsumptionReport r;
    r.raw_qubits = raw_qubits;
    for (Stage s : kAllStages) r.per_stage[s] = ledger.stage_total(s);
    return r;
}

struct ConsumptionRatios {
    /// Absent when the baseline drew nothing for that stage.
    std::map<Stage, std::optional<Rational>> per_stage;
    Rational quantum_phase_alice;
    Rational quantum_phase_bob;
    Rational quantum_phase_total;
};

/// Ratios of block-mode to per-qubit-mode consumption at equal raw-qubit count.
inline ConsumptionRatios consumption_ratio(const ConsumptionReport& block,
                                           const ConsumptionReport& per_qubit) {
    if (block.raw_qubits != per_qubit.raw_qubits)
        throw std::invalid_argument("consumption_ratio: raw-qubit counts differ (" +
                                    std::to_string(block.raw_qubits) + " vs " +
                                    std::to_string(per_qubit.raw_qubits) + ")");
    ConsumptionRatios out;
    for (Stage s : kAllStages) {
        const auto base = per_qubit.stage(s);
        out.per_stage[s] = base == 0 ? std::nullopt
                                     : std::optional<Rational>(Rational::of(block.stage(s), base));
    }
    auto ratio = [](std::uint64_t a, std::uint64_t b) {
        if (b == 0) throw std::invalid_argument("consumption_ratio: empty baseline quantum phase");
        return Rational::of(a, b);
    };
    out.quantum_phase_alice = ratio(block.quantum_phase_alice(), per_qubit.quantum_phase_alice());
    out.quantum_phase_bob = ratio(block.quantum_phase_bob(), per_qubit.quantum_phase_bob());
    out.quantum_phase_total = ratio(block.quantum_phase_total(), per_qubit.quantum_phase_total());
    return out;
}

}  // namespace blockbb84
