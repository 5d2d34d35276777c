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

// Classical post-processing: Cascade reconciliation and Toeplitz-hash
// privacy amplification. Every random choice goes through the CountingRng.

#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockbb84/infotheory.hpp"
#include "blockbb84/protocol.hpp"
#include "blockbb84/randomness.hpp"

namespace blockbb84 {

struct CascadeParams {
    std::size_t passes = 4;
    /// Pass-1 block length is block_factor / qber.
    double block_factor = 0.73;
    /// Used in place of a zero QBER estimate.
    double qber_floor = 0.01;
    std::size_t min_length = 64;
};

struct ReconciliationResult {
    Bits corrected;
    std::size_t disclosed = 0;
    std::size_t passes = 0;
    /// Test-only: mismatches left against Alice's key.
    std::size_t residual_mismatches = 0;
    std::size_t first_block_length = 0;
    std::vector<std::size_t> corrections_per_pass;
};

namespace detail {

class CascadeRun {
public:
    CascadeRun(const Bits& alice, Bits bob) : alice_(alice), bob_(std::move(bob)) {}

    void add_pass(std::vector<std::size_t> order, std::size_t block_len) {
        Pass p;
        p.order = std::move(order);
        p.block_of.resize(p.order.size());
        for (std::size_t start = 0; start < p.order.size(); start += block_len) {
            const std::size_t end = std::min(start + block_len, p.order.size());
            const std::size_t b = p.starts.size();
            p.starts.push_back(start);
            p.ends.push_back(end);
            Bit pa = 0, pb = 0;
            for (std::size_t i = start; i < end; ++i) {
                p.block_of[p.order[i]] = b;
                pa ^= alice_[p.order[i]];
                pb ^= bob_[p.order[i]];
            }
            p.alice_parity.push_back(pa);
            p.bob_parity.push_back(pb);
            ++disclosed_;  // Alice announces every top-level parity.
            if (pa != pb) mismatched_.insert({passes_.size(), b});
        }
        passes_.push_back(std::move(p));
    }

    /// Resolves mismatched blocks, smallest pass first, until none remain.
    std::size_t settle() {
        std::size_t fixed = 0;
        while (!mismatched_.empty()) {
            const auto [pass, block] = *mismatched_.begin();
            const std::size_t pos = binary_search(passes_[pass], block);
            flip(pos);
            ++fixed;
        }
        return fixed;
    }

    std::size_t disclosed() const { return disclosed_; }
    const Bits& bob() const { return bob_; }

private:
    struct Pass {
        std::vector<std::size_t> order;
        std::vector<std::size_t> block_of;
        std::vector<std::size_t> starts, ends;
        Bits alice_parity, bob_parity;
    };

    // Power-of-two aligned bisection: exactly ceil(log2(block length))
    // sub-block parities are disclosed.
    std::size_t binary_search(const Pass& p, std::size_t block) {
        const std::size_t start = p.starts[block];
        const std::size_t size = p.ends[block] - start;
        std::size_t lo = 0;
        std::size_t width = std::bit_ceil(size);
        while (width > 1) {
            const std::size_t half = width / 2;
            const std::size_t end = std::min(lo + half, size);
            Bit pa = 0, pb = 0;
            for (std::size_t i = lo; i < end; ++i) {
                pa ^= alice_[p.order[start + i]];
                pb ^= bob_[p.order[start + i]];
            }
            ++disclosed_;
            if (pa == pb) lo += half;
            width = half;
        }
        return p.order[start + lo];
    }

    void flip(std::size_t pos) {
        bob_[pos] ^= 1u;
        for (std::size_t k = 0; k < passes_.size(); ++k) {
            Pass& p = passes_[k];
            const std::size_t b = p.block_of[pos];
            p.bob_parity[b] ^= 1u;
            if (p.bob_parity[b] != p.alice_parity[b])
                mismatched_.insert({k, b});
            else
                mismatched_.erase({k, b});
        }
    }

    const Bits& alice_;
    Bits bob_;
    std::vector<Pass> passes_;
    std::set<std::pair<std::size_t, std::size_t>> mismatched_;
    std::size_t disclosed_ = 0;
};

}  // namespace detail

inline std::size_t cascade_first_block_length(double qber, std::size_t key_length, const CascadeParams& params = {}) {
    const double q = qber > 0.0 ? qber : params.qber_floor;
    const auto k = static_cast<std::size_t>(std::max(1.0, std::round(params.block_factor / q)));
    return std::clamp<std::size_t>(k, std::min<std::size_t>(4, key_length), key_length);
}

/// Cascade. Pass 1 runs on the key in order; each later pass doubles the
/// block length and first applies a fresh Fisher-Yates permutation drawn
/// from (shared, ec_permutation). Every flip is cascaded back into all
/// passes run so far.
inline ReconciliationResult cascade(const Bits& alice, const Bits& bob, double qber_estimate, CountingRng& rng,
                                    const CascadeParams& params = {}) {
    if (alice.size() != bob.size()) throw std::invalid_argument("cascade: key lengths differ");
    if (alice.size() < params.min_length)
        throw std::invalid_argument("cascade: keys shorter than " + std::to_string(params.min_length) + " bits");
    if (!(qber_estimate >= 0.0 && qber_estimate < 0.5))
        throw std::invalid_argument("cascade: qber estimate must lie in [0, 0.5)");
    if (params.passes == 0) throw std::invalid_argument("cascade: at least one pass required");

    const std::size_t n = alice.size();
    ReconciliationResult res;
    res.first_block_length = cascade_first_block_length(qber_estimate, n, params);
    detail::CascadeRun run(alice, bob);
    std::size_t block_len = res.first_block_length;
    for (std::size_t pass = 0; pass < params.passes; ++pass) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        if (pass > 0)
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[rng.uniform_below(Party::shared, Stage::ec_permutation, i + 1)]);
        run.add_pass(std::move(order), block_len);
        res.corrections_per_pass.push_back(run.settle());
        block_len = std::min(block_len * 2, n);
    }
    res.corrected = run.bob();
    res.disclosed = run.disclosed();
    res.passes = params.passes;
    res.residual_mismatches = hamming_distance(alice, res.corrected);
    return res;
}

/// Output bit j is the parity of key AND seed[j, j + key.size()).
inline Bits toeplitz_hash(const Bits& key, const Bits& seed, std::size_t output_length) {
    if (output_length == 0) return {};
    if (seed.size() != key.size() + output_length - 1)
        throw std::invalid_argument("toeplitz_hash: seed must hold input + output - 1 bits");
    auto pack = [](const Bits& b) {
        std::vector<std::uint64_t> w(b.size() / 64 + 2, 0);
        for (std::size_t i = 0; i < b.size(); ++i)
            if (b[i]) w[i / 64] |= std::uint64_t{1} << (i % 64);
        return w;
    };
    const std::vector<std::uint64_t> k = pack(key);
    const std::vector<std::uint64_t> s = pack(seed);
    const std::size_t words = (key.size() + 63) / 64;
    Bits out(output_length);
    for (std::size_t j = 0; j < output_length; ++j) {
        const std::size_t base = j / 64, shift = j % 64;
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t window = s[base + w] >> shift;
            if (shift) window |= s[base + w + 1] << (64 - shift);
            acc ^= k[w] & window;  // key words beyond its length are zero
        }
        out[j] = static_cast<Bit>(std::popcount(acc) & 1);
    }
    return out;
}

struct AmplificationResult {
    Bits final_key;
    Bits seed;
    std::size_t input_length = 0;
    std::size_t output_length = 0;
    std::size_t seed_bits = 0;
};

inline std::size_t amplification_target_length(std::size_t key_length, std::size_t leaked_bits, double eve_info_bits,
                                               std::size_t safety_margin) {
    const auto eve = static_cast<long long>(std::ceil(std::max(0.0, eve_info_bits)));
    const long long target = static_cast<long long>(key_length) - static_cast<long long>(leaked_bits) - eve -
                             static_cast<long long>(safety_margin);
    return target > 0 ? static_cast<std::size_t>(target) : 0;
}

/// Compresses `key` to key - leaked - ceil(eve_info) - margin bits. The
/// seed (input + output - 1 bits) is drawn from (shared, pa_seed); an empty
/// output draws nothing.
inline AmplificationResult toeplitz_pa(const Bits& key, std::size_t leaked_bits, double eve_info_bits,
                                       std::size_t safety_margin, CountingRng& rng) {
    if (key.empty()) throw std::invalid_argument("toeplitz_pa: empty key");
    AmplificationResult r;
    r.input_length = key.size();
    r.output_length = amplification_target_length(key.size(), leaked_bits, eve_info_bits, safety_margin);
    if (r.output_length == 0) return r;
    r.seed = rng.draw_bits(Party::shared, Stage::pa_seed, key.size() + r.output_length - 1);
    r.seed_bits = r.seed.size();
    r.final_key = toeplitz_hash(key, r.seed, r.output_length);
    return r;
}

enum class PipelineStatus : std::uint8_t { key_distilled, not_distillable, reconciliation_failed, key_exhausted };

inline std::string_view to_string(PipelineStatus s) {
    switch (s) {
    case PipelineStatus::key_distilled: return "key_distilled";
    case PipelineStatus::not_distillable: return "not_distillable";
    case PipelineStatus::reconciliation_failed: return "reconciliation_failed";
    case PipelineStatus::key_exhausted: return "key_exhausted";
    }
    return "?";
}

struct StageTimings {
    double reconciliation_seconds = 0.0;
    double amplification_seconds = 0.0;
};

struct PipelineResult {
    PipelineStatus status = PipelineStatus::not_distillable;
    RateReport rates;
    std::size_t sampling_disclosed = 0;
    double eve_info_bits = 0.0;
    std::optional<ReconciliationResult> reconciliation;
    std::optional<AmplificationResult> amplification;
    Bits final_key;
    Bits bob_final_key;
    RandomnessLedger ledger;
    StageTimings timings;

    bool reconciled() const { return reconciliation && reconciliation->residual_mismatches == 0; }
};

struct PipelineParams {
    std::size_t safety_margin = 32;
    CascadeParams cascade;
    /// Without an attack model Eve is credited with no information.
    bool attack_configured = true;
};

/// cascade -> eve_info = min(I(E:A), I(E:B)) x key length -> toeplitz_pa, on
/// the sifted key with the estimation sample removed. Aborts with an empty
/// key when the Csiszar-Korner rate is not positive or reconciliation
/// leaves mismatches. `rng` must be the generator that ran the session.
inline PipelineResult pipeline(const SessionReport& session, const RateReport& rates, CountingRng& rng,
                               const PipelineParams& params = {}) {
    if (session.sifted_bits == 0) throw std::invalid_argument("pipeline: empty sifted key");
    using clock = std::chrono::steady_clock;
    PipelineResult out;
    out.rates = rates;
    out.sampling_disclosed = session.disclosed_indices.size();
    const Bits alice = session.downstream_alice();
    const Bits bob = session.downstream_bob();
    auto finish = [&]() -> PipelineResult {
        out.ledger = rng.ledger();
        return std::move(out);
    };
    if (!rates.distillable) {
        out.status = PipelineStatus::not_distillable;
        return finish();
    }
    if (alice.size() < params.cascade.min_length || session.qber_estimated >= 0.5) {
        out.status = PipelineStatus::reconciliation_failed;
        return finish();
    }
    auto t0 = clock::now();
    out.reconciliation = cascade(alice, bob, session.qber_estimated, rng, params.cascade);
    out.timings.reconciliation_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (!out.reconciled()) {
        out.status = PipelineStatus::reconciliation_failed;
        return finish();
    }
    out.eve_info_bits =
        params.attack_configured ? std::min(rates.i_ea, rates.i_eb) * static_cast<double>(alice.size()) : 0.0;
    t0 = clock::now();
    out.amplification = toeplitz_pa(alice, out.reconciliation->disclosed, out.eve_info_bits, params.safety_margin, rng);
    out.timings.amplification_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    out.final_key = out.amplification->final_key;
    out.bob_final_key = toeplitz_hash(out.reconciliation->corrected, out.amplification->seed,
                                      out.amplification->output_length);
    out.status = out.final_key.empty() ? PipelineStatus::key_exhausted : PipelineStatus::key_distilled;
    return finish();
}

}  // namespace blockbb84
