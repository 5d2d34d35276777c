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


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "blockbb84/blockbb84.hpp"
#include "oracle_circuits.hpp"
#include "stats.hpp"

namespace bb = blockbb84;
namespace oc = blockbb84::oracle;
namespace fs = std::filesystem;
using bb::Basis;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(const std::string& id, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bb::RateReport rates_of(const bb::SessionReport& s) { return bb::information_rates(s); }

// 1. Alice's quantum-phase consumption ratio at B = 100 blocks.
void criterion_1() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    double r1000 = 0.0;
    for (std::size_t n : {2u, 10u, 100u, 1000u}) {
        auto consumption = [n](bb::Mode mode) {
            bb::ProtocolConfig cfg{n, 100, mode, 0.0, 0.2, 1};
            const auto rep = bb::run_session(cfg);
            return bb::make_consumption_report(rep.ledger, rep.raw_qubits);
        };
        const auto ratio = bb::consumption_ratio(consumption(bb::Mode::per_block), consumption(bb::Mode::per_qubit));
        const auto expected = bb::Rational::of(n + 1, 2 * n);
        ok = ok && ratio.quantum_phase_alice == expected;
        d << "n=" << n << " " << ratio.quantum_phase_alice.num << "/" << ratio.quantum_phase_alice.den << "; ";
        if (n == 1000) {
            r1000 = ratio.quantum_phase_alice.value();
            // |num/den - 1/2| <= 0.001 * 1/2, in integers.
            const auto& q = ratio.quantum_phase_alice;
            const std::uint64_t twice = 2 * q.num, gap = twice > q.den ? twice - q.den : q.den - twice;
            ok = ok && q == bb::Rational{1001, 2000} && 1000 * gap <= q.den;
        }
    }
    const double rel = std::abs(r1000 - 0.5) / 0.5;
    const double secs = seconds_since(t0);
    ok = ok && secs < 1.0;
    d << "n=1000 ratio " << r1000 << " (" << fmt("%.3f", rel * 100) << "% above 1/2); " << fmt("%.3f s", secs);
    verdict("criterion 1 (Alice consumption ratio (n+1)/(2n))", ok, d.str());
}

// 2. Singlet-simulation reduction over the default corpus.
void criterion_2() {
    const auto t0 = Clock::now();
    const auto corpus = bb::reduction_corpus({2, 3}, {0, 1, 2}, 20, bb::VerifyOptions{}.seed);
    double worst = 0.0;
    std::size_t passed = 0;
    for (const auto& c : corpus) {
        const auto rep = bb::verify_reduction(c.u, c.n, c.m);
        worst = std::max(worst, rep.max_deviation);
        passed += rep.passed ? 1 : 0;
    }
    const double secs = seconds_since(t0);
    const bool ok = passed == corpus.size() && worst < 1e-9 && secs < 60.0;
    verdict("criterion 2 (reduction verification)", ok,
            std::to_string(passed) + "/" + std::to_string(corpus.size()) + " cases, max deviation " +
                fmt("%.2e", worst) + "; " + fmt("%.3f s", secs));
}

// 3. Block sifting over 10^4 blocks.
void criterion_3() {
    const auto t0 = Clock::now();
    const std::size_t n = 8, blocks = 10000;
    const auto rep = bb::run_session(bb::ProtocolConfig{n, blocks, bb::Mode::per_block, 0.0, 0.2, 3});
    bool whole = rep.sifted_bits == n * rep.kept_units;
    for (const auto& r : rep.records) {
        const auto k = r.sifted_count();
        whole = whole && (k == 0 || k == n) && ((k == n) == (r.alice_bases[0] == r.bob_bases[0]));
    }
    const bool frac_ok = bb::testing::within_binomial(rep.kept_units, blocks, 0.5);
    const double secs = seconds_since(t0);
    verdict("criterion 3 (block sifting)", frac_ok && whole && secs < 10.0,
            "kept " + std::to_string(rep.kept_units) + "/" + std::to_string(blocks) + " blocks (" +
                fmt("%.2f", (static_cast<double>(rep.kept_units) / blocks - 0.5) / std::sqrt(0.25 / blocks)) +
                " sigma), blocks all-or-nothing: " + (whole ? "yes" : "no") + "; " + fmt("%.3f s", secs));
}

// 4. Full intercept-resend, per-qubit vs per-block Eve granularity.
void criterion_4() {
    struct Result {
        double qber, i_ea;
        std::size_t sifted;
    };
    auto run = [](bb::Granularity g, std::uint64_t seed) {
        const auto rep = bb::run_session(bb::ProtocolConfig{2, 200000, bb::Mode::per_block, 0.0, 0.2, seed},
                                         bb::BlockAttackSpec::intercept_resend(1.0, g));
        return Result{rep.qber_true, rates_of(rep).i_ea, rep.sifted_bits};
    };
    const Result q = run(bb::Granularity::per_qubit, 41), b = run(bb::Granularity::per_block, 42);
    const bool ok = q.sifted >= 10000 && b.sifted >= 10000 && std::abs(q.qber - 0.25) <= 0.02 &&
                    std::abs(b.qber - 0.25) <= 0.02 && std::abs(q.i_ea - 0.5) <= 0.02 &&
                    std::abs(b.i_ea - 0.5) <= 0.02 && std::abs(q.qber - b.qber) <= 0.01 &&
                    std::abs(q.i_ea - b.i_ea) <= 0.01;
    verdict("criterion 4 (information parity across granularities)", ok,
            "per_qubit qber " + fmt("%.4f", q.qber) + " I(E:A) " + fmt("%.4f", q.i_ea) + "; per_block qber " +
                fmt("%.4f", b.qber) + " I(E:A) " + fmt("%.4f", b.i_ea) + "; sifted " + std::to_string(q.sifted) +
                "/" + std::to_string(b.sifted));
}

// 5. Csiszar-Korner gate over an intercept fraction sweep.
void criterion_5() {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oc::exact_ck_rate(mid) > 0.0 ? lo : hi) = mid;
    }
    const double exact_cross = 0.5 * (lo + hi);

    const std::vector<double> ps = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> ck;
    std::vector<bool> gate_ok;
    std::ostringstream points;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        bb::ProtocolConfig cfg{4, 10000, bb::Mode::per_block, 0.0, 0.2, 7 + i};
        bb::CountingRng rng(cfg.seed);
        const auto spec = bb::BlockAttackSpec::intercept_resend(ps[i], bb::Granularity::per_qubit);
        const auto session = bb::run_session(cfg, spec, rng);
        const auto rates = rates_of(session);
        const auto result = bb::pipeline(session, rates, rng);
        ck.push_back(rates.ck_rate);
        const bool expect_key = rates.ck_rate > 0.0 && result.reconciled();
        gate_ok.push_back(expect_key == !result.final_key.empty());
        points << "p=" << ps[i] << " ck " << fmt("%+.4f", rates.ck_rate) << " " << bb::to_string(result.status)
               << " key " << result.final_key.size();
        if (result.reconciliation)
            points << " (cascade " << result.reconciliation->disclosed << " of "
                   << session.sifted_bits - session.disclosed_indices.size() << ")";
        points << (i + 1 < ps.size() ? "; " : "");
    }
    std::size_t sign_changes = 0;
    bool bracketed = false;
    for (std::size_t i = 0; i + 1 < ps.size(); ++i)
        if ((ck[i] > 0.0) != (ck[i + 1] > 0.0)) {
            ++sign_changes;
            bracketed = bracketed || (ps[i] <= exact_cross && exact_cross <= ps[i + 1]);
        }
    verdict("criterion 5a (ck_rate zero crossing brackets exact crossing)", sign_changes == 1 && bracketed,
            "exact crossing p* = " + fmt("%.4f", exact_cross) + ", " + std::to_string(sign_changes) +
                " sign change(s) in the empirical sweep");
    const bool all_gate = std::all_of(gate_ok.begin(), gate_ok.end(), [](bool b) { return b; });
    verdict("criterion 5b (nonempty key iff ck_rate > 0 and reconciliation succeeds)", all_gate, points.str());
}

// 6. Monte Carlo against the enumeration oracle.
void criterion_6() {
    struct Case {
        std::string name;
        bb::Circuit circuit;
    };
    bb::Circuit kept_half_z;  // partner measured first, then Eve's kept half
    kept_half_z.prepare_singlet().measure("partner", 1, 0).measure("kept", 0, 0);
    std::vector<Case> cases = {
        {"singlet ZZ", oc::singlet_both(Basis::Z, Basis::Z)},
        {"singlet XX", oc::singlet_both(Basis::X, Basis::X)},
        {"|+> measured in Z", oc::bb84_measured(0, Basis::X, Basis::Z)},
        {"mismatched bases", oc::mismatched_bases()},
        {"intercept-resend position", oc::intercept_resend_position(1.0)},
        {"block intercept n=2", oc::block_intercept_resend_n2()},
        {"singlet simulation n=2 Z", oc::singlet_simulation_n2(0, Basis::Z)},
        {"singlet simulation n=2 X", oc::singlet_simulation_n2(1, Basis::X)},
        {"kept half after partner", kept_half_z},
    };
    bool ok = true;
    double worst = 0.0;
    std::string worst_case;
    std::uint64_t seed = 600;
    const std::size_t trials = 100000;
    for (const auto& c : cases) {
        const auto exact = bb::enumerate_outcomes(c.circuit);
        bb::CountingRng rng(seed++);
        const auto samples = bb::sample_circuit(c.circuit, {&rng, bb::Party::shared, bb::Stage::channel}, trials);
        const auto check = bb::testing::compare_frequencies(exact, samples);
        ok = ok && check.ok;
        if (check.worst_z > worst) {
            worst = check.worst_z;
            worst_case = c.name;
        }
        if (c.name == "intercept-resend position") {
            const auto abe = oc::sifted_abe(bb::empirical_joint(exact.names(), samples));
            const double i_ea = bb::mutual_information(abe, "E", "A");
            ok = ok && std::abs(i_ea - 0.5) <= 0.02;
        }
    }
    verdict("criterion 6 (Monte Carlo vs exact oracle, 1e5 trials, 5 sigma)", ok,
            std::to_string(cases.size()) + " circuits, largest deviation " + fmt("%.2f", worst) + " sigma (" +
                worst_case + ")");
}

// 7. Cascade + Toeplitz at 5% channel noise.
void criterion_7() {
    const auto t0 = Clock::now();
    std::size_t clean = 0, length_ok = 0, sifted_min = SIZE_MAX, sifted_max = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        bb::ProtocolConfig cfg{10, 2000, bb::Mode::per_block, 0.05, 0.2, 7000 + t};
        bb::CountingRng rng(cfg.seed);
        const auto session = bb::run_session(cfg, {}, rng);
        sifted_min = std::min(sifted_min, session.sifted_bits);
        sifted_max = std::max(sifted_max, session.sifted_bits);
        bb::PipelineParams params;
        params.attack_configured = false;
        const auto r = bb::pipeline(session, rates_of(session), rng, params);
        if (r.reconciled()) ++clean;
        if (r.reconciliation && !r.final_key.empty() &&
            r.final_key.size() == session.sifted_bits - session.disclosed_indices.size() -
                                      r.reconciliation->disclosed - params.safety_margin &&
            r.final_key == r.bob_final_key)
            ++length_ok;
    }
    verdict("criterion 7 (post-processing soundness)", clean >= 99 && length_ok == clean,
            std::to_string(clean) + "/100 zero-residual, " + std::to_string(length_ok) +
                " with final length = sifted - sampled - cascade parities - 32; sifted " +
                std::to_string(sifted_min) + ".." + std::to_string(sifted_max) + " bits; " +
                fmt("%.2f s", seconds_since(t0)));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 8. Byte-identical reruns.
void criterion_8() {
    std::istringstream text(R"(
[protocol]
block_size = 2, 4, 8
num_blocks = 500
channel_flip_prob = 0, 0.04
[attack]
type = intercept_resend
fraction = 0.15
granularity = per_block
[sweep]
repetitions = 2
)");
    bb::ExperimentConfig cfg = bb::parse_config(text);
    const fs::path root = fs::temp_directory_path() / "blockbb84_acceptance";
    fs::remove_all(root);
    std::ostringstream log;
    std::vector<fs::path> dirs;
    for (std::size_t jobs : {1u, 1u, 3u}) {
        dirs.push_back(root / ("run" + std::to_string(dirs.size())));
        cfg.output_dir = dirs.back().string();
        cfg.jobs = jobs;
        bb::run_experiment(cfg, log);
    }
    std::size_t files = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
        ++files;
        const auto name = entry.path().filename();
        const std::string ref = slurp(entry.path());
        identical += ref == slurp(dirs[1] / name) && ref == slurp(dirs[2] / name);
    }
    verdict("criterion 8 (determinism)", files == 13 && identical == files,
            std::to_string(identical) + "/" + std::to_string(files) +
                " output files byte-identical across three runs (one multi-threaded)");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion line(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
