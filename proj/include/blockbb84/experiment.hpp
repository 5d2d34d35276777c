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

// Experiment runner behind the bb84blk tool: config files, sweeps, CSV and
// JSON reports, and the reduction-verification corpus.

#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blockbb84/attacks.hpp"
#include "blockbb84/postprocess.hpp"
#include "blockbb84/protocol.hpp"
#include "blockbb84/randomness.hpp"

namespace blockbb84 {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

/// Invalid configuration or request; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, end);
}

struct ExperimentConfig {
    Mode mode = Mode::per_block;
    std::vector<std::size_t> block_sizes{4};
    std::size_t num_blocks = 100;
    std::vector<double> flip_probs{0.0};
    double sample_fraction = 0.2;
    std::uint64_t seed = 1;

    AttackKind attack = AttackKind::none;
    std::vector<double> attack_fractions{1.0};
    Granularity granularity = Granularity::per_qubit;
    std::string unitary_file;
    bool delayed = true;

    std::size_t safety_margin = 32;
    CascadeParams cascade;

    std::size_t repetitions = 1;
    std::size_t jobs = 1;

    std::string output_dir = "out";
    std::string csv_name = "results.csv";
    bool write_json = true;
    bool timing = false;

    void validate() const {
        if (block_sizes.empty() || flip_probs.empty() || attack_fractions.empty())
            throw ConfigError("sweep lists must be nonempty");
        if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
        if (jobs < 1) throw ConfigError("jobs must be >= 1");
        for (auto n : block_sizes) {
            ProtocolConfig pc{n, num_blocks, mode, 0.0, sample_fraction, seed};
            try {
                pc.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        for (double c : flip_probs)
            if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("channel_flip_prob must lie in [0,1]");
        for (double p : attack_fractions)
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("attack fraction must lie in [0,1]");
        if (attack == AttackKind::unitary_block) {
            if (unitary_file.empty()) throw ConfigError("unitary_block attack needs attack.unitary_file");
            std::ifstream probe(unitary_file);
            if (!probe) throw ConfigError("cannot read unitary_file '" + unitary_file + "'");
        }
        if (cascade.passes < 1) throw ConfigError("cascade_passes must be >= 1");
        if (!(cascade.block_factor > 0.0)) throw ConfigError("cascade_block_factor must be positive");
        if (output_dir.empty()) throw ConfigError("output directory must be set");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty element in list '" + v + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) throw ConfigError("bad value '" + v + "' for " + key);
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean '" + v + "' for " + key);
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    for (const auto& item : split_list(v)) out.push_back(parse_number<T>(key, item));
    return out;
}

}  // namespace detail

/// Flag name for a config key: "protocol.block_size" -> "block-size".
/// attack.type, attack.fraction and output.directory map to --attack,
/// --attack-fraction and --output.
inline const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"protocol.mode", "mode"},
        {"protocol.block_size", "block-size"},
        {"protocol.num_blocks", "num-blocks"},
        {"protocol.channel_flip_prob", "channel-flip-prob"},
        {"protocol.sample_fraction", "sample-fraction"},
        {"protocol.seed", "seed"},
        {"attack.type", "attack"},
        {"attack.fraction", "attack-fraction"},
        {"attack.granularity", "granularity"},
        {"attack.unitary_file", "unitary-file"},
        {"attack.delayed", "delayed"},
        {"postprocess.safety_margin", "safety-margin"},
        {"postprocess.cascade_passes", "cascade-passes"},
        {"postprocess.cascade_block_factor", "cascade-block-factor"},
        {"sweep.repetitions", "repetitions"},
        {"sweep.jobs", "jobs"},
        {"output.directory", "output"},
        {"output.csv", "csv"},
        {"output.json", "json"},
        {"output.timing", "timing"},
    };
    return keys;
}

inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& v) {
    using namespace detail;
    try {
        if (key == "protocol.mode") c.mode = mode_from_string(v);
        else if (key == "protocol.block_size") c.block_sizes = parse_list<std::size_t>(key, v);
        else if (key == "protocol.num_blocks") c.num_blocks = parse_number<std::size_t>(key, v);
        else if (key == "protocol.channel_flip_prob") c.flip_probs = parse_list<double>(key, v);
        else if (key == "protocol.sample_fraction") c.sample_fraction = parse_number<double>(key, v);
        else if (key == "protocol.seed") c.seed = parse_number<std::uint64_t>(key, v);
        else if (key == "attack.type") c.attack = attack_kind_from_string(v);
        else if (key == "attack.fraction") c.attack_fractions = parse_list<double>(key, v);
        else if (key == "attack.granularity") c.granularity = granularity_from_string(v);
        else if (key == "attack.unitary_file") c.unitary_file = v;
        else if (key == "attack.delayed") c.delayed = parse_bool(key, v);
        else if (key == "postprocess.safety_margin") c.safety_margin = parse_number<std::size_t>(key, v);
        else if (key == "postprocess.cascade_passes") c.cascade.passes = parse_number<std::size_t>(key, v);
        else if (key == "postprocess.cascade_block_factor") c.cascade.block_factor = parse_number<double>(key, v);
        else if (key == "sweep.repetitions") c.repetitions = parse_number<std::size_t>(key, v);
        else if (key == "sweep.jobs") c.jobs = parse_number<std::size_t>(key, v);
        else if (key == "output.directory") c.output_dir = v;
        else if (key == "output.csv") c.csv_name = v;
        else if (key == "output.json") c.write_json = parse_bool(key, v);
        else if (key == "output.timing") c.timing = parse_bool(key, v);
        else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

/// `[section]` headers and `key = value` lines; '#' and ';' start comments.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        std::string s = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        set_config_value(base, section + "." + detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }
    return base;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in);
}

struct SweepPoint {
    std::size_t index = 0;
    std::size_t repetition = 0;
    ProtocolConfig protocol;
    BlockAttackSpec attack;
    double attack_fraction = 0.0;
};

/// Cartesian product n x flip x attack fraction x repetition, in that
/// nesting order. Point i runs with seed + i.
inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::optional<Unitary> u;
    if (cfg.attack == AttackKind::unitary_block) {
        try {
            u = read_unitary_file(cfg.unitary_file);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    const std::vector<double> fractions =
        cfg.attack == AttackKind::intercept_resend ? cfg.attack_fractions : std::vector<double>{0.0};
    std::vector<SweepPoint> out;
    for (auto n : cfg.block_sizes)
        for (double c : cfg.flip_probs)
            for (double p : fractions)
                for (std::size_t r = 0; r < cfg.repetitions; ++r) {
                    SweepPoint pt;
                    pt.index = out.size();
                    pt.repetition = r;
                    pt.protocol = ProtocolConfig{n, cfg.num_blocks, cfg.mode, c, cfg.sample_fraction,
                                                 cfg.seed + pt.index};
                    pt.attack_fraction = p;
                    try {
                        if (cfg.attack == AttackKind::intercept_resend) {
                            pt.attack = BlockAttackSpec::intercept_resend(p, cfg.granularity);
                        } else if (cfg.attack == AttackKind::unitary_block) {
                            const std::size_t k = u->num_qubits();
                            if (k < n) throw ConfigError("unitary has fewer qubits than block_size " + std::to_string(n));
                            pt.attack = BlockAttackSpec::unitary_block(*u, n, k - n, cfg.delayed);
                        }
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError(e.what());
                    }
                    out.push_back(std::move(pt));
                }
    return out;
}

struct PointResult {
    SweepPoint point;
    SessionReport session;
    RateReport rates;
    PipelineResult pipeline;
    ConsumptionReport consumption;
    double session_seconds = 0.0;
    std::string status;
};

inline PointResult run_point(const SweepPoint& pt, const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    PointResult res;
    res.point = pt;
    CountingRng rng(pt.protocol.seed);
    const auto t0 = clock::now();
    res.session = run_session(pt.protocol, pt.attack, rng);
    res.session_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.session.records.clear();
    if (res.session.sifted_bits == 0) {
        res.status = "no_sifted_key";
        res.pipeline.ledger = rng.ledger();
    } else {
        res.rates = information_rates(res.session);
        PipelineParams params{cfg.safety_margin, cfg.cascade, pt.attack.kind != AttackKind::none};
        res.pipeline = pipeline(res.session, res.rates, rng, params);
        res.status = std::string(to_string(res.pipeline.status));
    }
    res.consumption = make_consumption_report(res.pipeline.ledger, res.session.raw_qubits);
    return res;
}

inline std::vector<std::string> csv_header() {
    std::vector<std::string> h = {"point", "repetition", "mode", "n", "num_blocks", "seed", "attack",
                                  "attack_fraction", "granularity", "flip_prob", "raw_qubits", "kept_units",
                                  "sifted_bits", "qber_true", "qber_estimated", "i_ab", "i_ea", "i_eb", "ck_rate",
                                  "distillable", "status", "sampling_disclosed", "cascade_disclosed",
                                  "residual_mismatches", "final_key_len"};
    for (Stage s : kAllStages) h.push_back("ledger_" + std::string(to_string(s)));
    h.push_back("quantum_phase_alice");
    h.push_back("quantum_phase_bob");
    return h;
}

inline std::vector<std::string> csv_row(const PointResult& r) {
    const auto& pc = r.point.protocol;
    const auto& rec = r.pipeline.reconciliation;
    std::vector<std::string> row = {
        std::to_string(r.point.index),
        std::to_string(r.point.repetition),
        std::string(to_string(pc.mode)),
        std::to_string(pc.block_size),
        std::to_string(pc.num_blocks),
        std::to_string(pc.seed),
        std::string(to_string(r.point.attack.kind)),
        format_double(r.point.attack_fraction),
        std::string(to_string(r.point.attack.granularity)),
        format_double(pc.channel_flip_prob),
        std::to_string(r.session.raw_qubits),
        std::to_string(r.session.kept_units),
        std::to_string(r.session.sifted_bits),
        format_double(r.session.qber_true),
        format_double(r.session.qber_estimated),
        format_double(r.rates.i_ab),
        format_double(r.rates.i_ea),
        format_double(r.rates.i_eb),
        format_double(r.rates.ck_rate),
        r.rates.distillable ? "true" : "false",
        r.status,
        std::to_string(r.session.disclosed_indices.size()),
        rec ? std::to_string(rec->disclosed) : "0",
        rec ? std::to_string(rec->residual_mismatches) : "0",
        std::to_string(r.pipeline.final_key.size()),
    };
    for (Stage s : kAllStages) row.push_back(std::to_string(r.consumption.stage(s)));
    row.push_back(std::to_string(r.consumption.quantum_phase_alice()));
    row.push_back(std::to_string(r.consumption.quantum_phase_bob()));
    return row;
}

inline void write_csv_line(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
}

inline std::string bits_to_hex(const Bits& bits) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned v = 0;
        for (std::size_t j = 0; j < 4; ++j) v = (v << 1) | (i + j < bits.size() ? bits[i + j] : 0u);
        out.push_back(digits[v]);
    }
    return out;
}

inline nlohmann::ordered_json ledger_json(const RandomnessLedger& ledger) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& [key, bits] : ledger.entries())
        entries.push_back({{"party", to_string(key.first)}, {"stage", to_string(key.second)}, {"bits", bits}});
    nlohmann::ordered_json per_stage = nlohmann::ordered_json::object();
    for (Stage s : kAllStages) per_stage[std::string(to_string(s))] = ledger.stage_total(s);
    return {{"entries", entries}, {"per_stage", per_stage}, {"total", ledger.total()}};
}

/// Session report; top-level keys config, results, ledger, versions.
inline nlohmann::ordered_json session_json(const PointResult& r, const ExperimentConfig& cfg) {
    using nlohmann::ordered_json;
    const auto& pc = r.point.protocol;
    ordered_json attack = {{"type", to_string(r.point.attack.kind)}};
    if (r.point.attack.kind == AttackKind::intercept_resend) {
        attack["fraction"] = r.point.attack_fraction;
        attack["granularity"] = to_string(r.point.attack.granularity);
    } else if (r.point.attack.kind == AttackKind::unitary_block) {
        attack["unitary_file"] = cfg.unitary_file;
        attack["ancillas"] = r.point.attack.ancillas;
        attack["delayed"] = r.point.attack.delayed;
    }
    ordered_json config = {
        {"point", r.point.index},
        {"repetition", r.point.repetition},
        {"mode", to_string(pc.mode)},
        {"block_size", pc.block_size},
        {"num_blocks", pc.num_blocks},
        {"channel_flip_prob", pc.channel_flip_prob},
        {"sample_fraction", pc.sample_fraction},
        {"seed", pc.seed},
        {"attack", attack},
        {"safety_margin", cfg.safety_margin},
        {"cascade", {{"passes", cfg.cascade.passes}, {"block_factor", cfg.cascade.block_factor}}},
    };
    ordered_json results = {
        {"status", r.status},
        {"raw_qubits", r.session.raw_qubits},
        {"kept_units", r.session.kept_units},
        {"sifted_bits", r.session.sifted_bits},
        {"qber_true", r.session.qber_true},
        {"qber_estimated", r.session.qber_estimated},
        {"sampling_disclosed", r.session.disclosed_indices.size()},
        {"i_ab", r.rates.i_ab},
        {"i_ea", r.rates.i_ea},
        {"i_eb", r.rates.i_eb},
        {"ck_rate", r.rates.ck_rate},
        {"distillable", r.rates.distillable},
        {"eve_info_bits", r.pipeline.eve_info_bits},
    };
    if (const auto& rec = r.pipeline.reconciliation)
        results["cascade"] = {{"disclosed", rec->disclosed},
                              {"passes", rec->passes},
                              {"first_block_length", rec->first_block_length},
                              {"residual_mismatches", rec->residual_mismatches}};
    else
        results["cascade"] = nullptr;
    if (const auto& amp = r.pipeline.amplification)
        results["amplification"] = {{"input_length", amp->input_length},
                                    {"output_length", amp->output_length},
                                    {"seed_bits", amp->seed_bits}};
    else
        results["amplification"] = nullptr;
    results["final_key_len"] = r.pipeline.final_key.size();
    results["final_key_hex"] = bits_to_hex(r.pipeline.final_key);
    results["consumption"] = {{"quantum_phase_alice", r.consumption.quantum_phase_alice()},
                              {"quantum_phase_bob", r.consumption.quantum_phase_bob()},
                              {"quantum_phase_total", r.consumption.quantum_phase_total()}};
    if (cfg.timing)
        results["timing_seconds"] = {{"session", r.session_seconds},
                                     {"reconciliation", r.pipeline.timings.reconciliation_seconds},
                                     {"amplification", r.pipeline.timings.amplification_seconds}};
    return {{"config", config},
            {"results", results},
            {"ledger", ledger_json(r.pipeline.ledger)},
            {"versions", {{"blockbb84", kVersion}, {"report_schema", kReportSchema}}}};
}

inline std::string session_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "session_%04zu.json", index);
    return buf;
}

/// Runs every sweep point (optionally on cfg.jobs threads) and writes the
/// CSV plus one JSON per session. Row order is sweep order.
inline std::vector<PointResult> run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    const std::vector<SweepPoint> points = expand_sweep(cfg);
    std::vector<PointResult> results(points.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                results[i] = run_point(points[i], cfg);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (first_error.empty()) first_error = "point " + std::to_string(i) + ": " + e.what();
            }
        }
    };
    const std::size_t threads = std::min(cfg.jobs, points.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path csv_path = fs::path(cfg.output_dir) / cfg.csv_name;
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    write_csv_line(csv, csv_header());
    for (const auto& r : results) write_csv_line(csv, csv_row(r));
    if (cfg.write_json)
        for (const auto& r : results) {
            const fs::path p = fs::path(cfg.output_dir) / session_file_name(r.point.index);
            std::ofstream js(p, std::ios::binary);
            if (!js) throw std::runtime_error("cannot write " + p.string());
            js << session_json(r, cfg).dump(2) << '\n';
        }
    log << "wrote " << results.size() << " rows to " << csv_path.string() << '\n';
    return results;
}

/// Human-readable summary of a session report.
inline void print_report(const nlohmann::ordered_json& j, std::ostream& out) {
    for (const char* key : {"config", "results", "ledger", "versions"})
        if (!j.contains(key)) throw std::runtime_error(std::string("report lacks top-level key '") + key + "'");
    const auto& c = j["config"];
    const auto& r = j["results"];
    out << "session " << c.value("point", 0) << " (seed " << c.value("seed", 0) << ")\n";
    out << "  mode " << c.value("mode", "?") << ", n = " << c.value("block_size", 0) << ", blocks = "
        << c.value("num_blocks", 0) << ", channel flip " << c.value("channel_flip_prob", 0.0) << '\n';
    out << "  attack " << c["attack"].value("type", "?") << '\n';
    out << "results\n";
    for (const auto& [k, v] : r.items()) {
        if (v.is_object()) {
            out << "  " << k << ":\n";
            for (const auto& [k2, v2] : v.items()) out << "    " << std::left << std::setw(22) << k2 << v2.dump() << '\n';
        } else if (k != "final_key_hex") {
            out << "  " << std::left << std::setw(24) << k << v.dump() << '\n';
        }
    }
    out << "ledger (bits drawn)\n";
    for (const auto& e : j["ledger"]["entries"])
        out << "  " << std::left << std::setw(8) << e["party"].get<std::string>() << std::setw(18)
            << e["stage"].get<std::string>() << e["bits"].get<std::uint64_t>() << '\n';
    out << "  total " << j["ledger"]["total"].get<std::uint64_t>() << '\n';
}

struct VerifyOptions {
    std::vector<std::size_t> ns{2, 3};
    std::vector<std::size_t> ms{0, 1, 2};
    std::size_t random_count = 20;
    std::uint64_t seed = 20050301;
    std::string unitary_file;
    std::size_t unitary_block = 2;
    std::size_t alice_slot = 0;
};

inline void check_verify_options(const VerifyOptions& o) {
    if (o.ns.empty() || o.ms.empty()) throw ConfigError("verify: n and m lists must be nonempty");
    for (auto n : o.ns) {
        if (n < 2 || n > 3) throw ConfigError("verify: n = " + std::to_string(n) + " outside {2, 3}");
        if (o.alice_slot >= n) throw ConfigError("verify: alice slot outside the block");
        for (auto m : o.ms)
            if (n + m > 8) throw ConfigError("verify: n + m must be <= 8");
    }
    if (!o.unitary_file.empty() && (o.unitary_block < 2 || o.unitary_block > 3))
        throw ConfigError("verify: --unitary-block must be 2 or 3");
}

/// Runs the reduction corpus. Returns true iff every case passes.
inline bool run_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    check_verify_options(o);
    std::vector<ReductionCase> corpus = reduction_corpus(o.ns, o.ms, o.random_count, o.seed);
    if (!o.unitary_file.empty()) {
        Eigen::MatrixXcd m;
        try {
            std::ifstream in(o.unitary_file);
            if (!in) throw std::runtime_error("cannot open '" + o.unitary_file + "'");
            m = parse_matrix(in);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("verify: ") + e.what());
        }
        const auto d = static_cast<std::size_t>(m.rows());
        if (!std::has_single_bit(d) || std::countr_zero(d) < static_cast<int>(o.unitary_block) ||
            std::countr_zero(d) > 8)
            throw ConfigError("verify: matrix dimension incompatible with --unitary-block");
        const std::size_t k = static_cast<std::size_t>(std::countr_zero(d));
        corpus.push_back({"file " + o.unitary_file, o.unitary_block, k - o.unitary_block, Unitary(std::move(m))});
    }
    bool all = true;
    std::size_t passed = 0;
    for (const auto& c : corpus) {
        try {
            const EquivalenceReport rep = verify_reduction(c.u, c.n, c.m, uniform_alice_inputs(), o.alice_slot);
            out << (rep.passed ? "PASS " : "FAIL ") << c.name << "  max deviation " << std::scientific
                << std::setprecision(3) << rep.max_deviation << std::defaultfloat << '\n';
            all = all && rep.passed;
            passed += rep.passed ? 1 : 0;
        } catch (const std::invalid_argument& e) {
            err << "FAIL " << c.name << ": " << e.what() << '\n';
            out << "FAIL " << c.name << "  rejected: " << e.what() << '\n';
            all = false;
        }
    }
    out << passed << "/" << corpus.size() << " cases within 1e-9\n";
    return all;
}

}  // namespace blockbb84
