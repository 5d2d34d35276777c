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

// bb84blk: run seeded sweeps, verify the block-attack reduction, print reports.
//
// Exit codes: 0 success, 1 runtime or verification failure, 2 bad
// configuration or usage.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockbb84/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadConfig = 2;

std::vector<std::size_t> parse_size_list(const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& item : blockbb84::detail::split_list(v))
        out.push_back(blockbb84::detail::parse_number<std::size_t>("list", item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-basis BB84 simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Execute a configured sweep and write CSV/JSON reports");
    std::string config_path;
    run->add_option("config", config_path, "Config file ([section] key = value)")->required();
    std::map<std::string, std::string> overrides;
    for (const auto& [key, flag] : blockbb84::config_keys())
        run->add_option("--" + flag, overrides[key], "Overrides " + key);

    auto* verify = app.add_subcommand("verify", "Check the singlet-simulation reduction on a unitary corpus");
    std::string n_list = "2,3", m_list = "0,1,2";
    blockbb84::VerifyOptions vopts;
    verify->add_option("--n", n_list, "Block sizes (comma list, each 2 or 3)");
    verify->add_option("--m", m_list, "Ancilla counts (comma list)");
    verify->add_option("--random-count", vopts.random_count, "Random unitaries per (n, m)");
    verify->add_option("--seed", vopts.seed, "Base seed of the random corpus");
    verify->add_option("--unitary-file", vopts.unitary_file, "Extra matrix file to add to the corpus");
    verify->add_option("--unitary-block", vopts.unitary_block, "Block qubits of the extra matrix (rest are ancillas)");
    verify->add_option("--alice-slot", vopts.alice_slot, "Block slot holding Alice's qubit");

    auto* report = app.add_subcommand("report", "Pretty-print a session JSON report");
    std::string report_path;
    report->add_option("file", report_path, "Session JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadConfig;
    }

    try {
        if (*run) {
            blockbb84::ExperimentConfig cfg = blockbb84::load_config(config_path);
            for (const auto& [key, value] : overrides)
                if (!value.empty()) blockbb84::set_config_value(cfg, key, value);
            blockbb84::run_experiment(cfg, std::cerr);
            return 0;
        }
        if (*verify) {
            vopts.ns = parse_size_list(n_list);
            vopts.ms = parse_size_list(m_list);
            return blockbb84::run_verify(vopts, std::cout, std::cerr) ? 0 : kExitFailure;
        }
        if (*report) {
            std::ifstream in(report_path);
            if (!in) throw blockbb84::ConfigError("cannot read report '" + report_path + "'");
            nlohmann::ordered_json j;
            try {
                j = nlohmann::ordered_json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw blockbb84::ConfigError(std::string("malformed report: ") + e.what());
            }
            blockbb84::print_report(j, std::cout);
            return 0;
        }
    } catch (const blockbb84::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitBadConfig;
}
