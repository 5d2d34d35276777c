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

// Entropies and mutual information over discrete joint distributions, in bits.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockbb84 {

using Outcome = std::vector<int>;

class JointDistribution {
public:
    JointDistribution(std::vector<std::string> names, std::map<Outcome, double> table)
        : names_(std::move(names)), table_(std::move(table)) {
        double sum = 0.0;
        for (const auto& [outcome, p] : table_) {
            if (outcome.size() != names_.size())
                throw std::invalid_argument("outcome tuple arity does not match variable count");
            if (!(p >= 0.0)) throw std::invalid_argument("negative probability in joint distribution");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("joint distribution does not sum to 1 (" + std::to_string(sum) + ")");
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::map<Outcome, double>& table() const { return table_; }

    std::size_t index_of(const std::string& name) const {
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) throw std::invalid_argument("unknown variable '" + name + "'");
        return static_cast<std::size_t>(it - names_.begin());
    }

    double probability(const Outcome& outcome) const {
        auto it = table_.find(outcome);
        return it == table_.end() ? 0.0 : it->second;
    }

    std::set<int> alphabet(const std::string& name) const {
        const auto i = index_of(name);
        std::set<int> out;
        for (const auto& [outcome, p] : table_) out.insert(outcome[i]);
        return out;
    }

    JointDistribution marginal(const std::vector<std::string>& keep) const {
        std::vector<std::size_t> idx;
        for (const auto& k : keep) idx.push_back(index_of(k));
        std::map<Outcome, double> out;
        for (const auto& [outcome, p] : table_) {
            Outcome o;
            for (auto i : idx) o.push_back(outcome[i]);
            out[o] += p;
        }
        return JointDistribution(keep, std::move(out));
    }

    /// Pushes the distribution through a deterministic map of outcome tuples.
    JointDistribution transform(std::vector<std::string> new_names,
                                const std::function<Outcome(const Outcome&)>& fn) const {
        std::map<Outcome, double> out;
        for (const auto& [outcome, p] : table_) out[fn(outcome)] += p;
        return JointDistribution(std::move(new_names), std::move(out));
    }

    /// Shannon entropy of the listed variables, in bits.
    double entropy(const std::vector<std::string>& vars) const {
        double h = 0.0;
        for (const auto& [outcome, p] : marginal(vars).table_)
            if (p > 0.0) h -= p * std::log2(p);
        return h;
    }

private:
    std::vector<std::string> names_;
    std::map<Outcome, double> table_;
};

inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// I(A:B) = H(A) + H(B) - H(A,B), clamped at zero against rounding.
inline double mutual_information(const JointDistribution& joint, const std::string& a,
                                 const std::string& b) {
    joint.index_of(a);
    joint.index_of(b);
    const double i = joint.entropy({a}) + joint.entropy({b}) - joint.entropy({a, b});
    return std::max(i, 0.0);
}

/// I(A:B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at zero.
inline double conditional_mutual_information(const JointDistribution& joint, const std::string& a,
                                             const std::string& b, const std::string& given) {
    joint.index_of(a);
    joint.index_of(b);
    joint.index_of(given);
    const double i = joint.entropy({a, given}) + joint.entropy({b, given}) - joint.entropy({a, b, given}) -
                     joint.entropy({given});
    return std::max(i, 0.0);
}

struct RateReport {
    double i_ab = 0.0;
    double i_ea = 0.0;
    double i_eb = 0.0;
    double ck_rate = 0.0;
    bool distillable = false;
};

/// Csiszar-Korner: a key is distillable iff I(A:B) > min(I(E:A), I(E:B)).
inline RateReport ck_rate(double i_ab, double i_ea, double i_eb) {
    if (i_ab < 0.0 || i_ea < 0.0 || i_eb < 0.0)
        throw std::invalid_argument("ck_rate: mutual informations must be non-negative");
    RateReport r{i_ab, i_ea, i_eb, i_ab - std::min(i_ea, i_eb), false};
    r.distillable = r.ck_rate > 0.0;
    return r;
}

/// Plug-in frequency table.
inline JointDistribution empirical_joint(std::vector<std::string> names, std::span<const Outcome> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical_joint: no samples");
    std::map<Outcome, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    std::map<Outcome, double> table;
    const double n = static_cast<double>(samples.size());
    for (const auto& [outcome, c] : counts) table[outcome] = static_cast<double>(c) / n;
    return JointDistribution(std::move(names), std::move(table));
}

}  // namespace blockbb84
