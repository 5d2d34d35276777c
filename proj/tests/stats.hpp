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

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "blockbb84/infotheory.hpp"

namespace blockbb84::testing {

/// |successes/trials - p| within `sigmas` binomial standard deviations.
/// A probability of exactly 0 or 1 demands an exact count.
inline bool within_binomial(std::size_t successes, std::size_t trials, double p, double sigmas = 5.0) {
    const double n = static_cast<double>(trials);
    const double freq = static_cast<double>(successes) / n;
    if (p <= 1e-12) return successes == 0;
    if (p >= 1.0 - 1e-12) return successes == trials;
    return std::abs(freq - p) <= sigmas * std::sqrt(p * (1.0 - p) / n);
}

struct FrequencyCheck {
    bool ok = true;
    std::string worst;
    double worst_z = 0.0;
};

/// Every outcome's sampled frequency against the exact distribution.
inline FrequencyCheck compare_frequencies(const JointDistribution& exact, const std::vector<Outcome>& samples,
                                          double sigmas = 5.0) {
    std::map<Outcome, std::size_t> counts;
    for (const auto& s : samples) ++counts[s];
    FrequencyCheck out;
    const double n = static_cast<double>(samples.size());
    auto describe = [](const Outcome& o) {
        std::string s = "(";
        for (std::size_t i = 0; i < o.size(); ++i) s += (i ? "," : "") + std::to_string(o[i]);
        return s + ")";
    };
    for (const auto& [o, c] : counts)
        if (exact.probability(o) <= 1e-12) {
            out.ok = false;
            out.worst = "impossible outcome " + describe(o) + " sampled";
            out.worst_z = INFINITY;
        }
    for (const auto& [o, p] : exact.table()) {
        const std::size_t c = counts.count(o) ? counts.at(o) : 0;
        if (!within_binomial(c, samples.size(), p, sigmas)) out.ok = false;
        if (p > 1e-12 && p < 1.0 - 1e-12) {
            const double z = std::abs(static_cast<double>(c) / n - p) / std::sqrt(p * (1.0 - p) / n);
            if (z > out.worst_z) {
                out.worst_z = z;
                out.worst = describe(o);
            }
        }
    }
    return out;
}

}  // namespace blockbb84::testing
