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

// Small classical-quantum circuits: preparations, unitaries, basis
// measurements and classical coins, with optional classical control.
// enumerate_outcomes() is the exact oracle: it branches on every coin and
// measurement and returns the full joint distribution of recorded variables.
// sample_circuit() runs the same circuit once with Born-rule sampling.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "blockbb84/infotheory.hpp"
#include "blockbb84/quantum.hpp"
#include "blockbb84/randomness.hpp"

namespace blockbb84 {

/// A bit known when the circuit is built, or read from an earlier variable.
using BitArg = std::variant<int, std::string>;

struct Condition {
    std::string var;
    int equals = 1;
};

/// All conditions must hold; empty means unconditional.
using Conditions = std::vector<Condition>;

namespace ops {
struct Coin {
    std::string var;
    double p_one = 0.5;
};
struct PrepareBB84 {
    BitArg bit;
    BitArg basis;
};
struct PrepareSinglet {};
struct PrepareZero {
    std::size_t count = 1;
};
struct Apply {
    Unitary u;
    std::vector<std::size_t> targets;
    Conditions when;
};
/// A skipped measurement (condition false) records -1.
struct Measure {
    std::string var;
    std::size_t qubit;
    BitArg basis;
    Conditions when;
};
}  // namespace ops

using CircuitOp = std::variant<ops::Coin, ops::PrepareBB84, ops::PrepareSinglet, ops::PrepareZero,
                               ops::Apply, ops::Measure>;

class Circuit {
public:
    Circuit& coin(std::string var, double p_one = 0.5) {
        declare(var);
        ops_.push_back(ops::Coin{std::move(var), p_one});
        return *this;
    }
    Circuit& prepare_bb84(BitArg bit, BitArg basis) {
        qubits_ += 1;
        ops_.push_back(ops::PrepareBB84{std::move(bit), std::move(basis)});
        return *this;
    }
    Circuit& prepare_singlet() {
        qubits_ += 2;
        ops_.push_back(ops::PrepareSinglet{});
        return *this;
    }
    Circuit& prepare_zero(std::size_t count = 1) {
        qubits_ += count;
        ops_.push_back(ops::PrepareZero{count});
        return *this;
    }
    Circuit& apply(Unitary u, std::vector<std::size_t> targets, Conditions when = {}) {
        ops_.push_back(ops::Apply{std::move(u), std::move(targets), std::move(when)});
        return *this;
    }
    Circuit& measure(std::string var, std::size_t qubit, BitArg basis, Conditions when = {}) {
        declare(var);
        ops_.push_back(ops::Measure{std::move(var), qubit, std::move(basis), std::move(when)});
        return *this;
    }

    const std::vector<CircuitOp>& operations() const { return ops_; }
    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t num_qubits() const { return qubits_; }

private:
    void declare(const std::string& var) {
        if (std::find(vars_.begin(), vars_.end(), var) != vars_.end())
            throw std::invalid_argument("variable '" + var + "' recorded twice");
        vars_.push_back(var);
    }

    std::vector<CircuitOp> ops_;
    std::vector<std::string> vars_;
    std::size_t qubits_ = 0;
};

namespace detail {

struct CircuitRun {
    const Circuit& circuit;
    std::optional<StateVector> state;
    std::map<std::string, int> values;

    int resolve(const BitArg& arg) const {
        if (const int* v = std::get_if<int>(&arg)) return *v;
        const auto& name = std::get<std::string>(arg);
        auto it = values.find(name);
        if (it == values.end()) throw std::invalid_argument("variable '" + name + "' read before it is set");
        return it->second;
    }
    bool active(const Conditions& when) const {
        return std::all_of(when.begin(), when.end(),
                           [this](const Condition& c) { return resolve(c.var) == c.equals; });
    }
    void append(const StateVector& s) { state = state ? state->tensor(s) : s; }
    void apply(const ops::Apply& op) {
        if (!active(op.when)) return;
        if (!state) throw std::invalid_argument("unitary applied to an empty register");
        state = apply_unitary(*state, op.u, op.targets);
    }
    void prepare(const CircuitOp& op) {
        if (const auto* p = std::get_if<ops::PrepareBB84>(&op))
            append(prepare_bb84(static_cast<Bit>(resolve(p->bit)), basis_from_bit(static_cast<Bit>(resolve(p->basis)))));
        else if (std::holds_alternative<ops::PrepareSinglet>(op))
            append(prepare_singlet());
        else if (const auto* z = std::get_if<ops::PrepareZero>(&op))
            append(StateVector::zeros(z->count));
    }
    Outcome outcome() const {
        Outcome o;
        for (const auto& v : circuit.variables()) o.push_back(values.at(v));
        return o;
    }
};

inline void check_circuit_size(const Circuit& c) {
    if (c.num_qubits() > kMaxQubits)
        throw std::invalid_argument("circuit register of " + std::to_string(c.num_qubits()) +
                                    " qubits exceeds the 12-qubit cap");
}

inline void enumerate_from(CircuitRun run, std::size_t pc, double weight, std::map<Outcome, double>& out) {
    const auto& ops_list = run.circuit.operations();
    for (; pc < ops_list.size(); ++pc) {
        const auto& op = ops_list[pc];
        if (const auto* c = std::get_if<ops::Coin>(&op)) {
            for (int v : {0, 1}) {
                const double p = v ? c->p_one : 1.0 - c->p_one;
                if (p <= 0.0) continue;
                CircuitRun branch = run;
                branch.values[c->var] = v;
                enumerate_from(std::move(branch), pc + 1, weight * p, out);
            }
            return;
        }
        if (const auto* m = std::get_if<ops::Measure>(&op)) {
            if (!run.active(m->when)) {
                run.values[m->var] = -1;
                continue;
            }
            if (!run.state) throw std::invalid_argument("measurement on an empty register");
            const Basis basis = basis_from_bit(static_cast<Bit>(run.resolve(m->basis)));
            for (Bit v : {Bit{0}, Bit{1}}) {
                auto proj = project(*run.state, m->qubit, basis, v);
                if (!proj.post) continue;
                CircuitRun branch = run;
                branch.state = std::move(proj.post);
                branch.values[m->var] = v;
                enumerate_from(std::move(branch), pc + 1, weight * proj.probability, out);
            }
            return;
        }
        if (const auto* a = std::get_if<ops::Apply>(&op))
            run.apply(*a);
        else
            run.prepare(op);
    }
    out[run.outcome()] += weight;
}

}  // namespace detail

/// Exact joint distribution of every recorded variable, in declaration order.
inline JointDistribution enumerate_outcomes(const Circuit& circuit) {
    detail::check_circuit_size(circuit);
    std::map<Outcome, double> table;
    detail::enumerate_from(detail::CircuitRun{circuit, std::nullopt, {}}, 0, 1.0, table);
    return JointDistribution(circuit.variables(), std::move(table));
}

/// One sampled execution; coins and measurements draw from `source`.
inline Outcome sample_circuit(const Circuit& circuit, const RandomSource& source) {
    detail::check_circuit_size(circuit);
    detail::CircuitRun run{circuit, std::nullopt, {}};
    for (const auto& op : circuit.operations()) {
        if (const auto* c = std::get_if<ops::Coin>(&op)) {
            run.values[c->var] = source.bernoulli(c->p_one) ? 1 : 0;
        } else if (const auto* m = std::get_if<ops::Measure>(&op)) {
            if (!run.active(m->when)) {
                run.values[m->var] = -1;
                continue;
            }
            if (!run.state) throw std::invalid_argument("measurement on an empty register");
            auto r = measure(*run.state, m->qubit, basis_from_bit(static_cast<Bit>(run.resolve(m->basis))), source);
            run.state = std::move(r.post);
            run.values[m->var] = r.outcome;
        } else if (const auto* a = std::get_if<ops::Apply>(&op)) {
            run.apply(*a);
        } else {
            run.prepare(op);
        }
    }
    return run.outcome();
}

inline std::vector<Outcome> sample_circuit(const Circuit& circuit, const RandomSource& source,
                                           std::size_t trials) {
    std::vector<Outcome> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) out.push_back(sample_circuit(circuit, source));
    return out;
}

}  // namespace blockbb84
