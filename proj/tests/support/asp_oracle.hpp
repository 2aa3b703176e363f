#pragma once

// Independent stable-model checker used as the ground truth in solver tests.
// Deliberately coded apart from the engine: string atoms, set-based models,
// reduct built by filtering, closure by repeated scans. Only correct for
// small ground programs; that is all the tests need.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "agora/asp.hpp"

namespace oracle {

struct Rule {
    std::string head;
    std::vector<std::string> pos;
    std::vector<std::string> neg;
};

using Model = std::set<std::string>;

inline std::vector<Model> stable_models(const std::vector<Rule>& rules) {
    std::set<std::string> atom_set;
    for (const auto& r : rules) {
        atom_set.insert(r.head);
        atom_set.insert(r.pos.begin(), r.pos.end());
        atom_set.insert(r.neg.begin(), r.neg.end());
    }
    std::vector<std::string> atoms(atom_set.begin(), atom_set.end());

    std::vector<Model> found;
    const std::uint64_t total = 1ull << atoms.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Model candidate;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (mask & (1ull << i)) candidate.insert(atoms[i]);

        // Gelfond-Lifschitz reduct with respect to the candidate: drop any
        // rule whose negative body meets the candidate, strip negation from
        // the rest.
        std::vector<std::pair<std::string, std::vector<std::string>>> reduct;
        for (const auto& r : rules) {
            bool blocked = std::any_of(r.neg.begin(), r.neg.end(),
                                       [&](const std::string& a) { return candidate.count(a) > 0; });
            if (!blocked) reduct.emplace_back(r.head, r.pos);
        }

        // Least model of the positive reduct.
        Model closure;
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& [head, body] : reduct) {
                if (closure.count(head)) continue;
                bool satisfied = std::all_of(body.begin(), body.end(),
                                             [&](const std::string& a) { return closure.count(a) > 0; });
                if (satisfied) {
                    closure.insert(head);
                    grew = true;
                }
            }
        }
        if (closure == candidate) found.push_back(std::move(candidate));
    }
    return found;
}

inline Rule from_engine_rule(const agora::asp::Rule& r) {
    Rule out;
    out.head = r.head.to_string();
    for (const auto& a : r.positive_body) out.pos.push_back(a.to_string());
    for (const auto& a : r.negative_body) out.neg.push_back(a.to_string());
    return out;
}

inline std::vector<Model> stable_models_of(const agora::asp::Program& program) {
    std::vector<Rule> rules;
    rules.reserve(program.rules.size());
    for (const auto& r : program.rules) rules.push_back(from_engine_rule(r));
    return stable_models(rules);
}

// Canonical comparison form for engine output.
inline std::vector<Model> as_models(const agora::asp::StableModelSet& set) {
    std::vector<Model> out;
    for (const auto& m : set.models) {
        Model model;
        for (const auto& atom : m) model.insert(atom.to_string());
        out.push_back(std::move(model));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Model> sorted(std::vector<Model> models) {
    std::sort(models.begin(), models.end());
    return models;
}

} // namespace oracle
