#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pstest/term.hpp"

namespace pstest {

// Guard expression over schema variables: equality/inequality of fragments,
// combined with && and ||. Operands name either a bound variable (substituted
// per assignment) or a literal fragment.
struct GuardNode;
using GuardPtr = std::shared_ptr<const GuardNode>;

struct GuardNode {
    enum class Op { Eq, Ne, And, Or };
    Op op;
    GuardPtr left, right;     // And/Or
    std::string lhs, rhs;     // Eq/Ne
};

inline GuardPtr guard_cmp(GuardNode::Op op, std::string lhs, std::string rhs) {
    auto n = std::make_shared<GuardNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

inline GuardPtr guard_combine(GuardNode::Op op, GuardPtr left, GuardPtr right) {
    auto n = std::make_shared<GuardNode>();
    n->op = op;
    n->left = std::move(left);
    n->right = std::move(right);
    return n;
}

inline bool eval_guard(const GuardPtr& g, const std::map<std::string, std::string>& env) {
    if (!g)
        return true;
    auto resolve = [&](const std::string& s) {
        auto it = env.find(s);
        return it == env.end() ? s : it->second;
    };
    switch (g->op) {
    case GuardNode::Op::Eq:
        return resolve(g->lhs) == resolve(g->rhs);
    case GuardNode::Op::Ne:
        return resolve(g->lhs) != resolve(g->rhs);
    case GuardNode::Op::And:
        return eval_guard(g->left, env) && eval_guard(g->right, env);
    case GuardNode::Op::Or:
        return eval_guard(g->left, env) || eval_guard(g->right, env);
    }
    return true;
}

// One symbol slot in a schema rule. Compound atoms ([a1 a2 s]) ground to the
// fragments joined with '_'; plain atoms ground to the variable's value when
// the name is bound, else stay literal.
struct SchemaAtom {
    std::vector<std::string> parts;
    std::uint32_t count = 1;
};

struct SchemaRule {
    std::string id;
    std::vector<SchemaAtom> lhs;
    std::vector<SchemaAtom> here;
    std::vector<SchemaAtom> out;
    std::map<int, std::vector<SchemaAtom>> ins;
    std::vector<SchemaAtom> promoters;
    std::vector<SchemaAtom> inhibitors;
};

struct RuleSchema {
    // Ordered (variable, domain) pairs; assignments enumerate domains in
    // declaration order, rightmost fastest.
    std::vector<std::pair<std::string, std::vector<std::string>>> params;
    GuardPtr guard;
    SchemaRule rule;
};

struct ExpansionResult {
    std::vector<EvolutionRule> rules;
    std::vector<std::string> ids; // id of every guard-satisfying assignment, pre-merge
    std::vector<std::string> warnings;
    std::size_t assignments = 0; // guard-satisfying assignments before merging
    std::size_t merged = 0;      // ground rules dropped as duplicates of earlier ones
};

namespace detail {

inline std::string ground_atom(const SchemaAtom& atom, const std::map<std::string, std::string>& env) {
    std::string s;
    for (std::size_t i = 0; i < atom.parts.size(); ++i) {
        if (i)
            s += '_';
        auto it = env.find(atom.parts[i]);
        s += it == env.end() ? atom.parts[i] : it->second;
    }
    return s;
}

inline Multiset ground_mset(const std::vector<SchemaAtom>& atoms,
                            const std::map<std::string, std::string>& env) {
    Multiset m;
    for (const auto& a : atoms)
        m.add(ground_atom(a, env), a.count);
    return m;
}

inline std::set<Symbol> ground_set(const std::vector<SchemaAtom>& atoms,
                                   const std::map<std::string, std::string>& env) {
    std::set<Symbol> s;
    for (const auto& a : atoms)
        s.insert(ground_atom(a, env));
    return s;
}

} // namespace detail

// Expands every schema into ground rules, one per guard-satisfying assignment,
// with the assignment's values suffixed onto the rule id. Ground rules that
// duplicate an earlier one's behaviour are merged away. A schema whose guard
// rejects every assignment produces a warning, not an error.
inline ExpansionResult expand_rule_schemas(const std::vector<RuleSchema>& schemas) {
    ExpansionResult res;
    for (const auto& schema : schemas) {
        std::size_t before = res.assignments;
        std::vector<std::size_t> idx(schema.params.size(), 0);
        bool done = false;
        // Odometer over the declared domains; a parameterless schema yields
        // exactly one assignment.
        while (true) {
            std::map<std::string, std::string> env;
            for (std::size_t i = 0; i < schema.params.size(); ++i)
                env[schema.params[i].first] = schema.params[i].second[idx[i]];
            if (eval_guard(schema.guard, env)) {
                ++res.assignments;
                EvolutionRule r;
                r.id = schema.rule.id;
                for (std::size_t i = 0; i < schema.params.size(); ++i)
                    r.id += (i ? "_" : "__") + env[schema.params[i].first];
                r.lhs = detail::ground_mset(schema.rule.lhs, env);
                r.here = detail::ground_mset(schema.rule.here, env);
                r.out = detail::ground_mset(schema.rule.out, env);
                for (const auto& [label, atoms] : schema.rule.ins) {
                    Multiset m = detail::ground_mset(atoms, env);
                    if (!m.empty())
                        r.ins[label] = std::move(m);
                }
                r.cond.promoters = detail::ground_set(schema.rule.promoters, env);
                r.cond.inhibitors = detail::ground_set(schema.rule.inhibitors, env);
                res.ids.push_back(r.id);
                bool duplicate = false;
                for (const auto& prev : res.rules)
                    if (prev.same_effect(r)) {
                        duplicate = true;
                        break;
                    }
                if (duplicate)
                    ++res.merged;
                else
                    res.rules.push_back(std::move(r));
            }
            if (schema.params.empty())
                break;
            std::size_t pos = schema.params.size();
            while (pos > 0) {
                --pos;
                if (++idx[pos] < schema.params[pos].second.size())
                    break;
                idx[pos] = 0;
                if (pos == 0) {
                    done = true;
                    break;
                }
            }
            if (done)
                break;
        }
        if (res.assignments == before)
            res.warnings.push_back("schema " + schema.rule.id + ": guard rejects every assignment");
    }
    return res;
}

} // namespace pstest
