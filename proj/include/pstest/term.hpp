#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pstest/multiset.hpp"

namespace pstest {

// Promoter/inhibitor gate attached to a rule. Promoters must all be present
// and inhibitors all absent (in the membrane's pre-step objects) for the rule
// to be applicable; promoters are not consumed.
struct Condition {
    std::set<Symbol> promoters;
    std::set<Symbol> inhibitors;

    bool empty() const { return promoters.empty() && inhibitors.empty(); }

    friend bool operator==(const Condition&, const Condition&) = default;
};

// One evolution rule: lhs -> (here, .) (out, .) (ins[l], in l) | gate.
// Targets may be empty multisets except for `ins` entries, which are always
// nonempty (an empty delivery is simply not recorded).
struct EvolutionRule {
    std::string id;
    Multiset lhs;
    Multiset here;
    Multiset out;
    std::map<int, Multiset> ins;
    Condition cond;

    // Equality of behaviour, ignoring the id. Used when merging ground rules
    // produced by overlapping schema assignments.
    bool same_effect(const EvolutionRule& o) const {
        return lhs == o.lhs && here == o.here && out == o.out && ins == o.ins && cond == o.cond;
    }

    std::string str() const {
        std::string s = id + ": " + lhs.str() + " ->";
        s += " here" + here.str();
        s += " out" + out.str();
        for (const auto& [label, m] : ins)
            s += " in" + std::to_string(label) + m.str();
        if (!cond.promoters.empty()) {
            s += " prom{";
            bool first = true;
            for (const auto& p : cond.promoters) {
                if (!first)
                    s += ',';
                first = false;
                s += p;
            }
            s += '}';
        }
        if (!cond.inhibitors.empty()) {
            s += " inh{";
            bool first = true;
            for (const auto& p : cond.inhibitors) {
                if (!first)
                    s += ',';
                first = false;
                s += p;
            }
            s += '}';
        }
        return s;
    }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& data, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

} // namespace detail

// Immutable, shareable rule list. Rules are kept sorted by id; the digest is a
// stable fingerprint of the full rule text so that state keys can include the
// rule set without storing it per state (rules never change during a run).
struct RuleSet {
    std::vector<EvolutionRule> rules;
    std::string digest;
};

inline std::shared_ptr<const RuleSet> make_rule_set(std::vector<EvolutionRule> rules) {
    std::sort(rules.begin(), rules.end(),
              [](const EvolutionRule& a, const EvolutionRule& b) { return a.id < b.id; });
    std::string text;
    for (const auto& r : rules) {
        text += r.str();
        text += '\n';
    }
    auto rs = std::make_shared<RuleSet>();
    rs->digest = detail::hex64(detail::fnv1a(text));
    rs->rules = std::move(rules);
    return rs;
}

inline const std::shared_ptr<const RuleSet>& empty_rule_set() {
    static const std::shared_ptr<const RuleSet> empty = make_rule_set({});
    return empty;
}

struct MembraneContent {
    std::shared_ptr<const RuleSet> rules = empty_rule_set();
    Multiset objects;
};

// A membrane tree node. Children are kept sorted by label (normalize() takes
// care of it); everything downstream treats sibling order as irrelevant.
struct MembraneNode {
    int label = 1;
    MembraneContent content;
    std::vector<MembraneNode> children;

    void normalize() {
        for (auto& c : children)
            c.normalize();
        std::sort(children.begin(), children.end(),
                  [](const MembraneNode& a, const MembraneNode& b) { return a.label < b.label; });
    }
};

// Canonical text of a node with rules spelled out in full. Two terms are
// structurally equal (up to sibling order) iff their canonical texts match.
inline std::string canonical_text(const MembraneNode& n) {
    std::string s = "[" + std::to_string(n.label) + "|";
    for (const auto& r : n.content.rules->rules) {
        s += r.str();
        s += ';';
    }
    s += '|';
    s += n.content.objects.str();
    std::vector<std::string> kids;
    kids.reserve(n.children.size());
    for (const auto& c : n.children)
        kids.push_back(canonical_text(c));
    std::sort(kids.begin(), kids.end());
    for (const auto& k : kids)
        s += k;
    s += ']';
    return s;
}

inline bool structural_equal(const MembraneNode& a, const MembraneNode& b) {
    return canonical_text(a) == canonical_text(b);
}

// Compact canonical key used for state identity during exploration: full
// structure and objects, rule sets represented by their digest.
inline std::string canonical_key(const MembraneNode& n) {
    std::string s = "(" + std::to_string(n.label) + "#" + n.content.rules->digest + "|";
    s += n.content.objects.str();
    std::vector<std::string> kids;
    kids.reserve(n.children.size());
    for (const auto& c : n.children)
        kids.push_back(canonical_key(c));
    std::sort(kids.begin(), kids.end());
    for (const auto& k : kids)
        s += k;
    s += ')';
    return s;
}

struct Violation {
    enum class Kind {
        EmptyLhs,
        LhsInhibitorOverlap,
        PromoterInhibitorOverlap,
        EmptyInTarget,
        MissingInTarget,
        DuplicateLabel,
        DuplicateRuleId,
        ReservedSymbol,
    };

    Kind kind;
    int membrane = 0;
    std::string rule;
    std::string detail;

    std::string str() const {
        static const char* names[] = {
            "EmptyLhs",           "LhsInhibitorOverlap", "PromoterInhibitorOverlap",
            "EmptyInTarget",      "MissingInTarget",     "DuplicateLabel",
            "DuplicateRuleId",    "ReservedSymbol",
        };
        std::string s = names[static_cast<int>(kind)];
        s += " (membrane " + std::to_string(membrane);
        if (!rule.empty())
            s += ", rule " + rule;
        s += ")";
        if (!detail.empty())
            s += ": " + detail;
        return s;
    }
};

namespace detail {

inline void validate_node(const MembraneNode& n, bool skin, bool omega_out_at_skin,
                          std::set<int>& labels, std::vector<Violation>& out) {
    using K = Violation::Kind;
    if (!labels.insert(n.label).second)
        out.push_back({K::DuplicateLabel, n.label, "", "label used twice"});

    std::set<int> child_labels;
    for (const auto& c : n.children)
        child_labels.insert(c.label);

    std::set<std::string> ids;
    for (const auto& r : n.content.rules->rules) {
        if (!ids.insert(r.id).second)
            out.push_back({K::DuplicateRuleId, n.label, r.id, "rule id used twice in membrane"});
        if (r.lhs.empty())
            out.push_back({K::EmptyLhs, n.label, r.id, "left-hand side is empty"});
        for (const auto& i : r.cond.inhibitors)
            if (r.lhs.has(i))
                out.push_back({K::LhsInhibitorOverlap, n.label, r.id, "'" + i + "' consumed and inhibiting"});
        for (const auto& p : r.cond.promoters)
            if (r.cond.inhibitors.count(p))
                out.push_back({K::PromoterInhibitorOverlap, n.label, r.id, "'" + p + "' promoter and inhibitor"});
        for (const auto& [label, m] : r.ins) {
            if (m.empty())
                out.push_back({K::EmptyInTarget, n.label, r.id, "empty delivery to " + std::to_string(label)});
            if (!child_labels.count(label))
                out.push_back({K::MissingInTarget, n.label, r.id,
                               "no child labelled " + std::to_string(label)});
        }

        auto flag_omega = [&](const Multiset& m, const char* where) {
            if (m.has(omega_symbol))
                out.push_back({K::ReservedSymbol, n.label, r.id,
                               std::string("'") + omega_symbol + "' in " + where});
        };
        flag_omega(r.lhs, "lhs");
        flag_omega(r.here, "here-target");
        if (!(skin && omega_out_at_skin))
            flag_omega(r.out, "out-target");
        for (const auto& [label, m] : r.ins)
            flag_omega(m, "in-target");
        if (r.cond.promoters.count(omega_symbol) || r.cond.inhibitors.count(omega_symbol))
            out.push_back({K::ReservedSymbol, n.label, r.id,
                           std::string("'") + omega_symbol + "' in gate"});
    }
    if (n.content.objects.has(omega_symbol))
        out.push_back({K::ReservedSymbol, n.label, "", std::string("'") + omega_symbol + "' among objects"});

    for (const auto& c : n.children)
        validate_node(c, false, omega_out_at_skin, labels, out);
}

} // namespace detail

// Structural well-formedness of a plain system term. Violations are data, not
// failures; an empty result means the term is valid.
inline std::vector<Violation> validate_system(const MembraneNode& root) {
    std::vector<Violation> out;
    std::set<int> labels;
    detail::validate_node(root, true, false, labels, out);
    return out;
}

// Same checks for a composed running test, where skin rules may send omega out.
inline std::vector<Violation> validate_test_term(const MembraneNode& root) {
    std::vector<Violation> out;
    std::set<int> labels;
    detail::validate_node(root, true, true, labels, out);
    return out;
}

struct MappingIncomplete : Error {
    using Error::Error;
};
struct MappingNotInjective : Error {
    using Error::Error;
};

namespace detail {

inline MembraneNode relabel_node(const MembraneNode& n, const std::map<int, int>& mapping) {
    auto it = mapping.find(n.label);
    if (it == mapping.end())
        throw MappingIncomplete("no mapping for membrane label " + std::to_string(n.label));
    MembraneNode out;
    out.label = it->second;
    out.content.objects = n.content.objects;
    bool ins_changed = false;
    for (const auto& r : n.content.rules->rules)
        if (!r.ins.empty())
            ins_changed = true;
    if (ins_changed) {
        std::vector<EvolutionRule> rules = n.content.rules->rules;
        for (auto& r : rules) {
            std::map<int, Multiset> ins;
            for (const auto& [label, m] : r.ins) {
                auto target = mapping.find(label);
                if (target == mapping.end())
                    throw MappingIncomplete("no mapping for in-target " + std::to_string(label));
                ins[target->second] = m;
            }
            r.ins = std::move(ins);
        }
        out.content.rules = make_rule_set(std::move(rules));
    } else {
        out.content.rules = n.content.rules;
    }
    for (const auto& c : n.children)
        out.children.push_back(relabel_node(c, mapping));
    out.normalize();
    return out;
}

inline void collect_labels(const MembraneNode& n, std::vector<int>& out) {
    out.push_back(n.label);
    for (const auto& c : n.children)
        collect_labels(c, out);
}

} // namespace detail

// Applies a label mapping to the whole tree, rewriting in-targets to match.
// The mapping must cover every label in the tree and be injective on them.
inline MembraneNode relabel_membranes(const MembraneNode& root, const std::map<int, int>& mapping) {
    std::vector<int> labels;
    detail::collect_labels(root, labels);
    std::set<int> images;
    for (int l : labels) {
        auto it = mapping.find(l);
        if (it == mapping.end())
            throw MappingIncomplete("no mapping for membrane label " + std::to_string(l));
        if (!images.insert(it->second).second)
            throw MappingNotInjective("label " + std::to_string(it->second) + " assigned twice");
    }
    return detail::relabel_node(root, mapping);
}

struct ObserverShapeError : Error {
    using Error::Error;
};

inline constexpr int observer_skin_label = 1;
inline constexpr int observer_hole_label = 2;

// An observer: a flat skin membrane (label 1) with a single hole (label 2)
// where the tested system gets plugged in. Skin rules may send out only omega
// and may deliver inward only to the hole.
struct ObserverTemplate {
    std::string name;
    MembraneContent skin;
};

inline ObserverTemplate make_observer(std::string name, MembraneContent skin) {
    for (const auto& r : skin.rules->rules) {
        for (const auto& [sym, n] : r.out)
            if (sym != omega_symbol)
                throw ObserverShapeError("observer rule " + r.id + " sends out '" + sym +
                                         "'; only omega may leave the observer skin");
        for (const auto& [label, m] : r.ins)
            if (label != observer_hole_label)
                throw ObserverShapeError("observer rule " + r.id + " targets membrane " +
                                         std::to_string(label) + "; only the hole (2) is allowed");
        auto check_plain = [&](const Multiset& m, const char* where) {
            if (m.has(omega_symbol))
                throw ObserverShapeError("observer rule " + r.id + " uses omega in " + where);
        };
        check_plain(r.lhs, "lhs");
        check_plain(r.here, "here-target");
        for (const auto& [label, m] : r.ins)
            check_plain(m, "in-target");
        if (r.cond.promoters.count(omega_symbol) || r.cond.inhibitors.count(omega_symbol))
            throw ObserverShapeError("observer rule " + r.id + " uses omega in a gate");
    }
    if (skin.objects.has(omega_symbol))
        throw ObserverShapeError("observer objects contain omega");
    return ObserverTemplate{std::move(name), std::move(skin)};
}

} // namespace pstest
