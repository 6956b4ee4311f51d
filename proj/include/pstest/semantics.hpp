#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "pstest/term.hpp"

namespace pstest {

enum class SemanticsMode { AtLeastOne, Maximal };

inline const char* mode_name(SemanticsMode m) {
    return m == SemanticsMode::AtLeastOne ? "at-least-one" : "maximal";
}

inline constexpr std::uint32_t no_cap = std::numeric_limits<std::uint32_t>::max();

// How often each rule fires in one membrane during one step. Only rules with
// a positive count appear.
struct InstanceSelection {
    std::map<std::string, std::uint32_t> counts;

    bool empty() const { return counts.empty(); }

    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (const auto& [id, n] : counts) {
            if (!first)
                s += ',';
            first = false;
            s += id + ":" + std::to_string(n);
        }
        return s + "}";
    }

    friend bool operator==(const InstanceSelection&, const InstanceSelection&) = default;
    friend bool operator<(const InstanceSelection& a, const InstanceSelection& b) {
        return a.counts < b.counts;
    }
};

struct SelectionSet {
    std::vector<InstanceSelection> selections; // includes the empty selection
    bool cap_hit = false;                      // some rule had more instances than the cap allowed
};

namespace detail {

inline bool gate_ok(const EvolutionRule& r, const Multiset& objects) {
    for (const auto& p : r.cond.promoters)
        if (!objects.has(p))
            return false;
    for (const auto& i : r.cond.inhibitors)
        if (objects.has(i))
            return false;
    return true;
}

inline std::uint32_t max_applications(const Multiset& lhs, const Multiset& available) {
    std::uint32_t n = no_cap;
    for (const auto& [sym, need] : lhs) {
        std::uint32_t have = available.count(sym);
        std::uint32_t fit = have / need;
        if (fit < n)
            n = fit;
    }
    return n;
}

} // namespace detail

// All per-rule application-count vectors that jointly fit into the membrane's
// objects, with gates evaluated against the pre-step objects. The empty
// selection is always included; `cap` bounds each rule's count individually.
inline SelectionSet enabled_selections(const MembraneContent& content, std::uint32_t cap) {
    SelectionSet result;
    std::vector<const EvolutionRule*> usable;
    for (const auto& r : content.rules->rules)
        if (detail::gate_ok(r, content.objects) && !r.lhs.empty())
            usable.push_back(&r);

    InstanceSelection current;
    Multiset remaining = content.objects;
    // Depth-first over rules in id order, counts ascending: selections come
    // out in lexicographic order of their count vectors.
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == usable.size()) {
            result.selections.push_back(current);
            return;
        }
        const EvolutionRule& r = *usable[i];
        std::uint32_t by_resources = detail::max_applications(r.lhs, remaining);
        std::uint32_t n_max = by_resources;
        if (cap != no_cap && n_max > cap) {
            n_max = cap;
            result.cap_hit = true;
        }
        self(self, i + 1);
        for (std::uint32_t n = 1; n <= n_max; ++n) {
            remaining.subtract(r.lhs);
            current.counts[r.id] = n;
            self(self, i + 1);
        }
        if (n_max > 0) {
            current.counts.erase(r.id);
            remaining.add_scaled(r.lhs, n_max);
        }
    };
    rec(rec, 0);
    return result;
}

// Bookkeeping for one membrane within one step; lets callers audit the
// conservation equation next = objects - consumed + here + received.
struct MembraneDelta {
    Multiset consumed;
    Multiset here_produced;
    Multiset received_from_parent;
    Multiset received_from_children;
};

struct SystemStep {
    std::map<int, InstanceSelection> selections; // label -> selection (nonempty ones only)
    Multiset root_out;                           // objects leaving the skin
    int app = 1;
    std::map<int, MembraneDelta> deltas;
};

struct StepResult {
    std::vector<std::pair<SystemStep, MembraneNode>> steps;
    bool cap_hit = false;
};

namespace detail {

struct FlatMembrane {
    const MembraneNode* node;
    int parent_index; // -1 for the skin
};

inline void flatten(const MembraneNode& n, int parent, std::vector<FlatMembrane>& out) {
    int self = static_cast<int>(out.size());
    out.push_back({&n, parent});
    for (const auto& c : n.children)
        flatten(c, self, out);
}

// A selection is maximal when no gated-in rule can fire once more on what the
// selection leaves behind. Gates keep using pre-step objects.
inline bool is_maximal(const MembraneContent& content, const Multiset& remaining) {
    for (const auto& r : content.rules->rules)
        if (!r.lhs.empty() && gate_ok(r, content.objects) && remaining.contains(r.lhs))
            return false;
    return true;
}

struct MembraneChoice {
    InstanceSelection selection;
    Multiset consumed;
    Multiset here;
    Multiset out;
    std::map<int, Multiset> ins;
};

inline MembraneChoice make_choice(const MembraneContent& content, const InstanceSelection& sel) {
    MembraneChoice ch;
    ch.selection = sel;
    for (const auto& [id, n] : sel.counts) {
        const EvolutionRule* rule = nullptr;
        for (const auto& r : content.rules->rules)
            if (r.id == id) {
                rule = &r;
                break;
            }
        ch.consumed.add_scaled(rule->lhs, n);
        ch.here.add_scaled(rule->here, n);
        ch.out.add_scaled(rule->out, n);
        for (const auto& [label, m] : rule->ins)
            ch.ins[label].add_scaled(m, n);
    }
    return ch;
}

inline MembraneNode rebuild(const MembraneNode& tmpl, const std::vector<Multiset>& new_objects,
                            int& cursor) {
    MembraneNode out;
    out.label = tmpl.label;
    out.content.rules = tmpl.content.rules;
    out.content.objects = new_objects[cursor++];
    out.children.reserve(tmpl.children.size());
    for (const auto& c : tmpl.children)
        out.children.push_back(rebuild(c, new_objects, cursor));
    return out;
}

} // namespace detail

// All one-step transitions of a closed system. AtLeastOne admits every joint
// selection with at least one instance; Maximal keeps only selections that
// exhaust every membrane. The cap bounds per-rule instance counts in
// AtLeastOne mode; Maximal ignores it (consumption already bounds counts).
inline StepResult system_steps(const MembraneNode& root, SemanticsMode mode,
                               std::uint32_t cap = no_cap) {
    StepResult result;
    std::vector<detail::FlatMembrane> flat;
    detail::flatten(root, -1, flat);

    std::uint32_t effective_cap = mode == SemanticsMode::Maximal ? no_cap : cap;
    std::vector<std::vector<detail::MembraneChoice>> options(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const MembraneContent& content = flat[i].node->content;
        SelectionSet sel = enabled_selections(content, effective_cap);
        if (sel.cap_hit)
            result.cap_hit = true;
        for (const auto& s : sel.selections) {
            detail::MembraneChoice ch = detail::make_choice(content, s);
            if (mode == SemanticsMode::Maximal &&
                !detail::is_maximal(content, content.objects - ch.consumed))
                continue;
            options[i].push_back(std::move(ch));
        }
    }

    std::vector<std::size_t> pick(flat.size(), 0);
    while (true) {
        bool any = false;
        for (std::size_t i = 0; i < flat.size(); ++i)
            if (!options[i][pick[i]].selection.empty())
                any = true;
        if (any) {
            SystemStep step;
            std::vector<Multiset> new_objects(flat.size());
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const detail::MembraneChoice& ch = options[i][pick[i]];
                MembraneDelta delta;
                delta.consumed = ch.consumed;
                delta.here_produced = ch.here;
                Multiset next = flat[i].node->content.objects - ch.consumed + ch.here;
                if (flat[i].parent_index >= 0) {
                    const auto& parent_ins = options[flat[i].parent_index][pick[flat[i].parent_index]].ins;
                    auto it = parent_ins.find(flat[i].node->label);
                    if (it != parent_ins.end()) {
                        delta.received_from_parent = it->second;
                        next += it->second;
                    }
                }
                for (std::size_t j = 0; j < flat.size(); ++j)
                    if (flat[j].parent_index == static_cast<int>(i))
                        delta.received_from_children += options[j][pick[j]].out;
                next += delta.received_from_children;
                new_objects[i] = std::move(next);
                if (!ch.selection.empty())
                    step.selections[flat[i].node->label] = ch.selection;
                if (!ch.selection.empty() || !delta.received_from_parent.empty() ||
                    !delta.received_from_children.empty())
                    step.deltas[flat[i].node->label] = std::move(delta);
            }
            step.root_out = options[0][pick[0]].out;
            int cursor = 0;
            MembraneNode successor = detail::rebuild(root, new_objects, cursor);
            result.steps.emplace_back(std::move(step), std::move(successor));
        }
        std::size_t pos = flat.size();
        bool done = false;
        while (pos > 0) {
            --pos;
            if (++pick[pos] < options[pos].size())
                break;
            pick[pos] = 0;
            if (pos == 0)
                done = true;
        }
        if (done)
            break;
    }
    return result;
}

} // namespace pstest
