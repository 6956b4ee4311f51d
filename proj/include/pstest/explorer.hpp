#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pstest/semantics.hpp"

namespace pstest {

struct Bounds {
    std::uint32_t max_depth = 64;
    std::uint32_t max_states = 100000;
    std::uint32_t max_instances = 8;

    friend bool operator==(const Bounds&, const Bounds&) = default;

    // b covers this when every limit is at least as generous.
    bool covered_by(const Bounds& b) const {
        return max_depth <= b.max_depth && max_states <= b.max_states &&
               max_instances <= b.max_instances;
    }
};

struct ExplorationStats {
    std::uint64_t states = 0;
    std::uint64_t edges = 0;
    std::uint64_t cap_hits = 0;
    std::uint64_t truncations = 0;
};

struct LtsEdge {
    Multiset label; // objects emitted by the skin during the step
    std::uint32_t target;
};

// Bounded transition graph over canonical state keys. States are indexed in
// discovery (breadth-first) order; index 0 is the initial state. `truncated`
// holds states whose successor set was cut short by the bounds.
struct Lts {
    std::vector<std::string> keys;
    std::vector<MembraneNode> nodes;
    std::vector<std::uint32_t> depth;
    std::vector<std::vector<LtsEdge>> edges;
    std::unordered_map<std::string, std::uint32_t> index;
    std::set<std::uint32_t> truncated;
    ExplorationStats stats;
    SemanticsMode mode = SemanticsMode::AtLeastOne;
    Bounds bounds;

    std::uint32_t initial() const { return 0; }
    std::size_t size() const { return keys.size(); }
    // Complete means no state was cut by depth/state bounds and no selection
    // was dropped by the instance cap: the graph is the whole behaviour.
    bool complete() const { return truncated.empty() && stats.cap_hits == 0; }
};

// Breadth-first exploration up to the bounds. Deterministic: states get their
// index in BFS discovery order and edge lists are sorted by (target key,
// label) with duplicates removed.
inline Lts explore(const MembraneNode& root, SemanticsMode mode, Bounds bounds) {
    Lts lts;
    lts.mode = mode;
    lts.bounds = bounds;

    MembraneNode normal = root;
    normal.normalize();

    lts.keys.push_back(canonical_key(normal));
    lts.nodes.push_back(std::move(normal));
    lts.depth.push_back(0);
    lts.edges.emplace_back();
    lts.index.emplace(lts.keys[0], 0);

    std::deque<std::uint32_t> queue;
    queue.push_back(0);
    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        if (lts.depth[cur] >= bounds.max_depth) {
            lts.truncated.insert(cur);
            ++lts.stats.truncations;
            continue;
        }
        StepResult steps = system_steps(lts.nodes[cur], mode, bounds.max_instances);
        if (steps.cap_hit)
            ++lts.stats.cap_hits;
        bool cut = false;
        std::vector<std::pair<std::string, Multiset>> found;
        found.reserve(steps.steps.size());
        for (auto& [step, succ] : steps.steps)
            found.emplace_back(canonical_key(succ), std::move(step.root_out));
        for (std::size_t i = 0; i < found.size(); ++i) {
            auto& [key, label] = found[i];
            auto it = lts.index.find(key);
            std::uint32_t target;
            if (it != lts.index.end()) {
                target = it->second;
            } else if (lts.keys.size() < bounds.max_states) {
                target = static_cast<std::uint32_t>(lts.keys.size());
                lts.index.emplace(key, target);
                lts.keys.push_back(key);
                lts.nodes.push_back(std::move(steps.steps[i].second));
                lts.depth.push_back(lts.depth[cur] + 1);
                lts.edges.emplace_back();
                queue.push_back(target);
            } else {
                cut = true;
                continue;
            }
            lts.edges[cur].push_back({std::move(label), target});
        }
        if (cut) {
            lts.truncated.insert(cur);
            ++lts.stats.truncations;
        }
        auto& out = lts.edges[cur];
        std::sort(out.begin(), out.end(), [&](const LtsEdge& a, const LtsEdge& b) {
            if (lts.keys[a.target] != lts.keys[b.target])
                return lts.keys[a.target] < lts.keys[b.target];
            return a.label < b.label;
        });
        out.erase(std::unique(out.begin(), out.end(),
                              [](const LtsEdge& a, const LtsEdge& b) {
                                  return a.target == b.target && a.label == b.label;
                              }),
                  out.end());
    }

    lts.stats.states = lts.keys.size();
    for (const auto& e : lts.edges)
        lts.stats.edges += e.size();
    return lts;
}

struct Trace {
    std::vector<Multiset> labels;
    enum class Kind { Maximal, Cut } kind = Kind::Maximal;

    friend bool operator==(const Trace&, const Trace&) = default;
    friend bool operator<(const Trace& a, const Trace& b) {
        if (a.labels != b.labels)
            return a.labels < b.labels;
        return a.kind < b.kind;
    }

    std::string str() const {
        std::string s;
        for (const auto& l : labels)
            s += l.str();
        s += kind == Kind::Maximal ? " (maximal)" : " (cut)";
        return s;
    }
};

// All label sequences of length <= k along paths from the initial state.
// A trace is maximal when its path ends in a genuine deadlock; traces cut by
// k, by a cycle continuation, or by exploration truncation are marked Cut.
inline std::set<Trace> traces_bounded(const Lts& lts, std::uint32_t k) {
    std::set<Trace> out;
    std::vector<Multiset> prefix;
    auto rec = [&](auto&& self, std::uint32_t state) -> void {
        bool sink = lts.edges[state].empty();
        bool truncated = lts.truncated.count(state) != 0;
        if (sink && !truncated) {
            if (!prefix.empty())
                out.insert({prefix, Trace::Kind::Maximal});
            return;
        }
        if (prefix.size() == k || (sink && truncated)) {
            if (!prefix.empty())
                out.insert({prefix, Trace::Kind::Cut});
            return;
        }
        if (truncated && !prefix.empty())
            out.insert({prefix, Trace::Kind::Cut});
        for (const auto& e : lts.edges[state]) {
            prefix.push_back(e.label);
            self(self, e.target);
            prefix.pop_back();
        }
    };
    rec(rec, lts.initial());
    return out;
}

namespace detail {

inline std::string state_tag(const std::string& key) {
    return hex64(fnv1a(key)).substr(0, 12);
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

} // namespace detail

// Short stable identifier for a state, used in reports and DOT output.
using detail::state_tag;

// Graphviz rendering. Success states (when provided) are double-circled;
// the initial state gets a bold outline; truncated states are dashed.
inline std::string lts_to_dot(const Lts& lts, const std::set<std::uint32_t>& success = {}) {
    std::string out = "digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n";
    for (std::uint32_t i = 0; i < lts.size(); ++i) {
        out += "  \"" + detail::state_tag(lts.keys[i]) + "\" [label=\"" +
               detail::state_tag(lts.keys[i]).substr(0, 6) + "\"";
        if (success.count(i))
            out += ", peripheries=2";
        if (i == lts.initial())
            out += ", penwidth=2";
        if (lts.truncated.count(i))
            out += ", style=dashed";
        out += "];\n";
    }
    for (std::uint32_t i = 0; i < lts.size(); ++i)
        for (const auto& e : lts.edges[i])
            out += "  \"" + detail::state_tag(lts.keys[i]) + "\" -> \"" +
                   detail::state_tag(lts.keys[e.target]) + "\" [label=\"" +
                   detail::dot_escape(e.label.str()) + "\"];\n";
    out += "}\n";
    return out;
}

} // namespace pstest
