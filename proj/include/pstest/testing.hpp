#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pstest/explorer.hpp"

namespace pstest {

// An observer with the tested system plugged into its hole. The tested skin
// is relabelled to 2, its inner membranes to fresh labels 3, 4, ... so the
// composed term has distinct labels with the observer skin at 1.
struct RunningTest {
    MembraneNode root;
    std::string observer_name;
    std::string system_name;
    std::map<int, int> label_mapping; // original system label -> composed label
};

inline RunningTest compose_running_test(const ObserverTemplate& obs, const MembraneNode& system,
                                        std::string observer_name = "", std::string system_name = "") {
    std::vector<int> labels;
    detail::collect_labels(system, labels);
    std::map<int, int> mapping;
    mapping[system.label] = observer_hole_label;
    std::sort(labels.begin(), labels.end());
    int next = observer_hole_label + 1;
    for (int l : labels) {
        if (l == system.label)
            continue;
        if (mapping.count(l))
            continue;
        mapping[l] = next++;
    }

    RunningTest rt;
    rt.observer_name = std::move(observer_name);
    rt.system_name = std::move(system_name);
    rt.label_mapping = mapping;
    rt.root.label = observer_skin_label;
    rt.root.content = obs.skin;
    rt.root.children.push_back(relabel_membranes(system, mapping));
    rt.root.normalize();

    auto violations = validate_test_term(rt.root);
    if (!violations.empty())
        throw Error("composed running test is not well-formed: " + violations.front().str());
    return rt;
}

// States with at least one outgoing edge whose label contains omega.
inline std::set<std::string> success_states(const Lts& lts) {
    std::set<std::string> out;
    for (std::uint32_t i = 0; i < lts.size(); ++i)
        for (const auto& e : lts.edges[i])
            if (e.label.has(omega_symbol)) {
                out.insert(lts.keys[i]);
                break;
            }
    return out;
}

enum class VerdictResult { Pass, Fail, Inconclusive };

inline const char* verdict_name(VerdictResult v) {
    switch (v) {
    case VerdictResult::Pass:
        return "Pass";
    case VerdictResult::Fail:
        return "Fail";
    case VerdictResult::Inconclusive:
        return "Inconclusive";
    }
    return "?";
}

struct Verdict {
    VerdictResult result = VerdictResult::Inconclusive;
    std::vector<std::string> witness; // state keys along the relevant path
    std::string reason;
    Bounds bounds_used;
    ExplorationStats stats;
};

namespace detail {

// A state can emit omega iff some skin rule producing omega out can fire once
// on the current objects. Checking this at discovery time lets the checkers
// classify success states without expanding them.
inline bool can_emit_omega(const MembraneNode& root) {
    for (const auto& r : root.content.rules->rules)
        if (r.out.has(omega_symbol) && gate_ok(r, root.content.objects) &&
            root.content.objects.contains(r.lhs))
            return true;
    return false;
}

// Internal-graph exploration for the test checkers: only silent steps (empty
// skin output) are followed, success states are absorbing, and the flags
// needed for verdict classification are tracked on the fly.
struct InternalGraph {
    std::vector<std::string> keys;
    std::vector<std::uint32_t> depth;
    std::vector<std::vector<std::uint32_t>> succ;
    std::vector<std::uint32_t> parent;
    std::vector<bool> success;
    std::vector<bool> expanded;
    std::vector<bool> clipped; // some successor was dropped by the state bound
    std::unordered_map<std::string, std::uint32_t> index;
    bool truncated = false;
    bool cap_hit = false;
    ExplorationStats stats;
};

enum class StopPolicy { None, FirstSuccess };

inline InternalGraph explore_internal(const MembraneNode& root, SemanticsMode mode,
                                      const Bounds& bounds, StopPolicy stop) {
    InternalGraph g;
    MembraneNode normal = root;
    normal.normalize();

    std::vector<MembraneNode> nodes;
    auto add = [&](MembraneNode&& node, std::string&& key, std::uint32_t depth,
                   std::uint32_t parent) {
        std::uint32_t idx = static_cast<std::uint32_t>(g.keys.size());
        g.index.emplace(key, idx);
        g.keys.push_back(std::move(key));
        g.depth.push_back(depth);
        g.parent.push_back(parent);
        g.succ.emplace_back();
        g.success.push_back(can_emit_omega(node));
        g.expanded.push_back(false);
        g.clipped.push_back(false);
        nodes.push_back(std::move(node));
        return idx;
    };

    std::string root_key = canonical_key(normal);
    add(std::move(normal), std::move(root_key), 0, 0);

    std::deque<std::uint32_t> queue;
    if (!g.success[0] || stop == StopPolicy::None)
        queue.push_back(0);
    if (g.success[0] && stop == StopPolicy::FirstSuccess)
        return g;

    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        if (g.success[cur])
            continue; // absorbing
        if (g.depth[cur] >= bounds.max_depth) {
            g.truncated = true;
            ++g.stats.truncations;
            continue;
        }
        StepResult steps = system_steps(nodes[cur], mode, bounds.max_instances);
        if (steps.cap_hit)
            g.cap_hit = true;
        g.expanded[cur] = true;
        for (auto& [step, succ_node] : steps.steps) {
            if (!step.root_out.empty())
                continue; // only silent steps belong to the internal graph
            std::string key = canonical_key(succ_node);
            auto it = g.index.find(key);
            std::uint32_t target;
            if (it != g.index.end()) {
                target = it->second;
            } else if (g.keys.size() < bounds.max_states) {
                target = add(std::move(succ_node), std::move(key), g.depth[cur] + 1, cur);
                if (g.success[target] && stop == StopPolicy::FirstSuccess) {
                    g.succ[cur].push_back(target);
                    g.stats.states = g.keys.size();
                    return g;
                }
                if (!g.success[target])
                    queue.push_back(target);
            } else {
                g.truncated = true;
                g.clipped[cur] = true;
                ++g.stats.truncations;
                continue;
            }
            g.succ[cur].push_back(target);
        }
        std::sort(g.succ[cur].begin(), g.succ[cur].end());
        g.succ[cur].erase(std::unique(g.succ[cur].begin(), g.succ[cur].end()), g.succ[cur].end());
        g.stats.edges += g.succ[cur].size();
    }
    g.stats.states = g.keys.size();
    return g;
}

inline std::vector<std::string> path_to(const InternalGraph& g, std::uint32_t state) {
    std::vector<std::string> path;
    std::uint32_t cur = state;
    while (true) {
        path.push_back(g.keys[cur]);
        if (cur == 0)
            break;
        cur = g.parent[cur];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Finds a cycle among non-success states using iterative DFS with colors.
// Returns the cycle-closing state, or nothing if the explored region is acyclic.
inline std::optional<std::pair<std::uint32_t, std::vector<std::uint32_t>>>
find_cycle(const InternalGraph& g) {
    enum : unsigned char { White, Grey, Black };
    std::vector<unsigned char> color(g.keys.size(), White);
    std::vector<std::uint32_t> stack;
    // frame: (state, next child index)
    std::vector<std::pair<std::uint32_t, std::size_t>> frames;
    for (std::uint32_t start = 0; start < g.keys.size(); ++start) {
        if (color[start] != White || g.success[start])
            continue;
        frames.push_back({start, 0});
        color[start] = Grey;
        stack.push_back(start);
        while (!frames.empty()) {
            auto& [state, child] = frames.back();
            if (child < g.succ[state].size()) {
                std::uint32_t next = g.succ[state][child++];
                if (g.success[next])
                    continue;
                if (color[next] == Grey) {
                    // cycle: suffix of the stack from `next`
                    std::vector<std::uint32_t> cycle;
                    auto it = std::find(stack.begin(), stack.end(), next);
                    cycle.assign(it, stack.end());
                    return std::make_pair(next, cycle);
                }
                if (color[next] == White) {
                    color[next] = Grey;
                    stack.push_back(next);
                    frames.push_back({next, 0});
                }
            } else {
                color[state] = Black;
                stack.pop_back();
                frames.pop_back();
            }
        }
    }
    return std::nullopt;
}

} // namespace detail

// may: does some internal computation reach a success state? Pass is
// definitive even under truncation; Fail needs the pruned region fully
// explored with no cap interference.
inline Verdict may_check(const RunningTest& rt, SemanticsMode mode, Bounds bounds) {
    Verdict v;
    v.bounds_used = bounds;
    detail::InternalGraph g =
        detail::explore_internal(rt.root, mode, bounds, detail::StopPolicy::FirstSuccess);
    v.stats = g.stats;
    v.stats.states = g.keys.size();
    for (std::uint32_t i = 0; i < g.keys.size(); ++i) {
        if (g.success[i]) {
            v.result = VerdictResult::Pass;
            v.witness = detail::path_to(g, i);
            v.reason = "success state reachable";
            return v;
        }
    }
    if (!g.truncated && !g.cap_hit) {
        v.result = VerdictResult::Fail;
        v.reason = "no success state reachable";
    } else {
        v.result = VerdictResult::Inconclusive;
        v.reason = g.truncated ? "exploration truncated by bounds" : "instance cap hit";
    }
    return v;
}

// must: does every internal computation pass through a success state? Fail
// (definitive even under truncation) on a success-free deadlock or cycle;
// Pass needs the success-pruned region fully explored.
inline Verdict must_check(const RunningTest& rt, SemanticsMode mode, Bounds bounds) {
    Verdict v;
    v.bounds_used = bounds;
    detail::InternalGraph g =
        detail::explore_internal(rt.root, mode, bounds, detail::StopPolicy::None);
    v.stats = g.stats;
    v.stats.states = g.keys.size();

    for (std::uint32_t i = 0; i < g.keys.size(); ++i) {
        if (g.success[i] || !g.expanded[i] || g.clipped[i])
            continue;
        if (g.succ[i].empty()) {
            v.result = VerdictResult::Fail;
            v.witness = detail::path_to(g, i);
            v.reason = "success-free deadlock";
            return v;
        }
    }
    if (auto cycle = detail::find_cycle(g)) {
        v.result = VerdictResult::Fail;
        v.witness = detail::path_to(g, cycle->first);
        for (std::size_t i = 1; i < cycle->second.size(); ++i)
            v.witness.push_back(g.keys[cycle->second[i]]);
        v.witness.push_back(g.keys[cycle->first]);
        v.reason = "success-free cycle";
        return v;
    }
    if (g.truncated || g.cap_hit) {
        v.result = VerdictResult::Inconclusive;
        v.reason = g.truncated ? "exploration truncated by bounds" : "instance cap hit";
        return v;
    }
    v.result = VerdictResult::Pass;
    v.reason = "every internal computation reaches a success state";
    return v;
}

} // namespace pstest
