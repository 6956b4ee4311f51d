#pragma once

#include <atomic>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pstest/testing.hpp"

namespace pstest {

struct BisimResult {
    enum class Kind { Bisimilar, NotBisimilar, Inconclusive } kind = Kind::Inconclusive;
    bool exact = false;           // both graphs complete and refinement stabilized
    std::uint32_t depth = 0;      // refinement round at which the initial states split
    std::vector<Multiset> sequence; // shortest label sequence exhibiting the split
};

namespace detail {

struct Partition {
    std::vector<std::uint32_t> cls; // state -> class id
    std::size_t classes = 0;
};

// One refinement round: split on (old class, multiset of (label, successor
// class) pairs). Returns the new partition.
inline Partition refine_once(const Partition& p, const std::vector<std::vector<LtsEdge>>& edges_a,
                             const std::vector<std::vector<LtsEdge>>& edges_b, std::size_t na) {
    std::map<std::pair<std::uint32_t, std::set<std::pair<std::string, std::uint32_t>>>, std::uint32_t>
        ids;
    Partition next;
    next.cls.resize(p.cls.size());
    auto signature = [&](std::size_t s) {
        std::set<std::pair<std::string, std::uint32_t>> sig;
        const auto& edges = s < na ? edges_a[s] : edges_b[s - na];
        for (const auto& e : edges)
            sig.emplace(e.label.str(), p.cls[s < na ? e.target : e.target + na]);
        return sig;
    };
    for (std::size_t s = 0; s < p.cls.size(); ++s) {
        auto key = std::make_pair(p.cls[s], signature(s));
        next.cls[s] = ids.emplace(std::move(key), static_cast<std::uint32_t>(ids.size())).first->second;
    }
    next.classes = ids.size();
    return next;
}

} // namespace detail

// Bounded strong bisimulation via partition refinement on the disjoint union
// of the two graphs. Initial partition: deadlocked states vs the rest; each
// round splits on (label, successor class). Inconclusive when either graph
// was truncated (missing edges would make any answer unreliable).
inline BisimResult bisim_bounded(const Lts& a, const Lts& b, std::uint32_t k) {
    BisimResult res;
    if (!a.complete() || !b.complete())
        return res; // Inconclusive

    std::size_t na = a.size(), nb = b.size();
    detail::Partition part;
    part.cls.resize(na + nb);
    for (std::size_t s = 0; s < na + nb; ++s) {
        const auto& edges = s < na ? a.edges[s] : b.edges[s - na];
        part.cls[s] = edges.empty() ? 0 : 1;
    }
    part.classes = 2;

    std::uint32_t initial_a = a.initial();
    std::uint32_t initial_b = static_cast<std::uint32_t>(na) + b.initial();

    bool stabilized = false;
    std::uint32_t split_round = 0;
    if (part.cls[initial_a] == part.cls[initial_b]) {
        for (std::uint32_t round = 1; round <= k; ++round) {
            detail::Partition next = detail::refine_once(part, a.edges, b.edges, na);
            bool same = next.classes == part.classes;
            part = std::move(next);
            if (part.cls[initial_a] != part.cls[initial_b]) {
                split_round = round;
                break;
            }
            if (same) {
                stabilized = true;
                break;
            }
        }
    }

    if (part.cls[initial_a] == part.cls[initial_b]) {
        res.kind = BisimResult::Kind::Bisimilar;
        res.exact = stabilized;
        return res;
    }

    res.kind = BisimResult::Kind::NotBisimilar;
    res.exact = true;
    res.depth = split_round;

    // Shortest non-empty label sequence after which the reachable state sets
    // fall into different class sets: BFS over pairs of state sets.
    using SetPair = std::pair<std::set<std::uint32_t>, std::set<std::uint32_t>>;
    std::set<SetPair> seen;
    std::vector<std::pair<SetPair, std::vector<Multiset>>> frontier;
    frontier.push_back({{{initial_a}, {initial_b}}, {}});
    seen.insert(frontier[0].first);
    auto class_set = [&](const std::set<std::uint32_t>& states) {
        std::set<std::uint32_t> cs;
        for (auto s : states)
            cs.insert(part.cls[s]);
        return cs;
    };
    while (!frontier.empty() && res.sequence.empty()) {
        std::vector<std::pair<SetPair, std::vector<Multiset>>> next_frontier;
        for (const auto& [pair, seq] : frontier) {
            std::set<Multiset> labels;
            for (auto s : pair.first)
                for (const auto& e : a.edges[s])
                    labels.insert(e.label);
            for (auto s : pair.second)
                for (const auto& e : b.edges[s - na])
                    labels.insert(e.label);
            for (const auto& label : labels) {
                SetPair succ;
                for (auto s : pair.first)
                    for (const auto& e : a.edges[s])
                        if (e.label == label)
                            succ.first.insert(e.target);
                for (auto s : pair.second)
                    for (const auto& e : b.edges[s - na])
                        if (e.label == label)
                            succ.second.insert(e.target + static_cast<std::uint32_t>(na));
                std::vector<Multiset> next_seq = seq;
                next_seq.push_back(label);
                if (class_set(succ.first) != class_set(succ.second)) {
                    res.sequence = next_seq;
                    break;
                }
                if (seen.insert(succ).second)
                    next_frontier.push_back({std::move(succ), std::move(next_seq)});
            }
            if (!res.sequence.empty())
                break;
        }
        frontier = std::move(next_frontier);
    }
    return res;
}

// Replay validator for a distinguishing sequence: after playing the sequence
// from both initial states, the reachable sets must occupy different stable
// class sets (one side missing a class the other reaches).
inline bool bisim_replay_separates(const Lts& a, const Lts& b, const std::vector<Multiset>& seq) {
    if (seq.empty() || !a.complete() || !b.complete())
        return false;
    std::size_t na = a.size();
    detail::Partition part;
    part.cls.resize(na + b.size());
    for (std::size_t s = 0; s < part.cls.size(); ++s) {
        const auto& edges = s < na ? a.edges[s] : b.edges[s - na];
        part.cls[s] = edges.empty() ? 0 : 1;
    }
    part.classes = 2;
    while (true) {
        detail::Partition next = detail::refine_once(part, a.edges, b.edges, na);
        bool same = next.classes == part.classes;
        part = std::move(next);
        if (same)
            break;
    }
    std::set<std::uint32_t> sa{a.initial()}, sb{static_cast<std::uint32_t>(na) + b.initial()};
    for (const auto& label : seq) {
        std::set<std::uint32_t> ta, tb;
        for (auto s : sa)
            for (const auto& e : a.edges[s])
                if (e.label == label)
                    ta.insert(e.target);
        for (auto s : sb)
            for (const auto& e : b.edges[s - na])
                if (e.label == label)
                    tb.insert(e.target + static_cast<std::uint32_t>(na));
        sa = std::move(ta);
        sb = std::move(tb);
    }
    std::set<std::uint32_t> ca, cb;
    for (auto s : sa)
        ca.insert(part.cls[s]);
    for (auto s : sb)
        cb.insert(part.cls[s]);
    return ca != cb;
}

// Stable refinement classes over the disjoint union, for partition export.
// Runs at most k rounds (k = 0 means refine to stability).
struct PartitionExport {
    std::vector<std::uint32_t> class_a;
    std::vector<std::uint32_t> class_b;
    std::size_t classes = 0;
};

inline PartitionExport refined_partition(const Lts& a, const Lts& b, std::uint32_t k = 0) {
    std::size_t na = a.size();
    detail::Partition part;
    part.cls.resize(na + b.size());
    for (std::size_t s = 0; s < part.cls.size(); ++s) {
        const auto& edges = s < na ? a.edges[s] : b.edges[s - na];
        part.cls[s] = edges.empty() ? 0 : 1;
    }
    part.classes = 2;
    for (std::uint32_t round = 0; k == 0 || round < k; ++round) {
        detail::Partition next = detail::refine_once(part, a.edges, b.edges, na);
        bool same = next.classes == part.classes;
        part = std::move(next);
        if (same)
            break;
    }
    PartitionExport out;
    out.class_a.assign(part.cls.begin(), part.cls.begin() + static_cast<std::ptrdiff_t>(na));
    out.class_b.assign(part.cls.begin() + static_cast<std::ptrdiff_t>(na), part.cls.end());
    out.classes = part.classes;
    return out;
}

struct TraceEquivResult {
    enum class Kind { Equal, Different, Inconclusive } kind = Kind::Inconclusive;
    std::optional<Trace> witness; // present for Different: a trace only one side has
    char witness_side = ' ';      // 'a' or 'b'
};

// Compares bounded trace sets (with maximal/cut kinds). Definitive only when
// both graphs were fully explored within bounds.
inline TraceEquivResult trace_equiv_bounded(const Lts& a, const Lts& b, std::uint32_t k) {
    TraceEquivResult res;
    if (!a.complete() || !b.complete())
        return res;
    std::set<Trace> ta = traces_bounded(a, k);
    std::set<Trace> tb = traces_bounded(b, k);
    if (ta == tb) {
        res.kind = TraceEquivResult::Kind::Equal;
        return res;
    }
    res.kind = TraceEquivResult::Kind::Different;
    std::optional<Trace> best;
    char side = ' ';
    for (const auto& t : ta)
        if (!tb.count(t) && (!best || t < *best)) {
            best = t;
            side = 'a';
        }
    for (const auto& t : tb)
        if (!ta.count(t) && (!best || t < *best)) {
            best = t;
            side = 'b';
        }
    res.witness = best;
    res.witness_side = side;
    return res;
}

struct ObserverVerdicts {
    std::string observer;
    Verdict may_a, must_a, may_b, must_b;
};

struct SuiteReport {
    std::vector<ObserverVerdicts> rows;
    bool may_preorder_ab = true;  // mayA Pass implies mayB Pass (definitive rows)
    bool may_preorder_ba = true;
    bool must_preorder_ab = true; // mustA Pass implies mustB Pass (definitive rows)
    bool must_preorder_ba = true;
    bool any_inconclusive = false;

    bool may_equivalent() const { return may_preorder_ab && may_preorder_ba; }
    bool must_equivalent() const { return must_preorder_ab && must_preorder_ba; }
    bool indistinguishable() const { return may_equivalent() && must_equivalent(); }
};

inline unsigned worker_count() {
    if (const char* env = std::getenv("PSTEST_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs every suite observer against both systems and aggregates the verdict
// matrix into preorder/equivalence flags. Only definitive verdicts feed the
// flags; Inconclusive rows set any_inconclusive instead.
inline SuiteReport suite_compare(const MembraneNode& a, const MembraneNode& b,
                                 const std::vector<ObserverTemplate>& suite, SemanticsMode mode,
                                 Bounds bounds) {
    SuiteReport report;
    report.rows.resize(suite.size());

    auto run_row = [&](std::size_t i) {
        const ObserverTemplate& obs = suite[i];
        ObserverVerdicts row;
        row.observer = obs.name;
        RunningTest ta = compose_running_test(obs, a, obs.name, "a");
        RunningTest tb = compose_running_test(obs, b, obs.name, "b");
        row.may_a = may_check(ta, mode, bounds);
        row.must_a = must_check(ta, mode, bounds);
        row.may_b = may_check(tb, mode, bounds);
        row.must_b = must_check(tb, mode, bounds);
        report.rows[i] = std::move(row);
    };

    unsigned workers = worker_count();
    if (workers <= 1 || suite.size() <= 1) {
        for (std::size_t i = 0; i < suite.size(); ++i)
            run_row(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        unsigned n = std::min<std::size_t>(workers, suite.size());
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= suite.size())
                        return;
                    run_row(i);
                }
            });
        for (auto& th : pool)
            th.join();
    }

    for (const auto& row : report.rows) {
        auto definitive = [](const Verdict& v) { return v.result != VerdictResult::Inconclusive; };
        if (!definitive(row.may_a) || !definitive(row.may_b) || !definitive(row.must_a) ||
            !definitive(row.must_b))
            report.any_inconclusive = true;
        if (definitive(row.may_a) && definitive(row.may_b)) {
            if (row.may_a.result == VerdictResult::Pass && row.may_b.result != VerdictResult::Pass)
                report.may_preorder_ab = false;
            if (row.may_b.result == VerdictResult::Pass && row.may_a.result != VerdictResult::Pass)
                report.may_preorder_ba = false;
        }
        if (definitive(row.must_a) && definitive(row.must_b)) {
            if (row.must_a.result == VerdictResult::Pass && row.must_b.result != VerdictResult::Pass)
                report.must_preorder_ab = false;
            if (row.must_b.result == VerdictResult::Pass && row.must_a.result != VerdictResult::Pass)
                report.must_preorder_ba = false;
        }
    }
    return report;
}

} // namespace pstest
