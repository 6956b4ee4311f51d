#pragma once

// JSON and DOT report assembly. Every record carries a versioned "schema"
// tag; field layouts are documented in docs/json-reports.md. nlohmann::json
// with its default std::map backing keeps key order sorted, so serialized
// output is byte-stable for fixed inputs.

#include <string>

#include "json.hpp"
#include "pstest/equivalence.hpp"
#include "pstest/explorer.hpp"
#include "pstest/testing.hpp"

namespace pstest {

using Json = nlohmann::json;

inline Json bounds_json(const Bounds& b) {
    return Json{
        {"max_depth", b.max_depth},
        {"max_states", b.max_states},
        {"max_instances", b.max_instances == no_cap ? Json(nullptr) : Json(b.max_instances)},
    };
}

inline Json stats_json(const ExplorationStats& s) {
    return Json{
        {"states", s.states},
        {"edges", s.edges},
        {"cap_hits", s.cap_hits},
        {"truncations", s.truncations},
    };
}

inline Json multiset_json(const Multiset& m) {
    Json out = Json::object();
    for (const auto& [sym, n] : m)
        out[sym] = n;
    return out;
}

inline Json trace_json(const Trace& t) {
    Json steps = Json::array();
    for (const auto& label : t.labels)
        steps.push_back(multiset_json(label));
    return Json{
        {"steps", steps},
        {"kind", t.kind == Trace::Kind::Maximal ? "maximal" : "cut"},
    };
}

inline Json verdict_json(const Verdict& v) {
    Json witness = Json::array();
    for (const auto& key : v.witness)
        witness.push_back(state_tag(key));
    return Json{
        {"result", verdict_name(v.result)},
        {"witness", witness},
        {"reason", v.reason},
    };
}

// pstest/verdict@1: one observer applied to one system under one mode.
inline Json verdict_report(const std::string& system, const std::string& observer,
                           SemanticsMode mode, const Verdict& may, const Verdict& must,
                           const Bounds& bounds) {
    return Json{
        {"schema", "pstest/verdict@1"},
        {"system", system},
        {"observer", observer},
        {"mode", mode_name(mode)},
        {"bounds", bounds_json(bounds)},
        {"may", verdict_json(may)},
        {"must", verdict_json(must)},
        {"stats", stats_json(must.stats)},
    };
}

// pstest/traces@1: bounded trace set of a system.
inline Json traces_report(const std::string& system, SemanticsMode mode, std::uint32_t k,
                          const Bounds& bounds, const Lts& lts, const std::set<Trace>& traces) {
    Json list = Json::array();
    for (const auto& t : traces)
        list.push_back(trace_json(t));
    return Json{
        {"schema", "pstest/traces@1"},
        {"system", system},
        {"mode", mode_name(mode)},
        {"k", k},
        {"bounds", bounds_json(bounds)},
        {"complete", lts.complete()},
        {"stats", stats_json(lts.stats)},
        {"traces", list},
    };
}

// pstest/lts@1: full bounded transition graph.
inline Json lts_report(const std::string& system, SemanticsMode mode, const Bounds& bounds,
                       const Lts& lts) {
    Json states = Json::array();
    for (std::uint32_t s = 0; s < lts.size(); ++s)
        states.push_back(Json{
            {"id", s},
            {"tag", state_tag(lts.keys[s])},
            {"depth", lts.depth[s]},
            {"truncated", lts.truncated.count(s) != 0},
        });
    Json edges = Json::array();
    for (std::uint32_t s = 0; s < lts.size(); ++s)
        for (const auto& e : lts.edges[s])
            edges.push_back(Json{
                {"from", s},
                {"to", e.target},
                {"label", multiset_json(e.label)},
            });
    return Json{
        {"schema", "pstest/lts@1"},
        {"system", system},
        {"mode", mode_name(mode)},
        {"bounds", bounds_json(bounds)},
        {"initial", lts.initial()},
        {"complete", lts.complete()},
        {"stats", stats_json(lts.stats)},
        {"states", states},
        {"edges", edges},
    };
}

// pstest/suite-report@1: verdict matrix for two systems over an observer suite.
inline Json suite_report_json(const std::string& system_a, const std::string& system_b,
                              SemanticsMode mode, const Bounds& bounds, const SuiteReport& rep) {
    Json rows = Json::array();
    for (const auto& row : rep.rows)
        rows.push_back(Json{
            {"observer", row.observer},
            {"may_a", verdict_name(row.may_a.result)},
            {"must_a", verdict_name(row.must_a.result)},
            {"may_b", verdict_name(row.may_b.result)},
            {"must_b", verdict_name(row.must_b.result)},
        });
    return Json{
        {"schema", "pstest/suite-report@1"},
        {"system_a", system_a},
        {"system_b", system_b},
        {"mode", mode_name(mode)},
        {"bounds", bounds_json(bounds)},
        {"observers", rows},
        {"may_preorder_ab", rep.may_preorder_ab},
        {"may_preorder_ba", rep.may_preorder_ba},
        {"must_preorder_ab", rep.must_preorder_ab},
        {"must_preorder_ba", rep.must_preorder_ba},
        {"may_equivalent", rep.may_equivalent()},
        {"must_equivalent", rep.must_equivalent()},
        {"indistinguishable", rep.indistinguishable()},
        {"any_inconclusive", rep.any_inconclusive},
    };
}

// pstest/bisim@1
inline Json bisim_report(const std::string& system_a, const std::string& system_b,
                         SemanticsMode mode, std::uint32_t k, const Bounds& bounds,
                         const BisimResult& res) {
    const char* kind = res.kind == BisimResult::Kind::Bisimilar     ? "Bisimilar"
                       : res.kind == BisimResult::Kind::NotBisimilar ? "NotBisimilar"
                                                                     : "Inconclusive";
    Json seq = Json::array();
    for (const auto& label : res.sequence)
        seq.push_back(multiset_json(label));
    return Json{
        {"schema", "pstest/bisim@1"},
        {"system_a", system_a},
        {"system_b", system_b},
        {"mode", mode_name(mode)},
        {"k", k},
        {"bounds", bounds_json(bounds)},
        {"result", kind},
        {"exact", res.exact},
        {"depth", res.depth},
        {"sequence", seq},
    };
}

// pstest/trace-equiv@1
inline Json trace_equiv_report(const std::string& system_a, const std::string& system_b,
                               SemanticsMode mode, std::uint32_t k, const Bounds& bounds,
                               const TraceEquivResult& res) {
    const char* kind = res.kind == TraceEquivResult::Kind::Equal       ? "Equal"
                       : res.kind == TraceEquivResult::Kind::Different ? "Different"
                                                                       : "Inconclusive";
    Json out{
        {"schema", "pstest/trace-equiv@1"},
        {"system_a", system_a},
        {"system_b", system_b},
        {"mode", mode_name(mode)},
        {"k", k},
        {"bounds", bounds_json(bounds)},
        {"result", kind},
        {"witness", nullptr},
        {"witness_side", nullptr},
    };
    if (res.witness) {
        out["witness"] = trace_json(*res.witness);
        out["witness_side"] = std::string(1, res.witness_side);
    }
    return out;
}

// DOT view of the stable refinement classes: one cluster per class, node
// names prefixed a/b by source graph.
inline std::string partition_dot(const Lts& a, const Lts& b, const PartitionExport& part) {
    std::string out = "digraph partition {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n";
    for (std::size_t c = 0; c < part.classes; ++c) {
        std::string members;
        for (std::uint32_t s = 0; s < a.size(); ++s)
            if (part.class_a[s] == c)
                members += "    a" + std::to_string(s) + " [label=\"A" + std::to_string(s) + "\"];\n";
        for (std::uint32_t s = 0; s < b.size(); ++s)
            if (part.class_b[s] == c)
                members += "    b" + std::to_string(s) + " [label=\"B" + std::to_string(s) + "\"];\n";
        if (members.empty())
            continue;
        out += "  subgraph cluster_" + std::to_string(c) + " {\n    label=\"class " +
               std::to_string(c) + "\";\n" + members + "  }\n";
    }
    for (std::uint32_t s = 0; s < a.size(); ++s)
        for (const auto& e : a.edges[s])
            out += "  a" + std::to_string(s) + " -> a" + std::to_string(e.target) + " [label=\"" +
                   detail::dot_escape(e.label.str()) + "\"];\n";
    for (std::uint32_t s = 0; s < b.size(); ++s)
        for (const auto& e : b.edges[s])
            out += "  b" + std::to_string(s) + " -> b" + std::to_string(e.target) + " [label=\"" +
                   detail::dot_escape(e.label.str()) + "\"];\n";
    out += "}\n";
    return out;
}

// Serialize with a stable layout: two-space indent, sorted keys, newline.
inline std::string dump_json(const Json& j) {
    return j.dump(2) + "\n";
}

} // namespace pstest
