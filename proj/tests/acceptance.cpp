// Acceptance gate. Each check below guards one released behaviour end to end
// and prints a single PASS/FAIL line; the binary exits nonzero if any check
// fails or overruns its time budget. Needs the corpus directory (argv[1],
// default "corpus") including corpus/goldens produced by golden_gen.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pstest/dsl.hpp"
#include "pstest/equivalence.hpp"
#include "pstest/testing.hpp"

#include "gen.hpp"
#include "path_oracle.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace pstest;

namespace {

fs::path corpus_root = "corpus";

constexpr SemanticsMode both_modes[] = {SemanticsMode::AtLeastOne, SemanticsMode::Maximal};

SourceSpec load(const std::string& rel) {
    return parse_spec_file((corpus_root / rel).string());
}

std::vector<ObserverTemplate> load_shipped_suite() {
    std::vector<ObserverTemplate> suite;
    char name[16];
    for (int i = 1; i <= 20; ++i) {
        std::snprintf(name, sizeof name, "s%02d.psys", i);
        SourceSpec s = load(std::string("suite/") + name);
        suite.push_back(*s.observer);
    }
    return suite;
}

bool definitive(const Verdict& v) { return v.result != VerdictResult::Inconclusive; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// 1. The trace-equal corpus pair must split under testing: equal trace sets at
//    k=3 but opposite must verdicts against the distinguishing observer.

std::string check_trace_test_separation() {
    SourceSpec commit = load("commit.psys");
    SourceSpec defer = load("defer.psys");
    SourceSpec dist = load("dist.psys");
    if (!dist.observer)
        return "dist.psys did not parse as an observer";

    const std::set<std::string> expected = {"{}{alpha}{beta} (maximal)",
                                            "{}{alpha}{gamma} (maximal)"};
    for (SemanticsMode mode : both_modes) {
        Lts la = explore(commit.root, mode, Bounds{});
        Lts lb = explore(defer.root, mode, Bounds{});
        TraceEquivResult te = trace_equiv_bounded(la, lb, 3);
        if (te.kind != TraceEquivResult::Kind::Equal)
            return std::string("commit/defer not trace-equal at k=3 under ") + mode_name(mode);
        for (const Lts* l : {&la, &lb}) {
            std::set<std::string> got;
            for (const auto& t : traces_bounded(*l, 3))
                got.insert(t.str());
            if (got != expected) {
                std::ostringstream ss;
                ss << "unexpected k=3 trace set under " << mode_name(mode) << ":";
                for (const auto& s : got)
                    ss << " " << s;
                return ss.str();
            }
        }

        RunningTest ta = compose_running_test(*dist.observer, commit.root);
        RunningTest tc = compose_running_test(*dist.observer, defer.root);
        Verdict must_a = must_check(ta, mode, Bounds{});
        Verdict must_c = must_check(tc, mode, Bounds{});
        Verdict may_a = may_check(ta, mode, Bounds{});
        Verdict may_c = may_check(tc, mode, Bounds{});
        if (must_a.result != VerdictResult::Fail)
            return std::string("must(dist, commit) is not Fail under ") + mode_name(mode) +
                   " (got " + verdict_name(must_a.result) + ")";
        if (must_c.result != VerdictResult::Pass)
            return std::string("must(dist, defer) is not Pass under ") + mode_name(mode) +
                   " (got " + verdict_name(must_c.result) + ")";
        if (may_a.result != VerdictResult::Pass || may_c.result != VerdictResult::Pass)
            return std::string("may verdicts are not both Pass under ") + mode_name(mode);
    }
    return "";
}

// ---------------------------------------------------------------------------
// 2. The testing-equal corpus pair must split under bisimulation while the
//    shipped 20-observer suite cannot tell the two systems apart.

std::string check_test_bisim_separation() {
    SourceSpec commit = load("commit.psys");
    SourceSpec merged = load("merged.psys");
    std::vector<ObserverTemplate> suite = load_shipped_suite();

    for (SemanticsMode mode : both_modes) {
        Lts la = explore(commit.root, mode, Bounds{});
        Lts lb = explore(merged.root, mode, Bounds{});
        if (!la.complete() || !lb.complete())
            return std::string("corpus pair not fully explorable under ") + mode_name(mode);
        BisimResult bs = bisim_bounded(la, lb, 16);
        if (bs.kind != BisimResult::Kind::NotBisimilar)
            return std::string("commit/merged not separated by bisimulation under ") +
                   mode_name(mode);
        if (!bisim_replay_separates(la, lb, bs.sequence))
            return "bisimulation witness sequence does not replay";

        SuiteReport rep = suite_compare(commit.root, merged.root, suite, mode, Bounds{});
        if (rep.rows.size() != suite.size())
            return "suite report dropped rows";
        if (rep.any_inconclusive)
            return std::string("shipped suite has inconclusive rows under ") + mode_name(mode);
        for (const auto& row : rep.rows)
            if (row.may_a.result != row.may_b.result || row.must_a.result != row.must_b.result)
                return "shipped observer " + row.observer + " distinguishes commit/merged under " +
                       mode_name(mode);
        if (!rep.indistinguishable())
            return "suite report preorders disagree with identical rows";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 3. Corpus goldens replay: the engine must reproduce the committed verdicts
//    under both modes. The goldens themselves were minted by the independent
//    reference stepper (golden_gen), so agreement here ties the two together;
//    the recorded state counts must match the engine's full exploration too.

std::string check_corpus_goldens() {
    SourceSpec population = load("population.psys");
    const char* names[] = {"ex1", "ex2", "ex3", "ex4"};

    for (const char* name : names) {
        fs::path golden_path = corpus_root / "goldens" / (std::string(name) + ".json");
        if (!fs::exists(golden_path))
            return "missing " + golden_path.string() + " (run golden_gen first)";
        Json golden = Json::parse(slurp(golden_path));
        Bounds bounds{golden.at("bounds").at("max_depth").get<std::uint32_t>(),
                      golden.at("bounds").at("max_states").get<std::uint32_t>(),
                      golden.at("bounds").at("max_instances").get<std::uint32_t>()};
        if (bounds.max_depth > 8 || bounds.max_instances > 8)
            return std::string(name) + " golden bounds exceed the promised depth/cap ceiling";

        SourceSpec obs = load(std::string(name) + ".psys");
        if (!obs.observer)
            return std::string(name) + ".psys did not parse as an observer";
        RunningTest rt = compose_running_test(*obs.observer, population.root);

        for (SemanticsMode mode : both_modes) {
            const Json& gm = golden.at("modes").at(mode_name(mode));
            std::string g_may = gm.at("may").get<std::string>();
            std::string g_must = gm.at("must").get<std::string>();
            if (g_may == "Inconclusive" || g_must == "Inconclusive")
                return std::string(name) + " golden is not definitive under " + mode_name(mode);

            Verdict e_may = may_check(rt, mode, bounds);
            Verdict e_must = must_check(rt, mode, bounds);
            if (verdict_name(e_may.result) != g_may || verdict_name(e_must.result) != g_must)
                return std::string(name) + " engine disagrees with golden under " +
                       mode_name(mode) + " (may " + verdict_name(e_may.result) + "/" + g_may +
                       ", must " + verdict_name(e_must.result) + "/" + g_must + ")";
            // the golden's state count comes from the reference stepper's full
            // graph; the must check explores the same graph
            if (gm.contains("states") && gm.at("states").get<std::uint64_t>() != e_must.stats.states)
                return std::string(name) + " state count drifted from the reference under " +
                       mode_name(mode);
        }
    }

    for (const char* name : {"ex3", "ex4"}) {
        Json golden = Json::parse(slurp(corpus_root / "goldens" / (std::string(name) + ".json")));
        if (golden.at("modes").at("maximal").at("may").get<std::string>() != "Pass")
            return std::string(name) + " is not may-Pass under maximal mode";
    }
    return "";
}

// ---------------------------------------------------------------------------
// 4. One-step conformance: the engine's transition sets must equal the
//    brute-force oracle's on 500 random micro systems, uncapped and capped.

std::map<int, oracle::Counts> to_counts(const std::map<int, InstanceSelection>& sel) {
    std::map<int, oracle::Counts> out;
    for (const auto& [label, s] : sel)
        out[label] = s.counts;
    return out;
}

std::set<std::string> engine_transition_texts(const StepResult& res) {
    std::set<std::string> texts;
    for (const auto& [st, succ] : res.steps)
        texts.insert(oracle::transition_text(to_counts(st.selections), st.root_out, succ));
    return texts;
}

std::set<std::string> oracle_transition_texts(const std::vector<oracle::Transition>& steps) {
    std::set<std::string> texts;
    for (const auto& t : steps)
        texts.insert(oracle::transition_text(t.selections, t.root_out, t.successor));
    return texts;
}

std::string describe_mismatch(int i, const char* what, const std::set<std::string>& eng,
                              const std::set<std::string>& ora) {
    std::ostringstream ss;
    ss << "micro system #" << i << " " << what << ": engine " << eng.size() << " transitions, "
       << "oracle " << ora.size();
    for (const auto& t : eng)
        if (!ora.count(t)) {
            ss << "; engine-only: " << t;
            break;
        }
    for (const auto& t : ora)
        if (!eng.count(t)) {
            ss << "; oracle-only: " << t;
            break;
        }
    return ss.str();
}

std::string check_sos_conformance() {
    gen::Rng rng(914404);
    for (int i = 0; i < 500; ++i) {
        MembraneNode sys = gen::micro_system(rng);
        for (SemanticsMode mode : both_modes) {
            StepResult eng = system_steps(sys, mode);
            bool ora_cap = false;
            auto ora = oracle::sos_steps(sys, mode, no_cap, &ora_cap);
            std::set<std::string> es = engine_transition_texts(eng);
            std::set<std::string> os = oracle_transition_texts(ora);
            if (es != os)
                return describe_mismatch(i, mode_name(mode), es, os);
            if (eng.cap_hit || ora_cap)
                return "cap flag raised without a cap";
        }
        // capped at-least-one run: transition sets and the cap flag must agree
        bool ora_cap = false;
        StepResult eng = system_steps(sys, SemanticsMode::AtLeastOne, 2);
        auto ora = oracle::sos_steps(sys, SemanticsMode::AtLeastOne, 2, &ora_cap);
        std::set<std::string> es = engine_transition_texts(eng);
        std::set<std::string> os = oracle_transition_texts(ora);
        if (es != os)
            return describe_mismatch(i, "at-least-one cap 2", es, os);
        if (eng.cap_hit != ora_cap) {
            std::ostringstream ss;
            ss << "micro system #" << i << " cap flag: engine " << eng.cap_hit << ", oracle "
               << ora_cap;
            return ss.str();
        }
    }
    return "";
}

// ---------------------------------------------------------------------------
// 5. Step invariants on 1000 random systems (conservation, gating, liveness,
//    maximality, mode inclusion) plus verdict monotonicity on 1000 random
//    running tests.

void index_nodes(const MembraneNode& n, std::map<int, const MembraneNode*>& out) {
    out[n.label] = &n;
    for (const auto& c : n.children)
        index_nodes(c, out);
}

void index_parents(const MembraneNode& n, int parent, std::map<int, int>& out) {
    out[n.label] = parent;
    for (const auto& c : n.children)
        index_parents(c, n.label, out);
}

const EvolutionRule* find_rule(const MembraneNode& node, const std::string& id) {
    for (const auto& r : node.content.rules->rules)
        if (r.id == id)
            return &r;
    return nullptr;
}

std::uint32_t total_objects(const MembraneNode& n) {
    std::uint32_t t = n.content.objects.total();
    for (const auto& c : n.children)
        t += total_objects(c);
    return t;
}

std::string step_key(const SystemStep& st, const MembraneNode& succ) {
    std::string key;
    for (const auto& [label, sel] : st.selections)
        key += std::to_string(label) + sel.str();
    return key + "|" + st.root_out.str() + "|" + canonical_key(succ);
}

// Replays one step against the pre state: selections must be enabled and
// correctly counted, every routed multiset must land where it should, and the
// per-membrane conservation equation must close.
std::string audit_step(const MembraneNode& state, const SystemStep& st, const MembraneNode& succ,
                       SemanticsMode mode) {
    std::map<int, const MembraneNode*> pre, post;
    index_nodes(state, pre);
    index_nodes(succ, post);
    if (pre.size() != post.size())
        return "membrane set changed across a step";

    std::uint64_t instances = 0;
    std::map<int, Multiset> consumed, here, recv_parent, recv_children;
    Multiset root_out;
    std::map<int, int> parent;
    index_parents(state, 0, parent);

    for (const auto& [label, sel] : st.selections) {
        auto it = pre.find(label);
        if (it == pre.end())
            return "selection names an unknown membrane";
        const MembraneNode& node = *it->second;
        if (sel.counts.empty())
            return "empty selection recorded for membrane " + std::to_string(label);
        for (const auto& [id, n] : sel.counts) {
            if (n == 0)
                return "zero-count selection entry";
            instances += n;
            const EvolutionRule* r = find_rule(node, id);
            if (!r)
                return "selection names unknown rule '" + id + "'";
            if (!detail::gate_ok(*r, node.content.objects))
                return "gated rule '" + id + "' was applied";
            consumed[label].add_scaled(r->lhs, n);
            here[label].add_scaled(r->here, n);
            if (label == state.label)
                root_out.add_scaled(r->out, n);
            else
                recv_children[parent.at(label)].add_scaled(r->out, n);
            for (const auto& [l, m] : r->ins)
                recv_parent[l].add_scaled(m, n);
        }
        if (!node.content.objects.contains(consumed[label]))
            return "selection overcommits membrane " + std::to_string(label);
    }
    if (st.selections.empty() || instances == 0)
        return "step applies no instance";
    if (st.root_out != root_out)
        return "skin output does not match the selected rules";

    for (const auto& [label, node] : pre) {
        MembraneDelta d;
        if (st.deltas.count(label))
            d = st.deltas.at(label);
        if (d.consumed != consumed[label] || d.here_produced != here[label])
            return "delta disagrees with selections at membrane " + std::to_string(label);
        if (d.received_from_parent != recv_parent[label] ||
            d.received_from_children != recv_children[label])
            return "routing disagrees with selections at membrane " + std::to_string(label);
        Multiset expect = node->content.objects;
        expect.subtract(d.consumed);
        expect += d.here_produced;
        expect += d.received_from_parent;
        expect += d.received_from_children;
        if (post.at(label)->content.objects != expect)
            return "conservation violated at membrane " + std::to_string(label);
    }

    if (mode == SemanticsMode::Maximal) {
        for (const auto& [label, node] : pre) {
            Multiset remaining = node->content.objects;
            remaining.subtract(consumed[label]);
            for (const auto& r : node->content.rules->rules)
                if (detail::gate_ok(r, node->content.objects) && !r.lhs.empty() &&
                    remaining.contains(r.lhs))
                    return "maximal step leaves an addable instance of '" + r.id + "'";
        }
    }
    return "";
}

std::string check_step_invariants() {
    gen::Rng rng(914405);
    for (int i = 0; i < 1000; ++i) {
        MembraneNode sys = gen::small_system(rng);
        std::vector<MembraneNode> states = {sys};
        StepResult first = system_steps(sys, SemanticsMode::AtLeastOne);
        if (!first.steps.empty()) {
            states.push_back(first.steps.front().second);
            if (first.steps.size() > 1)
                states.push_back(first.steps.back().second);
        }
        for (std::size_t s = 0; s < states.size(); ++s) {
            // grown successors can make uncapped enumeration expensive;
            // the initial state is always cheap
            if (s > 0 && total_objects(states[s]) > 10)
                continue;
            const MembraneNode& state = states[s];
            StepResult alo = system_steps(state, SemanticsMode::AtLeastOne);
            StepResult maxi = system_steps(state, SemanticsMode::Maximal);
            std::set<std::string> alo_keys;
            for (const auto& [st, succ] : alo.steps) {
                std::string err = audit_step(state, st, succ, SemanticsMode::AtLeastOne);
                if (!err.empty())
                    return "system #" + std::to_string(i) + ": " + err;
                alo_keys.insert(step_key(st, succ));
            }
            for (const auto& [st, succ] : maxi.steps) {
                std::string err = audit_step(state, st, succ, SemanticsMode::Maximal);
                if (!err.empty())
                    return "system #" + std::to_string(i) + " (maximal): " + err;
                if (!alo_keys.count(step_key(st, succ)))
                    return "system #" + std::to_string(i) +
                           ": maximal step missing from at-least-one steps";
            }
        }
    }
    return "";
}

std::uint32_t rule_total(const MembraneNode& n) {
    std::uint32_t t = static_cast<std::uint32_t>(n.content.rules->rules.size());
    for (const auto& c : n.children)
        t += rule_total(c);
    return t;
}

// Definitive verdicts must never flip when bounds grow: a Pass/Fail found at
// tight bounds may degrade to Inconclusive under a larger state budget (BFS
// order shifts), but a reversal is a bug, and a graph that was complete at the
// small bounds must keep its verdict verbatim.
std::string check_verdict_monotonicity() {
    gen::Rng rng(914406);
    const Bounds b1{4, 300, 2};
    const Bounds b2{6, 800, 4};
    for (int i = 0; i < 1000; ++i) {
        MembraneNode sys;
        ObserverTemplate obs = gen::observer(rng, "w");
        do {
            sys = gen::small_system(rng);
        } while (rule_total(sys) + obs.skin.rules->rules.size() > 6);
        RunningTest rt = compose_running_test(obs, sys, "w", "sut");
        SemanticsMode mode = both_modes[i % 2];

        Verdict may1 = may_check(rt, mode, b1);
        Verdict may2 = may_check(rt, mode, b2);
        Verdict must1 = must_check(rt, mode, b1);
        Verdict must2 = must_check(rt, mode, b2);

        auto where = [&](const char* what) {
            return "pair #" + std::to_string(i) + " (" + mode_name(mode) + "): " + what;
        };
        if (may1.result == VerdictResult::Pass && may2.result == VerdictResult::Fail)
            return where("may flipped Pass to Fail under larger bounds");
        if (must1.result == VerdictResult::Fail && must2.result == VerdictResult::Pass)
            return where("must flipped Fail to Pass under larger bounds");
        // a definitive may-Fail / must-Pass needs the complete graph, which is
        // bound-independent, so those verdicts must carry over exactly
        if (may1.result == VerdictResult::Fail && may2.result != VerdictResult::Fail)
            return where("may Fail on a complete graph did not carry over");
        if (must1.result == VerdictResult::Pass && must2.result != VerdictResult::Pass)
            return where("must Pass on a complete graph did not carry over");
        if (must1.result == VerdictResult::Pass && may1.result != VerdictResult::Pass)
            return where("must Pass without may Pass at the small bounds");
        if (must2.result == VerdictResult::Pass && may2.result != VerdictResult::Pass)
            return where("must Pass without may Pass at the large bounds");
    }
    return "";
}

std::string check_property_suites() {
    std::string err = check_step_invariants();
    if (!err.empty())
        return err;
    return check_verdict_monotonicity();
}

// ---------------------------------------------------------------------------
// 6. Equivalence hierarchy: bisimilarity must imply suite-indistinguishability
//    and trace equality on random fully-explorable pairs, and the corpus pairs
//    must show each strict inclusion.

MembraneNode rename_rule_ids_rec(const MembraneNode& n) {
    MembraneNode out;
    out.label = n.label;
    out.content.objects = n.content.objects;
    std::vector<EvolutionRule> rules;
    for (EvolutionRule r : n.content.rules->rules) {
        r.id += "x";
        rules.push_back(std::move(r));
    }
    out.content.rules = rules.empty() ? empty_rule_set() : make_rule_set(std::move(rules));
    for (const auto& c : n.children)
        out.children.push_back(rename_rule_ids_rec(c));
    return out;
}

// Same behaviour, different rule names: transition labels carry emitted
// objects only, so this twin is bisimilar to the original by construction.
MembraneNode rename_rule_ids(const MembraneNode& n) {
    MembraneNode out = rename_rule_ids_rec(n);
    out.normalize();
    return out;
}

std::string check_hierarchy_random() {
    gen::Rng rng(914407);
    const Bounds bb{6, 2000, 4};
    const std::uint32_t ks[] = {1, 2, 3, 4, 8};
    int made = 0;
    long attempts = 0;
    while (made < 200) {
        if (++attempts > 20000)
            return "could not assemble 200 fully explorable pairs";
        MembraneNode a = gen::small_system(rng);
        Lts la = explore(a, SemanticsMode::Maximal, bb);
        if (!la.complete())
            continue;
        bool twin = made % 2 == 0;
        MembraneNode b = twin ? rename_rule_ids(a) : gen::small_system(rng);
        Lts lb = explore(b, SemanticsMode::Maximal, bb);
        if (!lb.complete())
            continue;
        ++made;
        auto where = [&](const char* what) {
            return "pair #" + std::to_string(made) + (twin ? " (twin): " : ": ") + what;
        };

        BisimResult bs = bisim_bounded(la, lb, 64);
        if (bs.kind == BisimResult::Kind::Inconclusive)
            return where("bisimulation inconclusive on complete graphs");
        if (twin && bs.kind != BisimResult::Kind::Bisimilar)
            return where("renamed twin not recognized as bisimilar");

        if (bs.kind == BisimResult::Kind::Bisimilar) {
            if (!bs.exact)
                return where("bisimilarity on complete graphs not exact");
            for (std::uint32_t k : ks)
                if (trace_equiv_bounded(la, lb, k).kind != TraceEquivResult::Kind::Equal)
                    return where("bisimilar pair trace-differs");
            std::vector<ObserverTemplate> suite;
            for (int j = 1; j <= 4; ++j)
                suite.push_back(gen::observer(rng, "w" + std::to_string(j)));
            SuiteReport rep = suite_compare(a, b, suite, SemanticsMode::Maximal, bb);
            for (const auto& row : rep.rows) {
                bool all_definitive = definitive(row.may_a) && definitive(row.may_b) &&
                                      definitive(row.must_a) && definitive(row.must_b);
                // twins have isomorphic running tests, so even inconclusive
                // rows must agree; organic pairs are only bound to agree where
                // the checker finished
                if ((twin || all_definitive) &&
                    (row.may_a.result != row.may_b.result ||
                     row.must_a.result != row.must_b.result))
                    return where(("observer " + row.observer +
                                  " distinguishes a bisimilar pair")
                                     .c_str());
            }
        } else {
            if (!bisim_replay_separates(la, lb, bs.sequence))
                return where("bisimulation witness does not replay");
        }
    }
    return "";
}

std::string check_hierarchy_corpus() {
    SourceSpec commit = load("commit.psys");
    SourceSpec defer = load("defer.psys");
    SourceSpec merged = load("merged.psys");
    SourceSpec dist = load("dist.psys");
    std::vector<ObserverTemplate> suite = load_shipped_suite();
    const std::uint32_t ks[] = {1, 2, 3, 8};

    for (SemanticsMode mode : both_modes) {
        Lts lc = explore(commit.root, mode, Bounds{});
        Lts ld = explore(defer.root, mode, Bounds{});
        Lts lm = explore(merged.root, mode, Bounds{});
        const char* mn = mode_name(mode);

        // strictness of the bisimulation layer: commit/merged agree under the
        // shipped suite and on traces yet are not bisimilar
        BisimResult cm = bisim_bounded(lc, lm, 16);
        if (cm.kind != BisimResult::Kind::NotBisimilar || !bisim_replay_separates(lc, lm, cm.sequence))
            return std::string("commit/merged bisimulation layer broke under ") + mn;
        SuiteReport rep_cm = suite_compare(commit.root, merged.root, suite, mode, Bounds{});
        if (rep_cm.any_inconclusive || !rep_cm.indistinguishable())
            return std::string("commit/merged distinguished by the shipped suite under ") + mn;
        for (std::uint32_t k : ks)
            if (trace_equiv_bounded(lc, lm, k).kind != TraceEquivResult::Kind::Equal)
                return std::string("commit/merged trace sets differ under ") + mn;

        // strictness of the testing layer: adding the distinguishing observer
        // splits commit/defer, and a suite split must imply non-bisimilarity
        std::vector<ObserverTemplate> augmented = suite;
        augmented.push_back(*dist.observer);
        SuiteReport rep_cd = suite_compare(commit.root, defer.root, augmented, mode, Bounds{});
        if (rep_cd.indistinguishable())
            return std::string("augmented suite fails to distinguish commit/defer under ") + mn;
        BisimResult cd = bisim_bounded(lc, ld, 16);
        if (cd.kind != BisimResult::Kind::NotBisimilar)
            return std::string("suite-distinguished pair not NotBisimilar under ") + mn;
        for (std::uint32_t k : ks)
            if (trace_equiv_bounded(lc, ld, k).kind != TraceEquivResult::Kind::Equal)
                return std::string("commit/defer trace sets differ under ") + mn;

        BisimResult dm = bisim_bounded(ld, lm, 16);
        if (dm.kind != BisimResult::Kind::NotBisimilar || !bisim_replay_separates(ld, lm, dm.sequence))
            return std::string("defer/merged bisimulation layer broke under ") + mn;
        for (std::uint32_t k : ks)
            if (trace_equiv_bounded(ld, lm, k).kind != TraceEquivResult::Kind::Equal)
                return std::string("defer/merged trace sets differ under ") + mn;
    }
    return "";
}

std::string check_hierarchy() {
    std::string err = check_hierarchy_random();
    if (!err.empty())
        return err;
    return check_hierarchy_corpus();
}

// ---------------------------------------------------------------------------
// 7. Round-trip identity on corpus files and random specs, then a fuzz run
//    that must never escape the parser's error type.

std::string round_trip(const std::string& text, const char* what) {
    SourceSpec s1 = parse_spec(text);
    std::string one = serialize_spec(s1);
    SourceSpec s2 = parse_spec(one);
    std::string two = serialize_spec(s2);
    if (one != two)
        return std::string(what) + ": serialized form is not a fixed point";
    if (s1.kind != s2.kind)
        return std::string(what) + ": kind changed across the round trip";
    if (s1.kind == SourceSpec::Kind::System) {
        if (!structural_equal(s1.root, s2.root))
            return std::string(what) + ": system changed across the round trip";
    } else {
        if (!s2.observer)
            return std::string(what) + ": observer lost across the round trip";
        if (s1.observer->skin.rules->digest != s2.observer->skin.rules->digest ||
            !(s1.observer->skin.objects == s2.observer->skin.objects))
            return std::string(what) + ": observer skin changed across the round trip";
    }
    return "";
}

std::string mutate_text(const std::string& base, gen::Rng& rng) {
    static const std::string bytes = " \t\n{}()[],:|->*#\"'x01289abdeforu";
    std::string s = base;
    std::uint32_t edits = gen::pick(rng, 1, 8);
    for (std::uint32_t e = 0; e < edits && !s.empty(); ++e) {
        std::size_t pos = rng() % s.size();
        switch (rng() % 5) {
        case 0:
            s[pos] = bytes[rng() % bytes.size()];
            break;
        case 1:
            s.insert(pos, 1, bytes[rng() % bytes.size()]);
            break;
        case 2:
            s.erase(pos, std::min<std::size_t>(1 + rng() % 16, s.size() - pos));
            break;
        case 3: {
            std::size_t len = std::min<std::size_t>(1 + rng() % 64, s.size() - pos);
            s.insert(rng() % (s.size() + 1), s.substr(pos, len));
            break;
        }
        default:
            s.resize(pos);
            break;
        }
        if (s.size() > 8192)
            s.resize(8192);
    }
    return s;
}

std::string token_soup(gen::Rng& rng) {
    static const std::vector<std::string> tokens = {
        "system",   "observer", "alphabet", "membrane",   "objects", "rule",
        "hole",     "forall",   "if",       "in",         "here",    "out",
        "promoters", "inhibitors", "omega",  "{",          "}",       "(",
        ")",        "[",        "]",        ",",          ":",       "|",
        "->",       "=",        "!=",       "and",        "or",      "\"x\"",
        "a",        "b",        "r1",       "1",          "2",       "0",
        "99999999", "999999999999999999",   "# note",     "\n",      "\"",
        "'",        "@",        "\\",       "..",         "-",       ">"};
    std::string s;
    std::uint32_t n = gen::pick(rng, 0, 48);
    for (std::uint32_t i = 0; i < n; ++i) {
        s += tokens[rng() % tokens.size()];
        if (rng() % 4 != 0)
            s += ' ';
    }
    return s;
}

std::string check_round_trip_and_fuzz() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(corpus_root))
        if (entry.is_regular_file() && entry.path().extension() == ".psys")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() != 29)
        return "expected 29 corpus files, found " + std::to_string(files.size());

    std::vector<std::string> texts;
    for (const auto& f : files) {
        texts.push_back(slurp(f));
        std::string err = round_trip(texts.back(), f.filename().string().c_str());
        if (!err.empty())
            return err;
    }

    gen::Rng rng(914408);
    for (int i = 0; i < 1000; ++i) {
        SourceSpec spec = gen::source_spec(rng, "g" + std::to_string(i));
        std::string err = round_trip(serialize_spec(spec), "random spec");
        if (!err.empty())
            return err + " (#" + std::to_string(i) + ")";
    }

    long rejected = 0, accepted = 0;
    for (long i = 0; i < 100000; ++i) {
        std::string input = (i % 5 < 2) ? mutate_text(texts[i % texts.size()], rng)
                                        : token_soup(rng);
        try {
            SourceSpec parsed = parse_spec(input);
            (void)parsed;
            ++accepted;
        } catch (const Error&) {
            ++rejected;
        } catch (const std::exception& e) {
            return "fuzz iteration " + std::to_string(i) + " escaped the parser error type: " +
                   e.what();
        }
    }
    if (rejected == 0)
        return "fuzz rejected nothing; the harness is not exercising the parser";
    (void)accepted;
    return "";
}

struct Check {
    const char* name;
    double budget_seconds; // 0 = no budget
    std::function<std::string()> run;
};

} // namespace

int main(int argc, char** argv) {
    if (argc > 1)
        corpus_root = argv[1];
    if (!fs::exists(corpus_root)) {
        std::cerr << "corpus directory '" << corpus_root.string() << "' not found\n";
        return 1;
    }

    const Check checks[] = {
        {"trace-equal pair separates under testing", 1.0, check_trace_test_separation},
        {"bisimulation finer than the shipped suite", 5.0, check_test_bisim_separation},
        {"corpus goldens replay against engine and reference", 60.0, check_corpus_goldens},
        {"transition sets match the reference on 500 micro systems", 30.0, check_sos_conformance},
        {"step invariants and verdict monotonicity", 0.0, check_property_suites},
        {"equivalence hierarchy on random and corpus pairs", 0.0, check_hierarchy},
        {"round-trip identity and parser fuzz", 0.0, check_round_trip_and_fuzz},
    };

    int failures = 0;
    int index = 0;
    for (const auto& c : checks) {
        ++index;
        auto start = std::chrono::steady_clock::now();
        std::string err;
        try {
            err = c.run();
        } catch (const std::exception& e) {
            err = std::string("unexpected exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (err.empty() && c.budget_seconds > 0 && secs > c.budget_seconds) {
            std::ostringstream ss;
            ss << "exceeded the " << c.budget_seconds << " s budget";
            err = ss.str();
        }
        std::printf("[%d/7] %-58s %s  (%.2fs)\n", index, c.name, err.empty() ? "PASS" : "FAIL",
                    secs);
        if (!err.empty()) {
            std::printf("      %s\n", err.c_str());
            ++failures;
        }
    }
    if (failures == 0)
        std::printf("acceptance: all 7 checks passed\n");
    else
        std::printf("acceptance: %d of 7 checks failed\n", failures);
    return failures == 0 ? 0 : 1;
}
