// pstest: workbench for membrane systems expressed as algebra terms.
//
// Subcommands:
//   run     explore the bounded transition graph of a system
//   traces  list the bounded trace set
//   test    compose a system with an observer and compute may/must verdicts
//   equiv   compare two systems (trace sets, bisimulation, observer suite)
//   corpus  re-check a shipped example against its committed golden verdicts
//
// Exit codes: 0 pass/equal/indistinguishable, 1 fail/different/distinguished,
// 2 inconclusive, 3 usage or input errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pstest/dsl.hpp"
#include "pstest/report.hpp"

namespace {

using namespace pstest;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_inconclusive = 2;
constexpr int exit_usage = 3;

struct CommonOpts {
    std::string mode = "at-least-one";
    std::uint32_t max_depth = 64;
    std::uint32_t max_states = 100000;
    std::uint32_t max_instances = 8;
    std::string format = "human";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_format = true) {
    cmd->add_option("--mode", opts.mode, "semantics mode")
        ->check(CLI::IsMember({"at-least-one", "maximal"}))
        ->capture_default_str();
    cmd->add_option("--max-depth", opts.max_depth, "exploration depth bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-states", opts.max_states, "state count bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-instances", opts.max_instances,
                    "per-rule instance cap for at-least-one enumeration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (with_format)
        cmd->add_option("--format", opts.format, "output format")
            ->check(CLI::IsMember({"human", "json", "dot"}))
            ->capture_default_str();
}

SemanticsMode parse_mode(const std::string& s) {
    return s == "maximal" ? SemanticsMode::Maximal : SemanticsMode::AtLeastOne;
}

Bounds make_bounds(const CommonOpts& o) {
    Bounds b;
    b.max_depth = o.max_depth;
    b.max_states = o.max_states;
    b.max_instances = o.max_instances;
    return b;
}

SourceSpec load_system(const std::string& path) {
    SourceSpec spec = parse_spec_file(path);
    if (spec.kind != SourceSpec::Kind::System)
        throw Error(path + ": expected a system, found an observer");
    return spec;
}

SourceSpec load_observer(const std::string& path) {
    SourceSpec spec = parse_spec_file(path);
    if (spec.kind != SourceSpec::Kind::Observer)
        throw Error(path + ": expected an observer, found a system");
    return spec;
}

void warn_all(const SourceSpec& spec) {
    for (const auto& w : spec.warnings)
        std::cerr << "warning: " << spec.name << ": " << w << "\n";
}

int verdict_exit(VerdictResult r) {
    switch (r) {
    case VerdictResult::Pass: return exit_pass;
    case VerdictResult::Fail: return exit_fail;
    case VerdictResult::Inconclusive: return exit_inconclusive;
    }
    return exit_usage;
}

std::string witness_line(const Verdict& v) {
    if (v.witness.empty())
        return "";
    std::string s = "  witness:";
    for (const auto& key : v.witness)
        s += " " + state_tag(key);
    return s + "\n";
}

int cmd_run(const std::string& path, const CommonOpts& opts) {
    SourceSpec spec = load_system(path);
    warn_all(spec);
    SemanticsMode mode = parse_mode(opts.mode);
    Lts lts = explore(spec.root, mode, make_bounds(opts));
    if (opts.format == "json") {
        std::cout << dump_json(lts_report(spec.name, mode, make_bounds(opts), lts));
    } else if (opts.format == "dot") {
        std::cout << lts_to_dot(lts);
    } else {
        std::cout << "system '" << spec.name << "' (" << mode_name(mode) << "): "
                  << lts.stats.states << " states, " << lts.stats.edges << " edges, "
                  << (lts.complete() ? "complete" : "truncated");
        if (lts.stats.cap_hits > 0)
            std::cout << ", instance cap hit " << lts.stats.cap_hits << "x";
        std::cout << "\n";
    }
    return exit_pass;
}

int cmd_traces(const std::string& path, std::uint32_t k, const CommonOpts& opts) {
    SourceSpec spec = load_system(path);
    warn_all(spec);
    SemanticsMode mode = parse_mode(opts.mode);
    Lts lts = explore(spec.root, mode, make_bounds(opts));
    std::set<Trace> traces = traces_bounded(lts, k);
    if (opts.format == "json") {
        std::cout << dump_json(traces_report(spec.name, mode, k, make_bounds(opts), lts, traces));
    } else {
        for (const auto& t : traces)
            std::cout << t.str() << "\n";
        if (traces.empty())
            std::cout << "(no traces: the system performs no step)\n";
    }
    return exit_pass;
}

int cmd_test(const std::string& system_path, const std::string& observer_path, bool want_may,
             const CommonOpts& opts) {
    SourceSpec sys = load_system(system_path);
    SourceSpec obs = load_observer(observer_path);
    warn_all(sys);
    warn_all(obs);
    SemanticsMode mode = parse_mode(opts.mode);
    Bounds bounds = make_bounds(opts);
    RunningTest rt = compose_running_test(*obs.observer, sys.root, obs.name, sys.name);
    Verdict may = may_check(rt, mode, bounds);
    Verdict must = must_check(rt, mode, bounds);
    if (opts.format == "json") {
        std::cout << dump_json(verdict_report(sys.name, obs.name, mode, may, must, bounds));
    } else {
        std::cout << "system '" << sys.name << "' under observer '" << obs.name << "' ("
                  << mode_name(mode) << ")\n";
        std::cout << "may:  " << verdict_name(may.result)
                  << (may.reason.empty() ? "" : " (" + may.reason + ")") << "\n"
                  << witness_line(may);
        std::cout << "must: " << verdict_name(must.result)
                  << (must.reason.empty() ? "" : " (" + must.reason + ")") << "\n"
                  << witness_line(must);
    }
    return verdict_exit(want_may ? may.result : must.result);
}

int cmd_equiv_trace(const SourceSpec& a, const SourceSpec& b, std::uint32_t k,
                    const CommonOpts& opts) {
    SemanticsMode mode = parse_mode(opts.mode);
    Bounds bounds = make_bounds(opts);
    Lts la = explore(a.root, mode, bounds);
    Lts lb = explore(b.root, mode, bounds);
    TraceEquivResult res = trace_equiv_bounded(la, lb, k);
    if (opts.format == "json") {
        std::cout << dump_json(trace_equiv_report(a.name, b.name, mode, k, bounds, res));
    } else {
        switch (res.kind) {
        case TraceEquivResult::Kind::Equal:
            std::cout << "trace sets equal at k=" << k << "\n";
            break;
        case TraceEquivResult::Kind::Different:
            std::cout << "trace sets differ at k=" << k << ": " << res.witness->str()
                      << " only in system " << (res.witness_side == 'a' ? a.name : b.name) << "\n";
            break;
        case TraceEquivResult::Kind::Inconclusive:
            std::cout << "inconclusive: exploration truncated by bounds\n";
            break;
        }
    }
    switch (res.kind) {
    case TraceEquivResult::Kind::Equal: return exit_pass;
    case TraceEquivResult::Kind::Different: return exit_fail;
    default: return exit_inconclusive;
    }
}

int cmd_equiv_bisim(const SourceSpec& a, const SourceSpec& b, std::uint32_t k,
                    const CommonOpts& opts) {
    SemanticsMode mode = parse_mode(opts.mode);
    Bounds bounds = make_bounds(opts);
    Lts la = explore(a.root, mode, bounds);
    Lts lb = explore(b.root, mode, bounds);
    BisimResult res = bisim_bounded(la, lb, k);
    if (opts.format == "dot") {
        std::cout << partition_dot(la, lb, refined_partition(la, lb, k));
    } else if (opts.format == "json") {
        std::cout << dump_json(bisim_report(a.name, b.name, mode, k, bounds, res));
    } else {
        switch (res.kind) {
        case BisimResult::Kind::Bisimilar:
            std::cout << "bisimilar" << (res.exact ? "" : " up to depth " + std::to_string(k))
                      << "\n";
            break;
        case BisimResult::Kind::NotBisimilar: {
            std::cout << "not bisimilar (split at refinement depth " << res.depth
                      << "); distinguishing sequence:";
            for (const auto& l : res.sequence)
                std::cout << " " << l.str();
            std::cout << "\n";
            break;
        }
        case BisimResult::Kind::Inconclusive:
            std::cout << "inconclusive: exploration truncated by bounds\n";
            break;
        }
    }
    switch (res.kind) {
    case BisimResult::Kind::Bisimilar: return exit_pass;
    case BisimResult::Kind::NotBisimilar: return exit_fail;
    default: return exit_inconclusive;
    }
}

int cmd_equiv_suite(const SourceSpec& a, const SourceSpec& b,
                    const std::vector<std::string>& suite_paths, const CommonOpts& opts) {
    if (suite_paths.empty())
        throw Error("--kind suite needs at least one --suite observer file");
    std::vector<ObserverTemplate> suite;
    for (const auto& p : suite_paths) {
        SourceSpec obs = load_observer(p);
        warn_all(obs);
        suite.push_back(*obs.observer);
    }
    SemanticsMode mode = parse_mode(opts.mode);
    Bounds bounds = make_bounds(opts);
    SuiteReport rep = suite_compare(a.root, b.root, suite, mode, bounds);
    if (opts.format == "json") {
        std::cout << dump_json(suite_report_json(a.name, b.name, mode, bounds, rep));
    } else {
        std::cout << "suite comparison of '" << a.name << "' (A) vs '" << b.name << "' (B), "
                  << mode_name(mode) << ":\n";
        for (const auto& row : rep.rows)
            std::cout << "  " << row.observer << ": may A=" << verdict_name(row.may_a.result)
                      << " B=" << verdict_name(row.may_b.result)
                      << ", must A=" << verdict_name(row.must_a.result)
                      << " B=" << verdict_name(row.must_b.result) << "\n";
        std::cout << "  may preorder A<=B: " << (rep.may_preorder_ab ? "yes" : "no")
                  << ", B<=A: " << (rep.may_preorder_ba ? "yes" : "no") << "\n";
        std::cout << "  must preorder A<=B: " << (rep.must_preorder_ab ? "yes" : "no")
                  << ", B<=A: " << (rep.must_preorder_ba ? "yes" : "no") << "\n";
        if (!rep.indistinguishable())
            std::cout << "  suite distinguishes the systems\n";
        else if (rep.any_inconclusive)
            std::cout << "  no distinction found, but some verdicts were inconclusive\n";
        else
            std::cout << "  indistinguishable under this suite\n";
    }
    if (!rep.indistinguishable())
        return exit_fail;
    return rep.any_inconclusive ? exit_inconclusive : exit_pass;
}

std::filesystem::path corpus_root(const std::string& flag_value) {
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("PSTEST_CORPUS_DIR"))
        return env;
    return "corpus";
}

struct GoldenCheck {
    bool drift = false;
    bool inconclusive = false;
};

void check_mode(const Json& golden, const std::string& mode_str, const MembraneNode& system,
                const ObserverTemplate& obs, const Bounds& bounds, GoldenCheck& out,
                const std::string& example) {
    SemanticsMode mode = parse_mode(mode_str);
    RunningTest rt = compose_running_test(obs, system, obs.name, example);
    Verdict may = may_check(rt, mode, bounds);
    Verdict must = must_check(rt, mode, bounds);
    const Json& expect = golden.at("modes").at(mode_str);
    auto cell = [&](const char* name, const Verdict& got) {
        std::string want = expect.at(name).get<std::string>();
        std::string have = verdict_name(got.result);
        bool ok = want == have;
        std::cout << "  " << example << " " << mode_str << " " << name << ": " << have
                  << (ok ? " (matches golden)" : " (golden says " + want + ")") << "\n";
        if (!ok)
            out.drift = true;
        if (got.result == VerdictResult::Inconclusive)
            out.inconclusive = true;
    };
    cell("may", may);
    cell("must", must);
}

int cmd_corpus(const std::string& name, const std::string& dir_flag) {
    namespace fs = std::filesystem;
    fs::path root = corpus_root(dir_flag);
    fs::path golden_path = root / "goldens" / (name + ".json");
    std::ifstream in(golden_path);
    if (!in)
        throw Error("no golden for example '" + name + "' (looked in " + golden_path.string() +
                    "); use --corpus-dir or PSTEST_CORPUS_DIR");
    Json golden = Json::parse(in, nullptr, true, true);

    SourceSpec sys = load_system((root / golden.at("system").get<std::string>()).string());
    SourceSpec obs = load_observer((root / golden.at("observer").get<std::string>()).string());
    warn_all(sys);
    warn_all(obs);
    Bounds bounds;
    bounds.max_depth = golden.at("bounds").at("max_depth").get<std::uint32_t>();
    bounds.max_states = golden.at("bounds").at("max_states").get<std::uint32_t>();
    bounds.max_instances = golden.at("bounds").at("max_instances").get<std::uint32_t>();

    std::cout << "example " << name << ": system '" << sys.name << "', observer '" << obs.name
              << "', depth " << bounds.max_depth << ", cap " << bounds.max_instances << "\n";
    GoldenCheck check;
    check_mode(golden, "at-least-one", sys.root, *obs.observer, bounds, check, name);
    check_mode(golden, "maximal", sys.root, *obs.observer, bounds, check, name);
    if (check.drift) {
        std::cout << "golden drift detected\n";
        return exit_fail;
    }
    std::cout << "all verdicts match the golden\n";
    return check.inconclusive ? exit_inconclusive : exit_pass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for testing and comparing membrane systems"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    std::string run_path;
    CLI::App* run = app.add_subcommand("run", "explore the bounded transition graph");
    run->add_option("system", run_path, "system file")->required();
    add_common(run, run_opts);

    CommonOpts traces_opts;
    std::string traces_path;
    std::uint32_t traces_k = 8;
    CLI::App* traces = app.add_subcommand("traces", "list the bounded trace set");
    traces->add_option("system", traces_path, "system file")->required();
    traces->add_option("--k", traces_k, "trace length bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(traces, traces_opts);

    CommonOpts test_opts;
    std::string test_system, test_observer;
    bool test_may = false, test_must = false;
    CLI::App* test = app.add_subcommand("test", "compute may/must verdicts under an observer");
    test->add_option("--system", test_system, "system file")->required();
    test->add_option("--observer", test_observer, "observer file")->required();
    CLI::Option* may_flag = test->add_flag("--may", test_may, "exit code follows the may verdict");
    test->add_flag("--must", test_must, "exit code follows the must verdict (default)")
        ->excludes(may_flag);
    add_common(test, test_opts);

    CommonOpts equiv_opts;
    std::string equiv_kind = "trace";
    std::vector<std::string> equiv_systems;
    std::vector<std::string> equiv_suite;
    std::uint32_t equiv_k = 8;
    CLI::App* equiv = app.add_subcommand("equiv", "compare two systems");
    equiv->add_option("--kind", equiv_kind, "comparison kind")
        ->check(CLI::IsMember({"trace", "bisim", "suite"}))
        ->capture_default_str();
    equiv->add_option("systems", equiv_systems, "the two system files")
        ->expected(2)
        ->required();
    equiv->add_option("--suite", equiv_suite, "observer files for --kind suite");
    equiv->add_option("--k", equiv_k, "trace length / refinement depth bound")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(equiv, equiv_opts);

    std::string corpus_name;
    std::string corpus_dir;
    std::uint32_t corpus_k = 0;
    CLI::App* corpus = app.add_subcommand("corpus", "re-check a shipped example against goldens");
    corpus->add_option("example", corpus_name, "example name (ex1..ex4)")->required();
    corpus->add_option("--corpus-dir", corpus_dir, "corpus directory (default: ./corpus)");
    corpus->add_option("--k", corpus_k, "ignored: goldens pin their own bounds")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (run->parsed())
            return cmd_run(run_path, run_opts);
        if (traces->parsed())
            return cmd_traces(traces_path, traces_k, traces_opts);
        if (test->parsed())
            return cmd_test(test_system, test_observer, test_may, test_opts);
        if (equiv->parsed()) {
            if (equiv_kind != "bisim" && equiv_opts.format == "dot")
                throw Error("--format dot is only available for --kind bisim");
            SourceSpec a = load_system(equiv_systems[0]);
            SourceSpec b = load_system(equiv_systems[1]);
            warn_all(a);
            warn_all(b);
            if (equiv_kind == "trace")
                return cmd_equiv_trace(a, b, equiv_k, equiv_opts);
            if (equiv_kind == "bisim")
                return cmd_equiv_bisim(a, b, equiv_k, equiv_opts);
            return cmd_equiv_suite(a, b, equiv_suite, equiv_opts);
        }
        if (corpus->parsed())
            return cmd_corpus(corpus_name, corpus_dir);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Json::exception& e) {
        std::cerr << "error: malformed golden: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
