#include <catch2/catch_amalgamated.hpp>

#include "pstest/schema.hpp"

using namespace pstest;

namespace {

SchemaAtom atom(std::vector<std::string> parts, std::uint32_t count = 1) {
    SchemaAtom a;
    a.parts = std::move(parts);
    a.count = count;
    return a;
}

} // namespace

TEST_CASE("guard evaluation") {
    std::map<std::string, std::string> env{{"a", "0"}, {"b", "1"}};

    CHECK(eval_guard(nullptr, env));
    CHECK(eval_guard(guard_cmp(GuardNode::Op::Eq, "a", "0"), env));
    CHECK_FALSE(eval_guard(guard_cmp(GuardNode::Op::Eq, "a", "1"), env));
    CHECK(eval_guard(guard_cmp(GuardNode::Op::Ne, "a", "b"), env));
    CHECK(eval_guard(guard_cmp(GuardNode::Op::Eq, "a", "a"), env));

    // unbound names compare as literals
    CHECK(eval_guard(guard_cmp(GuardNode::Op::Eq, "zz", "zz"), env));
    CHECK_FALSE(eval_guard(guard_cmp(GuardNode::Op::Eq, "zz", "0"), env));

    auto both = guard_combine(GuardNode::Op::And, guard_cmp(GuardNode::Op::Eq, "a", "0"),
                              guard_cmp(GuardNode::Op::Eq, "b", "1"));
    CHECK(eval_guard(both, env));
    auto either = guard_combine(GuardNode::Op::Or, guard_cmp(GuardNode::Op::Eq, "a", "1"),
                                guard_cmp(GuardNode::Op::Eq, "b", "1"));
    CHECK(eval_guard(either, env));
    auto neither = guard_combine(GuardNode::Op::Or, guard_cmp(GuardNode::Op::Eq, "a", "1"),
                                 guard_cmp(GuardNode::Op::Eq, "b", "0"));
    CHECK_FALSE(eval_guard(neither, env));
}

TEST_CASE("expansion enumerates assignments in declaration order") {
    RuleSchema schema;
    schema.params = {{"a", {"0", "1"}}, {"s", {"x", "y"}}};
    schema.rule.id = "r";
    schema.rule.lhs = {atom({"a", "s"})};
    schema.rule.here = {atom({"q"})};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 4);
    CHECK(res.assignments == 4);
    CHECK(res.merged == 0);
    CHECK(res.warnings.empty());

    CHECK(res.rules[0].id == "r__0_x");
    CHECK(res.rules[1].id == "r__0_y");
    CHECK(res.rules[2].id == "r__1_x");
    CHECK(res.rules[3].id == "r__1_y");

    CHECK(res.rules[0].lhs.str() == "{0_x}");
    CHECK(res.rules[3].lhs.str() == "{1_y}");
    CHECK(res.rules[0].here.str() == "{q}");
}

TEST_CASE("guards filter assignments") {
    RuleSchema schema;
    schema.params = {{"a", {"0", "1"}}, {"b", {"0", "1"}}};
    schema.guard = guard_combine(GuardNode::Op::Or, guard_cmp(GuardNode::Op::Ne, "a", "0"),
                                 guard_cmp(GuardNode::Op::Ne, "b", "1"));
    schema.rule.id = "g";
    schema.rule.lhs = {atom({"a", "b", "f"})};
    schema.rule.here = {atom({"hit"})};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 3);
    CHECK(res.rules[0].id == "g__0_0");
    CHECK(res.rules[1].id == "g__1_0");
    CHECK(res.rules[2].id == "g__1_1");
    for (const auto& r : res.rules)
        CHECK(r.lhs.str() != "{0_1_f}");
}

TEST_CASE("unsatisfiable guard warns instead of failing") {
    RuleSchema schema;
    schema.params = {{"a", {"0"}}};
    schema.guard = guard_cmp(GuardNode::Op::Ne, "a", "0");
    schema.rule.id = "dead";
    schema.rule.lhs = {atom({"a"})};

    auto res = expand_rule_schemas({schema});
    CHECK(res.rules.empty());
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].find("dead") != std::string::npos);
}

TEST_CASE("same-effect ground rules merge across schemas") {
    // Two pickings that coincide when the two source variables are equal.
    RuleSchema s1;
    s1.params = {{"a", {"0", "1"}}, {"b", {"0", "1"}}};
    s1.rule.id = "p1";
    s1.rule.lhs = {atom({"a", "b"})};
    s1.rule.here = {atom({"a"})};

    RuleSchema s2 = s1;
    s2.rule.id = "p2";
    s2.rule.here = {atom({"b"})};

    auto res = expand_rule_schemas({s1, s2});
    // p1 grounds: (00->0) (01->0) (10->1) (11->1); p2's (00->0) and (11->1)
    // duplicate p1's, leaving six distinct rules out of eight assignments.
    CHECK(res.assignments == 8);
    CHECK(res.merged == 2);
    CHECK(res.rules.size() == 6);
}

TEST_CASE("parameterless schema is a plain rule") {
    RuleSchema schema;
    schema.rule.id = "plain";
    schema.rule.lhs = {atom({"a"}, 2)};
    schema.rule.out = {atom({"b"})};
    schema.rule.promoters = {atom({"p"})};
    schema.rule.inhibitors = {atom({"i"})};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 1);
    const auto& r = res.rules[0];
    CHECK(r.id == "plain");
    CHECK(r.lhs.str() == "{a:2}");
    CHECK(r.out.str() == "{b}");
    CHECK(r.cond.promoters == std::set<Symbol>{"p"});
    CHECK(r.cond.inhibitors == std::set<Symbol>{"i"});
}

TEST_CASE("compound atoms ground fragments joined with underscores") {
    RuleSchema schema;
    schema.params = {{"x", {"7"}}};
    schema.rule.id = "c";
    schema.rule.lhs = {atom({"lit", "x", "tail"})};
    schema.rule.ins[2] = {atom({"x"}, 3)};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 1);
    CHECK(res.rules[0].id == "c__7");
    CHECK(res.rules[0].lhs.str() == "{lit_7_tail}");
    REQUIRE(res.rules[0].ins.count(2) == 1);
    CHECK(res.rules[0].ins.at(2).str() == "{7:3}");
}

TEST_CASE("multiple variables may share one domain list") {
    RuleSchema schema;
    schema.params = {{"a1", {"0", "1"}}, {"a2", {"0", "1"}}};
    schema.rule.id = "m";
    schema.rule.lhs = {atom({"a1", "a2", "f"})};
    schema.rule.here = {atom({"a1", "a2", "f"}, 2)};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 4);
    CHECK(res.rules[1].lhs.str() == "{0_1_f}");
    CHECK(res.rules[1].here.str() == "{0_1_f:2}");
}

TEST_CASE("empty in-target deliveries are dropped") {
    RuleSchema schema;
    schema.rule.id = "n";
    schema.rule.lhs = {atom({"a"})};
    schema.rule.ins[2] = {};

    auto res = expand_rule_schemas({schema});
    REQUIRE(res.rules.size() == 1);
    CHECK(res.rules[0].ins.empty());
}
