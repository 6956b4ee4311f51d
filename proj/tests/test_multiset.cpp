#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "pstest/multiset.hpp"

using pstest::Multiset;

TEST_CASE("empty multiset basics") {
    Multiset m;
    CHECK(m.empty());
    CHECK(m.total() == 0);
    CHECK(m.distinct() == 0);
    CHECK(m.count("a") == 0);
    CHECK_FALSE(m.has("a"));
    CHECK(m.str() == "{}");
    CHECK(m.contains(Multiset{}));
}

TEST_CASE("add and count") {
    Multiset m;
    m.add("a");
    m.add("a", 2);
    m.add("b");
    CHECK(m.count("a") == 3);
    CHECK(m.count("b") == 1);
    CHECK(m.total() == 4);
    CHECK(m.distinct() == 2);
    CHECK(m.str() == "{a:3,b}");

    m.add("c", 0); // adding zero is a no-op, no phantom entry
    CHECK_FALSE(m.has("c"));
    CHECK(m.str() == "{a:3,b}");
}

TEST_CASE("initializer list and single") {
    Multiset m{{"x", 2}, {"y", 1}};
    CHECK(m.count("x") == 2);
    CHECK(m.count("y") == 1);
    CHECK(Multiset::single("z").str() == "{z}");
    CHECK(Multiset::single("z", 3).str() == "{z:3}");
}

TEST_CASE("containment is per-symbol multiplicity") {
    Multiset big{{"a", 2}, {"b", 1}};
    CHECK(big.contains(Multiset{{"a", 1}}));
    CHECK(big.contains(Multiset{{"a", 2}, {"b", 1}}));
    CHECK_FALSE(big.contains(Multiset{{"a", 3}}));
    CHECK_FALSE(big.contains(Multiset{{"c", 1}}));
    CHECK(Multiset{}.contains(Multiset{}));
    CHECK_FALSE(Multiset{}.contains(Multiset{{"a", 1}}));
}

TEST_CASE("addition and subtraction") {
    Multiset a{{"a", 2}, {"b", 1}};
    Multiset b{{"a", 1}, {"c", 4}};
    Multiset sum = a + b;
    CHECK(sum.str() == "{a:3,b,c:4}");

    Multiset diff = sum - b;
    CHECK(diff == a);
    CHECK(diff.str() == "{a:2,b}");

    // exhausted entries disappear instead of lingering at zero
    CHECK((a - a).empty());
    CHECK((a - a).str() == "{}");

    // subtraction below zero is a hard error
    CHECK_THROWS_AS((a - Multiset{{"a", 5}}), pstest::Error);
    CHECK_THROWS_AS((a - Multiset{{"z", 1}}), pstest::Error);
}

TEST_CASE("add_scaled") {
    Multiset m;
    m.add_scaled(Multiset{{"a", 2}, {"b", 1}}, 3);
    CHECK(m.str() == "{a:6,b:3}");
    m.add_scaled(Multiset{{"a", 1}}, 0);
    CHECK(m.str() == "{a:6,b:3}");
}

TEST_CASE("support and ordering") {
    Multiset m{{"b", 1}, {"a", 2}};
    auto sup = m.support();
    REQUIRE(sup.size() == 2);
    CHECK(sup.count("a") == 1);
    CHECK(sup.count("b") == 1);

    CHECK(Multiset{{"a", 1}} < Multiset{{"a", 2}});
    CHECK(Multiset{{"a", 1}} < Multiset{{"b", 1}});
    CHECK(Multiset{{"a", 1}} == Multiset{{"a", 1}});
}

TEST_CASE("iteration is sorted by symbol") {
    Multiset m{{"c", 1}, {"a", 2}, {"b", 3}};
    std::string order;
    for (const auto& [sym, n] : m)
        order += sym;
    CHECK(order == "abc");
}

TEST_CASE("random add/subtract round trip") {
    std::mt19937_64 rng(20240811);
    const char* syms[] = {"a", "b", "c", "d"};
    for (int iter = 0; iter < 500; ++iter) {
        Multiset a, b;
        for (const char* s : syms) {
            a.add(s, rng() % 4);
            b.add(s, rng() % 4);
        }
        Multiset sum = a + b;
        CHECK(sum - b == a);
        CHECK(sum - a == b);
        CHECK(sum.contains(a));
        CHECK(sum.contains(b));
        CHECK(sum.total() == a.total() + b.total());
    }
}
