#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "plp/checks.hpp"
#include "plp/exact.hpp"
#include "plp/parser.hpp"

#include <json.hpp>

using namespace plp;
using logic::FiniteStructure;
using logic::GroundAtomTable;
using logic::Vocabulary;

namespace {

// r gates s, p provides the existential witness; the induced family is the
// standard example of a program that is not projective.
constexpr const char* kGate =
    "1/2 :: r(X).\n"
    "1/2 :: p(X, Y).\n"
    "s(X) :- r(X), p(X, Y).\n";

// Diagonal always holds and r floods full rows; determinate and acyclic.
constexpr const char* kDiagonal =
    "1/2 :: r(X).\n"
    "p(X, X).\n"
    "p(X, Y) :- r(X).\n";

WorldDistribution dist(const std::string& text, int n) {
    return world_distribution(parse_program(text), n);
}

Rational q(const std::string& text, int n, const std::string& query) {
    return query_prob(parse_program(text), n, *parse_query(query));
}

bool same_dist(const WorldDistribution& a, const WorldDistribution& b) {
    return a.vocab() == b.vocab() && a.domain_size() == b.domain_size() &&
           a.worlds() == b.worlds();
}

Vocabulary unary(const std::string& name) {
    Vocabulary v;
    v.add_relation(name, 1);
    return v;
}

Rational pow_rat(const Rational& base, int k) {
    Rational out = 1;
    for (int i = 0; i < k; ++i) out *= base;
    return out;
}

}  // namespace

TEST_CASE("world list is normalized") {
    GroundAtomTable table(unary("r"), 1);
    WorldDistribution d(table, {{1, Rational(1, 4)}, {0, Rational(1, 2)}, {1, Rational(1, 4)}});
    REQUIRE(d.worlds().size() == 2);
    CHECK(d.prob_world(0) == Rational(1, 2));
    CHECK(d.prob_world(1) == Rational(1, 2));
    CHECK(d.total() == 1);

    WorldDistribution point(table, {{0, 1}, {1, 0}});
    REQUIRE(point.worlds().size() == 1);
    CHECK(point.prob_world(1) == 0);

    CHECK_THROWS_AS(WorldDistribution(table, {{0, Rational(-1, 2)}}), ProgramError);
}

TEST_CASE("induced distribution of the gate program at n=1") {
    WorldDistribution d = dist(kGate, 1);
    // atom order: p(1,1)=bit0, r(1)=bit1, s(1)=bit2
    CHECK(d.total() == 1);
    REQUIRE(d.worlds().size() == 4);
    CHECK(d.prob_world(0b000) == Rational(1, 4));
    CHECK(d.prob_world(0b001) == Rational(1, 4));
    CHECK(d.prob_world(0b010) == Rational(1, 4));
    CHECK(d.prob_world(0b111) == Rational(1, 4));
    // s must agree with r and p; disagreeing worlds carry no weight
    CHECK(d.prob_world(0b011) == 0);
    CHECK(d.prob_world(0b110) == 0);
}

TEST_CASE("single coin and degenerate probabilities") {
    WorldDistribution coin = dist("1/2 :: r(X).\n", 1);
    REQUIRE(coin.worlds().size() == 2);
    CHECK(coin.prob_world(0) == Rational(1, 2));
    CHECK(coin.prob_world(1) == Rational(1, 2));

    WorldDistribution sure = dist("1 :: r(X).\ns(X) :- r(X).\n", 2);
    REQUIRE(sure.worlds().size() == 1);
    CHECK(sure.worlds()[0].second == 1);
    CHECK(sure.prob_formula(*parse_query("s(1) & s(2) & r(1) & r(2)")) == 1);

    WorldDistribution never = dist("0 :: r(X).\n", 2);
    REQUIRE(never.worlds().size() == 1);
    CHECK(never.prob_world(0) == 1);
}

TEST_CASE("distribution semantics rejections") {
    CHECK_THROWS_AS(dist("1/2 :: r(X).\ns(X) :- r(X), e(X, a).\n", 2), ConstantsError);
    CHECK_THROWS_WITH_AS(dist("s(X) :- e(X).\n", 2),
                         "relation e has no declared probability and no defining rule",
                         ProgramError);
    // 36 fact atoms ground fine but sit beyond the enumeration guard
    CHECK_THROWS_AS(dist("1/2 :: p(X, Y).\n", 6), ScaleError);
    Limits tight;
    tight.max_fact_atoms = 3;
    CHECK_THROWS_AS(world_distribution(parse_program("1/2 :: r(X).\n"), 4, tight), ScaleError);
}

TEST_CASE("query probabilities on the gate program") {
    CHECK(q(kGate, 1, "s(1)") == Rational(1, 4));
    CHECK(q(kGate, 2, "s(1)") == Rational(3, 8));
    CHECK(q(kGate, 3, "s(1)") == Rational(7, 16));
    CHECK(q(kGate, 4, "s(1)") == Rational(15, 32));
    CHECK(q(kGate, 1, "true") == 1);
    CHECK(q(kGate, 1, "~s(1) & r(1)") == Rational(1, 4));
    CHECK(q(kGate, 2, "r(1) | r(2)") == Rational(3, 4));
    CHECK(q(kGate, 2, "1 = 1") == 1);
    CHECK(q(kGate, 2, "1 = 2") == 0);

    // the query cone keeps enumeration at 8 fact atoms although the full
    // fact space holds 56 of them
    CHECK(q(kGate, 7, "s(1)") == Rational(127, 256));
    // same trick when the full space is beyond the guard entirely
    CHECK(q("1/2 :: p(X, Y).\n", 6, "p(1, 2)") == Rational(1, 2));

    for (int n = 1; n <= 2; ++n) {
        WorldDistribution d = dist(kGate, n);
        for (const char* query : {"s(1)", "r(1) & ~s(1)", "p(1, 1) | s(1)"})
            CHECK(d.prob_formula(*parse_query(query)) ==
                  q(kGate, n, query));
    }
}

TEST_CASE("query evaluation errors") {
    CHECK_THROWS_AS(q(kGate, 2, "s(X)"), EvalError);
    CHECK_THROWS_AS(q(kGate, 2, "s(9)"), EvalError);
    CHECK_THROWS_AS(q(kGate, 2, "zebra(1)"), EvalError);
    CHECK_THROWS_AS(q(kGate, 2, "r(a)"), EvalError);
    WorldDistribution d = dist(kGate, 1);
    logic::FormulaPtr quantified = logic::exists("X", logic::atom("s", {logic::var("X")}));
    CHECK_THROWS_AS(d.prob_formula(*quantified), EvalError);
}

TEST_CASE("reducts of distributions") {
    WorldDistribution d = dist(kGate, 1);
    CHECK(same_dist(reduct_distribution(d, d.vocab()), d));

    WorldDistribution s_only = reduct_distribution(d, unary("s"));
    REQUIRE(s_only.worlds().size() == 2);
    CHECK(s_only.prob_world(0) == Rational(3, 4));
    CHECK(s_only.prob_world(1) == Rational(1, 4));

    WorldDistribution product = dist("1/2 :: r(X).\n1/3 :: u(X).\n", 2);
    CHECK(same_dist(reduct_distribution(product, unary("u")),
                    dist("1/3 :: u(X).\n", 2)));

    CHECK_THROWS_AS(reduct_distribution(d, unary("zebra")), ProgramError);
}

TEST_CASE("marginals onto an initial segment") {
    WorldDistribution big = dist("1/2 :: r(X).\n", 3);
    CHECK(same_dist(marginal_distribution(big, 1), dist("1/2 :: r(X).\n", 1)));
    CHECK(same_dist(marginal_distribution(big, 3), big));

    // the gate program inflates s with the domain: the {r(1)}-world of the
    // 1-element domain has direct weight 1/4 but marginal weight 1/8
    WorldDistribution two = dist(kGate, 2);
    WorldDistribution pushed = marginal_distribution(two, 1);
    CHECK(pushed.prob_world(0b010) == Rational(1, 8));
    CHECK(dist(kGate, 1).prob_world(0b010) == Rational(1, 4));

    CHECK_THROWS_AS(marginal_distribution(big, 0), ProgramError);
    CHECK_THROWS_AS(marginal_distribution(big, 4), ProgramError);
}

TEST_CASE("total variation distance") {
    WorldDistribution d = dist(kGate, 1);
    CHECK(tv_distance(d, d) == 0);

    GroundAtomTable table(unary("r"), 1);
    WorldDistribution here(table, {{0, 1}});
    WorldDistribution there(table, {{1, 1}});
    CHECK(tv_distance(here, there) == 1);

    CHECK_THROWS_AS(tv_distance(here, dist("1/2 :: r(X).\n", 2)), ProgramError);
    CHECK_THROWS_AS(tv_distance(here, dist("1/2 :: u(X).\n", 1)), ProgramError);
}

TEST_CASE("program distance against the acyclic replacement") {
    ProbProgram gate = parse_program(kGate);
    // same facts, the existential leg dropped
    ProbProgram flat = parse_program(
        "1/2 :: r(X).\n"
        "1/2 :: p(X, Y).\n"
        "s(X) :- r(X).\n");

    // brute force agrees with the component-factored path
    for (int n = 2; n <= 3; ++n) {
        Rational brute = tv_distance(world_distribution(gate, n), world_distribution(flat, n));
        CHECK(program_tv(gate, flat, n) == brute);
    }

    // per element the two closures differ exactly when r holds and no p-link
    // does, so the distance is 1 - (1 - 2^-(n+1))^n; it shrinks with n
    Rational prev = 1;
    for (int n = 2; n <= 7; ++n) {
        Rational expected = 1 - pow_rat(1 - Rational(1, 1 << (n + 1)), n);
        Rational got = program_tv(gate, flat, n);
        CHECK(got == expected);
        CHECK(got < prev);
        prev = got;
    }
    CHECK(prev <= Rational(1, 16));

    // reducts can only lose distance
    Vocabulary s_vocab = unary("s");
    for (int n = 2; n <= 6; ++n)
        CHECK(reduct_program_tv(gate, flat, n, s_vocab) <= program_tv(gate, flat, n));
    for (int n = 2; n <= 3; ++n) {
        Rational brute =
            tv_distance(reduct_distribution(world_distribution(gate, n), s_vocab),
                        reduct_distribution(world_distribution(flat, n), s_vocab));
        CHECK(reduct_program_tv(gate, flat, n, s_vocab) == brute);
    }
}

TEST_CASE("program distance across different fact spaces") {
    ProbProgram a = parse_program("1/2 :: r(X).\ns(X) :- r(X).\n");
    ProbProgram b = parse_program("1/2 :: r(X).\n1/2 :: h(X).\ns(X) :- r(X).\n");
    CHECK(program_tv(a, b, 2) == 0);

    ProbProgram c = parse_program("1/2 :: r(X).\n1/2 :: h(X).\ns(X) :- r(X), h(X).\n");
    CHECK(program_tv(a, c, 1) == Rational(1, 4));

    ProbProgram clash = parse_program("1/3 :: r(X).\ns(X) :- r(X).\n");
    CHECK_THROWS_AS(program_tv(a, clash, 1), ProgramError);
}

TEST_CASE("projectivity check") {
    FamilyAccessor determinate = program_family(parse_program("1/2 :: r(X).\ns(X) :- r(X).\n"));
    CHECK(check_projective(determinate, 4).holds);

    FamilyAccessor facts_only = program_family(parse_program("1/2 :: r(X).\n1/3 :: u(X).\n"));
    CHECK(check_projective(facts_only, 4).holds);

    ProjectivityReport bad = check_projective(program_family(parse_program(kGate)), 4);
    REQUIRE_FALSE(bad.holds);
    REQUIRE(bad.witness.has_value());
    CHECK(bad.witness->m == 1);
    CHECK(bad.witness->n == 2);
    CHECK(bad.witness->direct == Rational(1, 4));
    CHECK(bad.witness->marginal == Rational(1, 8));
    FiniteStructure world = bad.witness->world;
    CHECK(world.n == 1);
    CHECK(world.holds("r", {1}));
    CHECK_FALSE(world.holds("p", {1, 1}));
    CHECK_FALSE(world.holds("s", {1}));
}

TEST_CASE("exchangeability check") {
    CHECK(check_exchangeable(program_family(parse_program(kGate)), 3).holds);
    CHECK(check_exchangeable(program_family(parse_program(kDiagonal)), 4).holds);

    // hand-built family preferring the world where only element 1 is r
    FamilyAccessor skew;
    skew.vocab = unary("r");
    skew.at = [](int n) {
        GroundAtomTable table(unary("r"), n);
        if (n == 1)
            return WorldDistribution(table, {{0, Rational(1, 2)}, {1, Rational(1, 2)}});
        std::vector<std::pair<std::uint64_t, Rational>> w = {
            {0b00, Rational(1, 4)}, {0b01, Rational(1, 2)}, {0b11, Rational(1, 4)}};
        return WorldDistribution(table, w);
    };
    ExchangeabilityReport report = check_exchangeable(skew, 2);
    REQUIRE_FALSE(report.holds);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->n == 2);
    CHECK(report.witness->permutation == std::vector<int>{2, 1});
    CHECK(report.witness->world.holds("r", {1}));
    CHECK(report.witness->weight == Rational(1, 2));
    CHECK(report.witness->permuted_weight == 0);
}

TEST_CASE("independence of events on disjoint blocks") {
    IndependenceReport facts = check_IP(program_family(parse_program("1/2 :: r(X).\n1/3 :: u(X).\n")), 4);
    CHECK(facts.holds);
    CHECK(facts.projective);

    IndependenceReport diag = check_IP(program_family(parse_program(kDiagonal)), 4);
    CHECK(diag.holds);
    CHECK(diag.projective);

    // a nullary coin is shared by every block
    IndependenceReport nullary = check_IP(program_family(parse_program("1/2 :: c.\n1/2 :: r(X).\n")), 3);
    REQUIRE_FALSE(nullary.holds);
    REQUIRE(nullary.witness.has_value());
    CHECK(nullary.witness->n == 1);
    CHECK(nullary.witness->m == 1);
    CHECK(nullary.witness->phi == "c");
    CHECK(nullary.witness->psi == "c");
    CHECK(nullary.witness->joint == Rational(1, 2));
    CHECK(nullary.witness->left == Rational(1, 2));
    CHECK(nullary.witness->right == Rational(1, 2));

    // the gate family keeps disjoint blocks independent even though it is
    // not projective; the flag reports the presupposition failure
    IndependenceReport gate = check_IP(program_family(parse_program(kGate)), 3);
    CHECK(gate.holds);
    CHECK_FALSE(gate.projective);
}

TEST_CASE("conditional independence of shifted events") {
    CHECK(check_CIP(program_family(parse_program("1/2 :: r(X).\n")), 4).holds);
    CHECK(check_CIP(program_family(parse_program(kDiagonal)), 4).holds);

    FamilyAccessor lossy = reduct_family(program_family(parse_program(kDiagonal)),
                                         [] {
                                             Vocabulary v;
                                             v.add_relation("p", 2);
                                             return v;
                                         }());
    ConditionalReport report = check_CIP(lossy, 4);
    REQUIRE_FALSE(report.holds);
    CHECK(report.projective);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->n == 2);
    CHECK(report.witness->phi == "p(x1,x2)");
    CHECK(report.witness->given.n == 1);
    CHECK(report.witness->given.holds("p", {1, 1}));
    CHECK(report.witness->given_prob == 1);
    CHECK(report.witness->joint == Rational(1, 2));
    CHECK(report.witness->left == Rational(1, 2));
    CHECK(report.witness->right == Rational(1, 2));
}

TEST_CASE("determinate acyclic programs pass both independence checks") {
    const char* pool[] = {
        "1/2 :: r(X).\ns(X) :- r(X).\n",
        "1/3 :: r(X).\n1/2 :: u(X).\ns(X) :- r(X), u(X).\n",
        "1/2 :: r(X).\ns(X) :- \\+ r(X).\n",
        kDiagonal,
        "1/2 :: r(X).\nd(X, Y) :- r(X), r(Y).\n",
    };
    for (const char* text : pool) {
        CAPTURE(text);
        FamilyAccessor family = program_family(parse_program(text));
        CHECK(check_projective(family, 4).holds);
        CHECK(check_IP(family, 4).holds);
        CHECK(check_CIP(family, 4).holds);
    }
}

TEST_CASE("reference family weights") {
    WorldDistribution one = m_star(1);
    CHECK(one.prob_world(0) == Rational(1, 2));
    CHECK(one.prob_world(1) == Rational(1, 2));

    WorldDistribution two = m_star(2);
    CHECK(two.total() == 1);
    CHECK(two.prob_world(0b01) == Rational(1, 6));
    CHECK(two.prob_world(0b00) == Rational(1, 3));
    CHECK(two.prob_world(0b11) == Rational(1, 3));

    // rule of succession: a second success after one observed success
    Rational joint = two.prob_formula(*parse_query("r(1) & r(2)"));
    Rational base = two.prob_formula(*parse_query("r(1)"));
    CHECK(joint / base == Rational(2, 3));

    // class weight = 1/(classes * orbit size), cross-checked against the
    // orbit counter
    for (int n = 1; n <= 5; ++n) {
        WorldDistribution d = m_star(n);
        CHECK(d.total() == 1);
        for (const auto& [mask, w] : d.worlds()) {
            std::uint64_t orbit = logic::count_isomorphic(d.atoms().structure_of(mask));
            CHECK(w == Rational(1) / (Rational(n + 1) * Rational(orbit)));
        }
    }

    CHECK(check_exchangeable(m_star_family(), 4).holds);
    CHECK(check_projective(m_star_family(), 4).holds);
}

TEST_CASE("reference family conditionals") {
    CHECK(m_star_conditional(1, {1}) == Rational(2, 3));
    CHECK(m_star_conditional(2, {}) == Rational(1, 4));
    CHECK(m_star_conditional(3, {1}) == m_star_conditional(3, {2}));
    CHECK(m_star_conditional(3, {1, 3}) == m_star_conditional(3, {2, 3}));

    // one success in a growing sample: support shrinks to zero, passing 1/4
    Rational prev = 1;
    for (int n = 1; n <= 7; ++n) {
        Rational value = m_star_conditional(n, {1});
        CHECK(value == Rational(2, n + 2));
        CHECK(value < prev);
        prev = value;
    }
    CHECK(prev < Rational(1, 4));

    CHECK_THROWS_AS(m_star_conditional(2, {5}), ProgramError);
}

TEST_CASE("equal at the critical size means equal everywhere tested") {
    struct Pair {
        const char* a;
        const char* b;
        int critical;  // max arity + 1
    };
    const Pair equal_pairs[] = {
        {"1/2 :: r(X).\ns(X) :- r(X), r(X).\n", "1/2 :: r(X).\ns(X) :- r(X).\n", 2},
        {"1/2 :: r(X).\nd(X, Y) :- r(X), r(Y).\n", "1/2 :: r(X).\nd(Y, X) :- r(X), r(Y).\n", 3},
    };
    for (const auto& pair : equal_pairs) {
        CAPTURE(pair.a);
        ProbProgram a = parse_program(pair.a);
        ProbProgram b = parse_program(pair.b);
        REQUIRE(same_dist(world_distribution(a, pair.critical),
                          world_distribution(b, pair.critical)));
        for (int n = 1; n <= 5; ++n)
            CHECK(same_dist(world_distribution(a, n), world_distribution(b, n)));
    }

    ProbProgram pos = parse_program("1/2 :: r(X).\ns(X) :- r(X).\n");
    ProbProgram neg = parse_program("1/2 :: r(X).\ns(X) :- \\+ r(X).\n");
    CHECK_FALSE(same_dist(world_distribution(pos, 2), world_distribution(neg, 2)));
}

TEST_CASE("distribution export") {
    std::string text = distribution_json(dist("1/2 :: r(X).\n", 1));
    CHECK(text ==
          "{\n"
          "  \"n\": 1,\n"
          "  \"vocabulary\": [\n"
          "    \"r/1\"\n"
          "  ],\n"
          "  \"worlds\": [\n"
          "    {\n"
          "      \"atoms\": [],\n"
          "      \"weight\": \"1/2\"\n"
          "    },\n"
          "    {\n"
          "      \"atoms\": [\n"
          "        \"r(1)\"\n"
          "      ],\n"
          "      \"weight\": \"1/2\"\n"
          "    }\n"
          "  ]\n"
          "}");

    auto parsed = nlohmann::json::parse(distribution_json(dist(kGate, 2)));
    CHECK(parsed["n"] == 2);
    CHECK(parsed["vocabulary"].size() == 3);
    Rational sum = 0;
    for (const auto& world : parsed["worlds"])
        sum += parse_rational(world["weight"].get<std::string>());
    CHECK(sum == 1);
}
