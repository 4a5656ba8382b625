#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "plp/parser.hpp"
#include "plp/program.hpp"

using namespace plp;

namespace {

// line:col prefix comes from ParseError::what(); keep assertions on it exact.
std::string parse_error_of(const std::string& text) {
    try {
        parse_program(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("facts parse with exact probabilities") {
    auto p = parse_program(
        "% coins\n"
        "1/2 :: r(X).\n"
        "0.25 :: p(X, Y).\n"
        "1 :: always.\n"
        "0 :: never(X).\n");
    REQUIRE(p.facts.size() == 4);
    CHECK(p.fact("r")->q == rat(1, 2));
    CHECK(p.fact("r")->arity == 1);
    CHECK(p.fact("p")->q == rat(1, 4));
    CHECK(p.fact("p")->arity == 2);
    CHECK(p.fact("always")->q == 1);
    CHECK(p.fact("always")->arity == 0);
    CHECK(p.fact("never")->q == 0);
    CHECK(p.rules.empty());
    CHECK_FALSE(p.fact("r")->auxiliary);
    CHECK(p.fact("r")->line == 2);
}

TEST_CASE("rules parse with negation and builtins") {
    auto p = parse_program(
        "1/2 :: q(X, Y).\n"
        "s(X) :- q(X, Y), \\+ q(Y, X), X \\= Y.\n"
        "t(X) :- q(X, X), X = X.\n"
        "u :- s(X).\n");
    REQUIRE(p.rules.size() == 3);
    const auto& c = p.rules[0];
    CHECK(c.head.pred == "s");
    REQUIRE(c.body.size() == 3);
    CHECK(c.body[0].kind == BodyLiteral::Kind::Atom);
    CHECK(c.body[1].kind == BodyLiteral::Kind::NegAtom);
    CHECK(c.body[2].kind == BodyLiteral::Kind::Neq);
    CHECK(p.rules[2].head.args.empty());
    CHECK(p.head_symbols() == std::set<std::string>{"s", "t", "u"});
}

TEST_CASE("constants are lowercase identifiers") {
    auto p = parse_program("reach(X) :- edge(a, X).\n");
    const auto& body = p.rules[0].body[0];
    CHECK(body.args[0].kind == logic::TermKind::Constant);
    CHECK(body.args[0].name == "a");
    CHECK(body.args[1].kind == logic::TermKind::Variable);
    CHECK(p.constant_symbols() == std::set<std::string>{"a"});
    CHECK(p.has_constants());
    CHECK(p.extensional_by_use() == std::set<std::string>{"edge"});
}

TEST_CASE("probabilistic rules desugar to auxiliary facts") {
    auto p = parse_program(
        "1/2 :: q(X, Y).\n"
        "0.3 :: s(X) :- q(X, Y).\n"
        "3/4 :: top :- s(X).\n");
    REQUIRE(p.facts.size() == 3);
    const auto* aux1 = p.fact("aux_1");
    REQUIRE(aux1 != nullptr);
    CHECK(aux1->q == rat(3, 10));
    CHECK(aux1->arity == 2);  // head var X, then body-only Y
    CHECK(aux1->auxiliary);
    const auto* aux2 = p.fact("aux_2");
    REQUIRE(aux2 != nullptr);
    CHECK(aux2->q == rat(3, 4));
    CHECK(aux2->arity == 1);

    REQUIRE(p.rules.size() == 2);
    CHECK(serialize_clause(p.rules[0]) == "s(X1) :- q(X1,X2), aux_1(X1,X2).");
    CHECK(serialize_clause(p.rules[1]) == "top :- s(X1), aux_2(X1).");
    p.validate();
}

TEST_CASE("serialize_program produces canonical bytes") {
    // scrambled declaration order, scrambled variable names
    auto p = parse_program(
        "s(B) :- r(B), \\+ q(B, B).\n"
        "1/2 :: q(U, V).\n"
        "s(Z) :- q(Z, W).\n"
        "1/3 :: r(A).\n");
    std::string expected =
        "1/2 :: q(X1,X2).\n"
        "1/3 :: r(X1).\n"
        "\n"
        "s(X1) :- q(X1,X2).\n"
        "s(X1) :- r(X1), \\+ q(X1,X1).\n";
    CHECK(serialize_program(p) == expected);
    // round trip: canonical text reparses to the same canonical text
    CHECK(serialize_program(parse_program(expected)) == expected);
}

TEST_CASE("parse errors carry 1-based positions") {
    CHECK(parse_error_of("3/2 :: r(X).") == "1:1: probability out of range: 3/2");
    CHECK(parse_error_of("1/2 :: r(X)") == "1:12: expected '.' or ':-', found 'end of input'");
    CHECK(parse_error_of("s(X) :-\n  r(X) r(X).") ==
          "2:8: expected '.' or ':-', found 'r'");
    CHECK(parse_error_of("1/2 :: r(a).") ==
          "1:8: probabilistic facts take distinct variables, not constants");
    CHECK(parse_error_of("1/2 :: p(X, X).") ==
          "1:8: probabilistic facts take distinct variables; X repeats");
    CHECK(parse_error_of("1/2 :: r(X).\n1/3 :: r(X).") ==
          "2:8: duplicate probabilistic fact r");
    CHECK(parse_error_of("1/2 :: r(X).\nr(X) :- s(X).") ==
          "2:1: r appears both as a probabilistic fact and a rule head");
    CHECK(parse_error_of("r(X) :- s(X).\n1/2 :: r(X).") ==
          "2:8: r appears both as a probabilistic fact and a rule head");
    CHECK(parse_error_of("s(X) :- q(X), q(X, X).") ==
          "1:15: relation q used with arity 2 but earlier with 1");
    CHECK(parse_error_of("s(X) :- \\+ q(X, Y).") ==
          "1:1: unsafe variable Y in clause for s");
    CHECK(parse_error_of("s(X) :- r(X), X = Y.") ==
          "1:1: unsafe variable Y in clause for s");
    CHECK(parse_error_of("1/0 :: r(X).") == "1:1: rational with zero denominator: '1/0'");
    CHECK(parse_error_of("s(X) :- r(3).") ==
          "1:11: numerals are query syntax; program constants are lowercase identifiers");
    CHECK(parse_error_of("@") == "1:1: unexpected character '@'");
    CHECK(parse_error_of("1/2 :: r(X). junk") ==
          "1:18: expected '.' or ':-', found 'end of input'");
}

TEST_CASE("head variables alone are in range") {
    // head variables range over the domain even without body support
    auto p = parse_program("s(X).\nt(X) :- \\+ s(X).\n");
    CHECK(p.rules.size() == 2);
    p.validate();
}

TEST_CASE("comments and whitespace are trivia") {
    auto p = parse_program(
        "% leading comment\n"
        "  1/2 :: r(X). % trailing comment\n"
        "\n"
        "s(X)\n  :-\n  r(X).\n");
    CHECK(p.facts.size() == 1);
    CHECK(p.rules.size() == 1);
    CHECK(p.rules[0].line == 4);
}

TEST_CASE("queries parse into quantifier-free formulas") {
    auto q = parse_query("s(1) & ~r(2)");
    CHECK(q->quantifier_free());
    CHECK(logic::to_sexpr(*q) == "(and (s 1) (not (r 2)))");

    CHECK(logic::to_sexpr(*parse_query("r(1), r(2) | r(3)")) ==
          "(or (and (r 1) (r 2)) (r 3))");
    CHECK(logic::to_sexpr(*parse_query("r(1), (r(2) | r(3))")) ==
          "(and (r 1) (or (r 2) (r 3)))");
    CHECK(logic::to_sexpr(*parse_query("\\+ p(1, 2)")) == "(not (p 1 2))");
    CHECK(logic::to_sexpr(*parse_query("~~true")) == "(not (not true))");
    CHECK(logic::to_sexpr(*parse_query("false")) == "false");
    CHECK(logic::to_sexpr(*parse_query("1 = 2")) == "(= 1 2)");
    CHECK(logic::to_sexpr(*parse_query("X \\= 2")) == "(not (= X 2))");
    CHECK(logic::to_sexpr(*parse_query("edge(a, X)")) == "(edge a X)");
}

TEST_CASE("query parse errors") {
    CHECK_THROWS_AS(parse_query("s(1) &"), ParseError);
    CHECK_THROWS_AS(parse_query("s(1"), ParseError);
    CHECK_THROWS_AS(parse_query("s(1) s(2)"), ParseError);
    CHECK_THROWS_AS(parse_query("s(1.5)"), ParseError);
    CHECK_THROWS_AS(parse_query(""), ParseError);
}
