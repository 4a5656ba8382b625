#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plp/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = plp::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const fs::path& fixture_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "plp-cli-fixtures";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string fixture(const std::string& name, const std::string& content) {
    fs::path path = fixture_dir() / name;
    std::ofstream file(path);
    file << content;
    REQUIRE(file.good());
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream file(path);
    REQUIRE(file.good());
    std::ostringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

const std::string kGate = "1/2 :: r(X).\n1/2 :: p(X, Y).\ns(X) :- r(X), p(X, Y).\n";
const std::string kFlat = "1/2 :: r(X).\ns(X) :- r(X).\n";
const std::string kPinned = "1/3 :: c.\n1/2 :: r(X).\ns(X) :- r(X), c.\nt(X) :- r(X), \\+ c.\n";
const std::string kDiagonal = "1/2 :: r(X).\np(X, Y) :- X = Y.\np(X, Y) :- r(X).\n";

const std::string kGateCompiled = "1/2 :: p(X1,X2).\n1/2 :: r(X1).\n\ns(X1) :- r(X1).\n";

}  // namespace

TEST_CASE("transform writes canonical bytes") {
    auto gate = fixture("gate.plp", kGate);

    auto first = run({"transform", gate});
    CHECK(first.code == 0);
    CHECK(first.err.empty());
    CHECK(first.out == kGateCompiled);

    // byte-determinism across invocations
    auto second = run({"transform", gate});
    CHECK(second.out == first.out);

    // --output redirects the payload and leaves stdout empty
    auto out_path = (fixture_dir() / "gate-compiled.plp").string();
    auto filed = run({"transform", gate, "--output", out_path});
    CHECK(filed.code == 0);
    CHECK(filed.out.empty());
    CHECK(slurp(out_path) == kGateCompiled);

    // the annotation of a probabilistic rule cannot leak into the compiled
    // program: any interior probability yields the same limit behaviour
    auto low = fixture("ann-low.plp", "1/2 :: q(X, Y).\n1/10 :: s(X) :- q(X, Y).\n");
    auto high = fixture("ann-high.plp", "1/2 :: q(X, Y).\n9/10 :: s(X) :- q(X, Y).\n");
    auto low_out = run({"transform", low});
    auto high_out = run({"transform", high});
    CHECK(low_out.code == 0);
    CHECK(low_out.out == "1/2 :: q(X1,X2).\n\ns(X1).\n");
    CHECK(low_out.out == high_out.out);
    CHECK(run({"limit", low, "--query", "s(X)"}).out == "1/1 = 1.000000\n");
    CHECK(run({"limit", high, "--query", "s(X)"}).out == "1/1 = 1.000000\n");
}

TEST_CASE("transform lists nullary branches") {
    auto pinned = fixture("pinned.plp", kPinned);

    auto text = run({"transform", pinned});
    CHECK(text.code == 0);
    CHECK(text.out ==
          "% branches: 2\n"
          "% branch 1 of 2: weight 2/3, c = false\n"
          "1/2 :: r(X1).\n\ns(X1) :- X1 \\= X1.\nt(X1) :- r(X1).\n"
          "% branch 2 of 2: weight 1/3, c = true\n"
          "1/2 :: r(X1).\n\ns(X1) :- r(X1).\nt(X1) :- X1 \\= X1.\n");

    auto as_json = run({"transform", pinned, "--format", "json"});
    CHECK(as_json.code == 0);
    auto j = nlohmann::json::parse(as_json.out);
    REQUIRE(j["branches"].size() == 2);
    CHECK(j["branches"][0]["weight"] == "2/3");
    CHECK(j["branches"][0]["values"] == nlohmann::json({{"c", false}}));
    CHECK(j["branches"][0]["program"] == "1/2 :: r(X1).\n\ns(X1) :- X1 \\= X1.\nt(X1) :- r(X1).\n");
    CHECK(j["branches"][1]["weight"] == "1/3");
    CHECK(j["branches"][1]["values"] == nlohmann::json({{"c", true}}));
}

TEST_CASE("infer prints exact probabilities") {
    auto gate = fixture("gate.plp", kGate);
    auto flat = fixture("flat.plp", kFlat);

    CHECK(run({"infer", gate, "--n", "1", "--query", "s(1)"}).out == "1/4 = 0.250000\n");
    CHECK(run({"infer", gate, "--n", "2", "--query", "s(1)"}).out == "3/8 = 0.375000\n");
    CHECK(run({"infer", gate, "--n", "2", "--query", "true"}).out == "1/1 = 1.000000\n");
    CHECK(run({"infer", flat, "--n", "3", "--query", "s(1) & r(2)"}).out == "1/4 = 0.250000\n");

    auto as_json = run({"infer", gate, "--n", "2", "--query", "s(1)", "--format", "json"});
    CHECK(as_json.code == 0);
    CHECK(as_json.out == "{\n  \"n\": 2,\n  \"probability\": \"3/8\",\n  \"query\": \"s(1)\"\n}\n");
}

TEST_CASE("limit prints asymptotic probabilities") {
    auto gate = fixture("gate.plp", kGate);
    auto pinned = fixture("pinned.plp", kPinned);
    auto facts = fixture("facts-only.plp", "3/10 :: r(X).\n");

    CHECK(run({"limit", gate, "--query", "s(X)"}).out == "1/2 = 0.500000\n");
    // distinct variables read as distinct fresh elements, so rows multiply
    CHECK(run({"limit", gate, "--query", "s(X) & s(Y)"}).out == "1/4 = 0.250000\n");
    CHECK(run({"limit", facts, "--query", "r(X)"}).out == "3/10 = 0.300000\n");
    CHECK(run({"limit", pinned, "--query", "c"}).out == "1/3 = 0.333333\n");

    auto as_json = run({"limit", gate, "--query", "s(X)", "--format", "json"});
    CHECK(as_json.out == "{\n  \"probability\": \"1/2\",\n  \"query\": \"s(X)\"\n}\n");
}

TEST_CASE("check reports properties and witnesses") {
    auto gate = fixture("gate.plp", kGate);
    auto flat = fixture("flat.plp", kFlat);
    auto two = fixture("two-facts.plp", "1/2 :: c.\n1/2 :: r(X).\n");
    auto diagonal = fixture("diagonal.plp", kDiagonal);

    CHECK(run({"check", flat, "--determinate"}).out == "determinate: holds\n");
    auto offender = run({"check", gate, "--determinate"});
    CHECK(offender.code == 0);
    CHECK(offender.out ==
          "determinate: fails\n"
          "  rule s(X) :- r(X), p(X,Y). has body-only variables: Y\n");

    auto offender_json = run({"check", gate, "--determinate", "--format", "json"});
    auto oj = nlohmann::json::parse(offender_json.out);
    CHECK(oj["holds"] == false);
    REQUIRE(oj["offenders"].size() == 1);
    CHECK(oj["offenders"][0]["rule"] == "s(X) :- r(X), p(X,Y).");
    CHECK(oj["offenders"][0]["variables"] == nlohmann::json::array({"Y"}));

    CHECK(run({"check", flat, "--projective"}).out == "projective: holds up to n=4\n");
    CHECK(run({"check", gate, "--projective", "--max-n", "3"}).out ==
          "projective: counterexample at (m,n)=(1,2)\n"
          "  world: {r(1)}\n"
          "  direct: 1/4\n"
          "  marginal: 1/8\n");

    CHECK(run({"check", two, "--ip", "--max-n", "2"}).out ==
          "independence: counterexample at block sizes n=1, m=1 (family projective: yes)\n"
          "  phi: c\n  psi: c\n  joint: 1/2\n  left: 1/2\n  right: 1/2\n");

    CHECK(run({"check", diagonal, "--cip", "--max-n", "3"}).out ==
          "conditional independence: holds up to n=3 (family projective: yes)\n");

    // the projection onto p alone hides the random coin the diagonal rule
    // reads, and conditional independence breaks on three elements
    CHECK(run({"check", diagonal, "--cip", "--max-n", "4", "--reduct", "p"}).out ==
          "conditional independence: counterexample on domain {1,2,3}\n"
          "  given world on {1..1}: {p(1,1)}\n"
          "  phi: p(x1,x2)\n"
          "  joint: 1/2\n  left: 1/2\n  right: 1/2\n  given: 1/1\n");

    auto unknown = run({"check", diagonal, "--cip", "--reduct", "nosuch"});
    CHECK(unknown.code == 5);
    CHECK(unknown.err == "error: semantic: --reduct names unknown relation: nosuch\n");
    CHECK(run({"check", diagonal, "--determinate", "--reduct", "p"}).code == 1);
}

TEST_CASE("converge tabulates the approach to the limit") {
    auto gate = fixture("gate.plp", kGate);
    auto flat = fixture("flat.plp", kFlat);
    auto pinned = fixture("pinned.plp", kPinned);
    auto empty = fixture("empty.plp", "");

    CHECK(run({"converge", gate, "--query", "s(1)", "--max-n", "4"}).out ==
          "n\tprobability\ttv\n"
          "1\t1/4\t1/4\n"
          "2\t3/8\t15/64\n"
          "3\t7/16\t721/4096\n"
          "4\t15/32\t125055/1048576\n");

    // a program that is already determinate compiles to itself
    CHECK(run({"converge", flat, "--query", "s(1)", "--max-n", "3"}).out ==
          "n\tprobability\ttv\n1\t1/2\t0/1\n2\t1/2\t0/1\n3\t1/2\t0/1\n");

    // branch mixtures recombine exactly for this program, at every size
    CHECK(run({"converge", pinned, "--query", "s(1)", "--max-n", "3"}).out ==
          "n\tprobability\ttv\n1\t1/6\t0/1\n2\t1/6\t0/1\n3\t1/6\t0/1\n");

    CHECK(run({"converge", empty, "--query", "true", "--max-n", "2"}).out ==
          "n\tprobability\ttv\n1\t1/1\t0/1\n2\t1/1\t0/1\n");

    auto as_json = run({"converge", gate, "--query", "s(1)", "--max-n", "2", "--format", "json"});
    auto j = nlohmann::json::parse(as_json.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0] == nlohmann::json({{"n", 1}, {"probability", "1/4"}, {"tv", "1/4"}}));
    CHECK(j[1] == nlohmann::json({{"n", 2}, {"probability", "3/8"}, {"tv", "15/64"}}));
}

TEST_CASE("failures exit with documented codes") {
    auto gate = fixture("gate.plp", kGate);

    auto missing = run({"infer", (fixture_dir() / "absent.plp").string(), "--n", "1", "--query",
                        "true"});
    CHECK(missing.code == 6);
    CHECK(missing.err.rfind("error: io: cannot read", 0) == 0);

    auto unwritable = run({"transform", gate, "--output", "/nonexistent-dir/x.plp"});
    CHECK(unwritable.code == 6);
    CHECK(unwritable.err == "error: io: cannot write /nonexistent-dir/x.plp\n");

    auto garbage = fixture("garbage.plp", "1/2 ::\n");
    auto parse = run({"infer", garbage, "--n", "1", "--query", "true"});
    CHECK(parse.code == 1);
    CHECK(parse.err.rfind("error: parse:", 0) == 0);

    auto bad = fixture("bad.plp", "p(X) :- \\+ p(X).\n");
    auto cyclic = run({"transform", bad});
    CHECK(cyclic.code == 2);
    CHECK(cyclic.err == "error: unstratifiable: negation through a recursive cycle: p p\n");

    auto consts = fixture("consts.plp", "1/2 :: r(X).\ns(X) :- r(X), e(X, a).\n");
    CHECK(run({"transform", consts}).code == 3);
    auto grounded = run({"infer", consts, "--n", "2", "--query", "s(1)"});
    CHECK(grounded.code == 3);
    CHECK(grounded.err.rfind("error: constants:", 0) == 0);

    auto scale = run({"infer", gate, "--n", "2", "--query", "s(1)", "--max-atoms", "2"});
    CHECK(scale.code == 4);
    CHECK(scale.err == "error: scale: query depends on 3 fact atoms, beyond the guard of 2\n");

    auto unknown = run({"infer", gate, "--n", "2", "--query", "t(1)"});
    CHECK(unknown.code == 5);
    CHECK(unknown.err == "error: semantic: unknown relation t\n");

    auto edb = fixture("edb.plp", "1/2 :: r(X).\ns(X) :- r(X), c.\n");
    auto undeclared = run({"limit", edb, "--query", "s(X)"});
    CHECK(undeclared.code == 5);
    CHECK(undeclared.err.rfind("error: semantic: nullary relation 'c'", 0) == 0);

    auto bad_query = run({"infer", gate, "--n", "2", "--query", "s(("});
    CHECK(bad_query.code == 1);
    CHECK(bad_query.err == "error: parse: 1:3: expected a query term\n");

    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate", gate}).code == 1);
    CHECK(run({"check", gate}).code == 1);
    CHECK(run({"check", gate, "--ip", "--cip"}).code == 1);
    CHECK(run({"infer", gate, "--query", "s(1)"}).code == 1);
    CHECK(run({"infer", gate, "--n", "0", "--query", "s(1)"}).code == 1);
    CHECK(run({"infer", gate, "--n", "2", "--query", "s(1)", "--format", "yaml"}).code == 1);

    auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("transform") != std::string::npos);
    CHECK(help.out.find("converge") != std::string::npos);
}
