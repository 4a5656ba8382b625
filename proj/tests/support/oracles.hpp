#pragma once

// Shared fixtures for the acceptance suite: a seeded pool of small random
// programs, a family of depth-two sentences whose exact probabilities have an
// independent closed form, and the transitive-closure pair for the
// Datalog/fixed-point cross-check. Everything here is deterministic; the
// generator uses raw engine draws because std distributions are not
// bit-stable across standard libraries.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "plp/asym.hpp"
#include "plp/exact.hpp"
#include "plp/logic/eval.hpp"
#include "plp/logic/formula.hpp"
#include "plp/logic/structure.hpp"
#include "plp/parser.hpp"
#include "plp/program.hpp"
#include "plp/rational.hpp"

namespace oracles {

namespace logic = plp::logic;

class DetRng {
public:
    explicit DetRng(std::uint32_t seed) : gen_(seed) {}
    std::uint32_t raw() { return gen_(); }
    int below(int n) { return static_cast<int>(raw() % static_cast<std::uint32_t>(n)); }

private:
    std::mt19937 gen_;
};

// A probability strictly inside (0, 1) with a single-digit denominator.
inline plp::Rational interior_rational(DetRng& rng) {
    int den = 2 + rng.below(8);
    int num = 1 + rng.below(den - 1);
    return plp::Rational(num, den);
}

struct PoolEntry {
    std::string source;
    plp::ProbProgram program;
    bool determinate = false;
};

// At most two fact relations of arity <= 2 per program, so every
// distribution fits the desk-scale guard at n = 4. Rule skeletons cover
// positive and negated bodies, equality literals, body-only variables,
// recursion, and fact-only programs; annotations are drawn fresh per entry.
inline std::vector<PoolEntry> program_pool() {
    DetRng rng(20230817);
    auto q = [&] { return plp::to_string(interior_rational(rng)); };

    struct Skeleton {
        const char* body;  // with {a} / {b} annotation slots
        bool determinate;
        int copies;
    };
    const std::vector<Skeleton> skeletons = {
        {"{a} :: u(X).\n{b} :: r(X).\ns(X) :- r(X), u(X).\n", true, 2},
        {"{a} :: u(X).\n{b} :: r(X).\ns(X) :- r(X), \\+ u(X).\n", true, 2},
        {"{a} :: u(X).\n{b} :: r(X).\ns(X) :- r(X).\nt(X) :- u(X), \\+ s(X).\n", true, 1},
        {"{a} :: u(X).\n{b} :: r(X).\ns(X) :- r(X), u(Y).\n", false, 2},
        {"{a} :: u(X).\n{b} :: r(X).\n", true, 1},
        {"{a} :: e(X, Y).\ns(X, Y) :- e(X, Y), \\+ e(Y, X).\n", true, 2},
        {"{a} :: e(X, Y).\ns(X, Y) :- e(Y, X).\n", true, 1},
        {"{a} :: e(X, Y).\nd(X) :- e(X, X).\n", true, 1},
        {"{a} :: e(X, Y).\ntc(X, Y) :- e(X, Y).\ntc(X, Y) :- e(X, Z), tc(Z, Y).\n", false, 2},
        {"{a} :: e(X, Y).\ns(X) :- e(X, Y).\n", false, 1},
        {"{a} :: p(X, Y).\nq(X, Y) :- p(X, Y), X \\= Y.\n", true, 1},
        {"{a} :: p(X, Y).\nq(X, Y) :- X = Y.\nq(X, Y) :- p(X, Y).\n", true, 1},
        {"{a} :: u(X).\ns(X) :- \\+ u(X).\n", true, 1},
        {"{a} :: r(X).\n", true, 1},
        {"{a} :: r(X).\n{b} :: p(X, Y).\ns(X) :- r(X), p(X, Y).\n", false, 1},
        {"{a} :: r(X).\n{b} :: p(X, Y).\ns(X, Y) :- p(X, Y), r(X).\n", true, 1},
    };

    std::vector<PoolEntry> pool;
    for (const auto& sk : skeletons) {
        for (int copy = 0; copy < sk.copies; ++copy) {
            std::string text = sk.body;
            for (const char* slot : {"{a}", "{b}"}) {
                auto at = text.find(slot);
                if (at != std::string::npos) text.replace(at, 3, q());
            }
            PoolEntry entry{text, plp::parse_program(text), sk.determinate};
            entry.program.validate();
            pool.push_back(std::move(entry));
        }
    }
    return pool;
}

// Depth-two sentences Q1 x Q2 y theta(r(x), p(x,y)) with theta an arbitrary
// Boolean function of the two atoms, encoded as a four-bit truth table
// (bit index 2*rv + pv). Restricting theta to the atoms r(x) and p(x,y)
// makes the per-x row events independent, which is what gives the closed
// form below its legs.
struct RowSentence {
    std::string name;
    logic::FormulaPtr formula;
    bool outer_forall = false;
    bool inner_forall = false;
    int theta = 0;
};

inline logic::FormulaPtr theta_formula(int theta) {
    using namespace logic;
    std::vector<FormulaPtr> cases;
    for (int rv = 0; rv < 2; ++rv)
        for (int pv = 0; pv < 2; ++pv) {
            if (!(theta >> (2 * rv + pv) & 1)) continue;
            auto lit_r = atom("r", {var("x")});
            auto lit_p = atom("p", {var("x"), var("y")});
            cases.push_back(conj(rv ? lit_r : negation(lit_r), pv ? lit_p : negation(lit_p)));
        }
    return disj_all(cases);
}

inline std::vector<RowSentence> sentence_pool() {
    std::vector<RowSentence> out;
    for (bool outer_forall : {false, true})
        for (bool inner_forall : {false, true})
            for (int theta = 0; theta < 16; ++theta) {
                RowSentence s;
                s.name = std::string(outer_forall ? "Ax" : "Ex") + (inner_forall ? " Ay" : " Ey") +
                         " theta" + std::to_string(theta);
                s.outer_forall = outer_forall;
                s.inner_forall = inner_forall;
                s.theta = theta;
                auto body = theta_formula(theta);
                auto inner = inner_forall ? logic::forall("y", body) : logic::exists("y", body);
                s.formula = outer_forall ? logic::forall("x", inner) : logic::exists("x", inner);
                out.push_back(std::move(s));
            }
    return out;
}

// Truth in the countable generic structure, derived directly from theta:
// along a row with r(x) fixed, p(x,y) realizes every value infinitely often,
// so an inner forall needs theta constant-true on that row and an inner
// exists needs one true entry; the outer quantifier then ranges over both
// row kinds, each realized by infinitely many points.
inline bool sentence_truth_in_limit(const RowSentence& s) {
    auto row = [&](int rv) {
        int entries = (s.theta >> (2 * rv)) & 3;
        return s.inner_forall ? entries == 3 : entries != 0;
    };
    return s.outer_forall ? row(0) && row(1) : row(0) || row(1);
}

inline plp::Rational rational_pow(plp::Rational base, int exp) {
    plp::Rational out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

// Exact probability of the sentence over {1..n} with every atom an
// independent fair coin. Rows are independent and identically distributed,
// so the sentence probability is a two-level binomial expression in the
// per-entry truth densities t_rv = (theta(rv,0) + theta(rv,1)) / 2.
inline plp::Rational sentence_prob(const RowSentence& s, int n) {
    auto level = [&](bool forall, const plp::Rational& t) {
        return forall ? rational_pow(t, n) : 1 - rational_pow(1 - t, n);
    };
    plp::Rational row_sum = 0;
    for (int rv = 0; rv < 2; ++rv) {
        plp::Rational t((s.theta >> (2 * rv) & 1) + (s.theta >> (2 * rv + 1) & 1), 2);
        row_sum += level(s.inner_forall, t);
    }
    plp::Rational row = row_sum / 2;
    return level(s.outer_forall, row);
}

// Literal reference value: enumerate every {r,p}-structure over {1..n} and
// count the satisfying ones. Only feasible for small n; the closed form is
// validated against this and then carries the larger sizes.
inline plp::Rational sentence_prob_brute(const RowSentence& s, int n) {
    logic::Vocabulary vocab;
    vocab.add_relation("p", 2);
    vocab.add_relation("r", 1);
    std::uint64_t satisfying = 0, total = 0;
    logic::for_each_structure(vocab, n, [&](const logic::FiniteStructure& world) {
        ++total;
        if (logic::eval_formula(world, *s.formula)) ++satisfying;
        return true;
    });
    return plp::Rational(satisfying, total);
}

inline const char* tc_source() {
    return "tc(X, Y) :- e(X, Y).\ntc(X, Y) :- e(X, Z), tc(Z, Y).\n";
}

// [LFP_{(x,y),X} e(x,y) v Ez(e(x,z) & X(z,y))](u,v)
inline logic::FormulaPtr tc_formula(const std::string& u, const std::string& v) {
    using namespace logic;
    auto body = disj(atom("e", {var("x"), var("y")}),
                     exists("z", conj(atom("e", {var("x"), var("z")}),
                                      atom("X", {var("z"), var("y")}))));
    return lfp({"x", "y"}, "X", body, {var(u), var(v)});
}

// The weighted branch mixture pulled back into the original program's world
// space: branch atoms re-index by name, and the nullary atoms a branch
// pinned re-enter as constant bits.
inline std::map<std::uint64_t, plp::Rational> mixture_worlds(
    const plp::ProbProgram& original, const std::vector<plp::NullaryBranch>& branches, int n) {
    logic::GroundAtomTable base(original.vocabulary(), n);
    std::map<std::uint64_t, plp::Rational> mix;
    for (const auto& branch : branches) {
        std::uint64_t pinned = 0;
        for (const auto& [name, value] : branch.values)
            if (value) {
                auto rel = base.relation_index(name);
                pinned |= std::uint64_t{1} << base.atom_index(static_cast<std::size_t>(rel), {});
            }
        auto dist = plp::world_distribution(branch.program, n);
        for (const auto& [mask, weight] : dist.worlds()) {
            std::uint64_t lifted = pinned;
            for (std::size_t bit = 0; bit < dist.atoms().size(); ++bit) {
                if (!(mask >> bit & 1)) continue;
                auto [rel, tuple] = dist.atoms().decode(bit);
                auto base_rel = base.relation_index(dist.atoms().relation(rel).name);
                lifted |= std::uint64_t{1}
                          << base.atom_index(static_cast<std::size_t>(base_rel), tuple);
            }
            mix[lifted] += branch.weight * weight;
        }
    }
    return mix;
}

}  // namespace oracles
