#pragma once

#include <set>
#include <string>
#include <vector>

#include "plp/logic/vocabulary.hpp"
#include "plp/logic/formula.hpp"
#include "plp/rational.hpp"

namespace plp {

// A probabilistic fact declaration: every ground instance of the relation is
// an independent coin with the same exact probability. Facts introduced by
// desugaring probabilistic rules are flagged auxiliary; the transform may
// drop them once they no longer occur in any rule body.
struct ProbFact {
    std::string name;
    int arity = 0;
    Rational q;
    bool auxiliary = false;
    int line = 0;
};

struct HeadAtom {
    std::string pred;
    std::vector<logic::Term> args;
};

struct BodyLiteral {
    enum class Kind { Atom, NegAtom, Eq, Neq };
    Kind kind = Kind::Atom;
    // Atom / NegAtom
    std::string pred;
    std::vector<logic::Term> args;
    // Eq / Neq
    logic::Term lhs, rhs;

    static BodyLiteral pos(std::string pred, std::vector<logic::Term> args) {
        BodyLiteral l;
        l.kind = Kind::Atom;
        l.pred = std::move(pred);
        l.args = std::move(args);
        return l;
    }
    static BodyLiteral neg(std::string pred, std::vector<logic::Term> args) {
        BodyLiteral l = pos(std::move(pred), std::move(args));
        l.kind = Kind::NegAtom;
        return l;
    }
    static BodyLiteral eq(logic::Term lhs, logic::Term rhs) {
        BodyLiteral l;
        l.kind = Kind::Eq;
        l.lhs = std::move(lhs);
        l.rhs = std::move(rhs);
        return l;
    }
    static BodyLiteral neq(logic::Term lhs, logic::Term rhs) {
        BodyLiteral l = eq(std::move(lhs), std::move(rhs));
        l.kind = Kind::Neq;
        return l;
    }
};

struct Clause {
    HeadAtom head;
    std::vector<BodyLiteral> body;
    int line = 0;
};

// A stratified-Datalog program over probabilistic facts. Facts and rules keep
// declaration order; all canonical orderings are applied at serialization and
// world-indexing time, not here.
struct ProbProgram {
    std::vector<ProbFact> facts;
    std::vector<Clause> rules;

    std::set<std::string> fact_symbols() const;
    std::set<std::string> head_symbols() const;
    // body relations that are neither facts nor rule heads (classic Datalog
    // EDB-by-use; allowed for deterministic evaluation, rejected by the
    // distribution semantics)
    std::set<std::string> extensional_by_use() const;
    std::set<std::string> constant_symbols() const;
    bool has_constants() const { return !constant_symbols().empty(); }

    const ProbFact* fact(const std::string& name) const;
    int arity_of(const std::string& rel) const;  // -1 when unknown

    // Full relational vocabulary (facts, heads, extensional-by-use) plus any
    // constants occurring in rules.
    logic::Vocabulary vocabulary() const;

    // Structural well-formedness: consistent arities, fact/head disjointness,
    // probabilities in [0,1], no duplicate fact declarations, and range
    // restriction (every clause variable occurs in the head or in a positive
    // body atom). Throws Error on violation.
    void validate() const;
};

// Canonical .plp rendering: facts first (sorted by symbol), then clauses
// sorted by (head, canonicalized text), variables renamed X1, X2, ... per
// clause. Identical program values produce identical bytes.
std::string serialize_program(const ProbProgram& p);

// Single clause in canonical form (exposed for reports and tests).
std::string serialize_clause(const Clause& c);

}  // namespace plp
