#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plp/logic/formula.hpp"
#include "plp/logic/vocabulary.hpp"
#include "plp/program.hpp"
#include "plp/rational.hpp"

namespace plp {

// Equality-and-atom diagram of a variable tuple. block_of is a restricted
// growth string: block_of[0] == 0 and each later entry is at most one more
// than the running maximum, so equal tuples get equal encodings. polarity
// holds one bit per extensional atom over the block representatives, indexed
// like a ground atom table whose domain is the blocks (nullary relations
// first the table's way; zero blocks leave only nullary atoms).
struct QfType {
    std::vector<int> block_of;
    std::uint64_t polarity = 0;

    int vars() const { return static_cast<int>(block_of.size()); }
    int blocks() const;

    auto operator<=>(const QfType&) const = default;
};

// All diagrams of a k-tuple: partitions in lexicographic growth-string
// order, polarities ascending within each partition. Throws ScaleError when
// one partition needs more than 20 atom bits.
std::vector<QfType> enumerate_qf_types(const logic::Vocabulary& extensional, int k);

// Number of atom bits a partition with the given block count carries.
std::size_t type_atom_count(const logic::Vocabulary& extensional, int blocks);

// Quantifier-free formula over vars pinning exactly this diagram: equalities
// tying each variable to its block representative, then inequalities between
// representatives, then the atom literals in table order.
logic::FormulaPtr type_formula(const QfType& t, const std::vector<std::string>& vars,
                               const logic::Vocabulary& extensional);

// Rendering helper for reports: the pinning formula over x1..xk.
std::string type_name(const QfType& t, const logic::Vocabulary& extensional);

// Truth of a first-order formula at any tuple realizing `context`, in the
// countable homogeneous limit of the extensional vocabulary. vars names the
// context slots; free variables of f must be among them. The answer is the
// almost-sure limit value for every choice of fact probabilities strictly
// between 0 and 1. Intensional symbols are rejected.
bool generic_eval(const logic::Formula& f, const QfType& context,
                  const std::vector<std::string>& vars,
                  const logic::Vocabulary& extensional);

// Replaces f by a quantifier-free formula with the same almost-sure value on
// every diagram of vars: the disjunction of the accepted diagrams, collapsed
// to truth constants at the degenerate ends. Only relations occurring in f
// appear in the result.
logic::FormulaPtr asymptotic_qe(const logic::Formula& f, const std::vector<std::string>& vars,
                                const logic::Vocabulary& extensional);

// For each intensional predicate, the argument diagrams on which it holds
// almost surely in the large-domain limit.
struct TypeTable {
    std::map<std::string, std::set<QfType>> accepted;

    std::size_t total() const;
};

// Accepted-type totals after each pass over a stratum's rules; the sequence
// never decreases and each strict step adds at least one type.
struct FixpointStats {
    std::vector<std::size_t> accepted_per_pass;
};

// Stratum-by-stratum least fixpoint over diagrams. Requires a constant-free
// stratifiable program whose facts all have probabilities strictly inside
// (0,1) and arity at least one; split nullary facts off first.
TypeTable asymptotic_fixpoint(const ProbProgram& p, FixpointStats* stats = nullptr);

// One conditioning branch of a program: the named nullary facts pinned to
// the given truth values, occurrences rewritten away, weight equal to the
// probability of the assignment.
struct NullaryBranch {
    std::map<std::string, bool> values;
    Rational weight;
    ProbProgram program;
};

// Splits on all joint truth assignments of the nullary facts, in ascending
// binary order over the names sorted alphabetically (bit set = true). The
// branch weights sum to one and the weighted branch distributions compose
// to the original distribution at every domain size.
std::vector<NullaryBranch> nullary_case_split(const ProbProgram& p);

// Result of the limit compilation. Each branch program is determinate and
// acyclic and induces, together with its weight and pinned nullary values,
// a family whose distance to the input family vanishes as the domain grows.
// Programs without nullary facts produce a single branch of weight one.
struct TransformResult {
    std::vector<NullaryBranch> branches;

    bool single() const { return branches.size() == 1; }
    const ProbProgram& program() const;
};

TransformResult asymptotic_transform(const ProbProgram& p);

// Limit probability of a quantifier-free query. Distinct variables denote
// distinct fresh elements; numerals denote themselves. Evaluates the
// transform on the smallest domain carrying the query tuple.
Rational asymptotic_query_prob(const ProbProgram& p, const logic::Formula& query);

}  // namespace plp
