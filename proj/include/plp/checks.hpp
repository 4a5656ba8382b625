#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plp/exact.hpp"

namespace plp {

// Witness for a projectivity failure: the {1..m}-world whose probability
// under Q^(m) differs from its marginal under Q^(n).
struct ProjectivityWitness {
    int m = 0, n = 0;
    logic::FiniteStructure world;
    Rational direct;    // Q^(m)(world)
    Rational marginal;  // pushforward of Q^(n)
};

struct ProjectivityReport {
    bool holds = true;
    int n_max = 0;
    std::optional<ProjectivityWitness> witness;
};

ProjectivityReport check_projective(const FamilyAccessor& family, int n_max);

struct ExchangeabilityWitness {
    int n = 0;
    logic::FiniteStructure world;
    std::vector<int> permutation;
    Rational weight, permuted_weight;
};

struct ExchangeabilityReport {
    bool holds = true;
    int n_max = 0;
    std::optional<ExchangeabilityWitness> witness;
};

ExchangeabilityReport check_exchangeable(const FamilyAccessor& family, int n_max);

// The IP/CIP definitions quantify over all formulas; the checkers sweep all
// conjunctions of at most max_literals literals (atoms over x1..xk, equalities,
// and their negations) for k <= max_vars, deduplicated by satisfying set.
struct FormulaBudget {
    int max_vars = 2;
    int max_literals = 4;
};

struct IndependenceWitness {
    int n = 0, m = 0;           // block sizes
    std::string phi, psi;       // pretty-printed formulas
    Rational joint, left, right;  // P(both), P(phi block), P(psi block)
};

struct IndependenceReport {
    bool holds = true;
    bool projective = true;  // IP/CIP presuppose a projective family
    int n_max = 0;
    std::optional<IndependenceWitness> witness;
};

IndependenceReport check_IP(const FamilyAccessor& family, int n_max,
                            const FormulaBudget& budget = {});

struct ConditionalWitness {
    int n = 0;  // formula block size; events live in Q^(n+1)
    logic::FiniteStructure given;  // the conditioning (n-1)-world
    std::string phi;
    Rational joint, left, right, given_prob;  // P(A&B&C), P(A&C), P(B&C), P(C)
};

struct ConditionalReport {
    bool holds = true;
    bool projective = true;
    int n_max = 0;
    std::optional<ConditionalWitness> witness;
};

ConditionalReport check_CIP(const FamilyAccessor& family, int n_max,
                            const FormulaBudget& budget = {});

// Carnap's reference measure over one unary relation r: uniform over
// isomorphism classes, uniform within each class.
WorldDistribution m_star(int n);
FamilyAccessor m_star_family();

// m*(r(n+1) | exactly the indices in I among {1..n} are r), by brute force
// over m_star(n+1).
Rational m_star_conditional(int n, const std::set<int>& I);

}  // namespace plp
