#pragma once

#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "plp/errors.hpp"

namespace plp::logic {

enum class TermKind { Variable, Constant };

struct Term {
    TermKind kind = TermKind::Variable;
    std::string name;
    auto operator<=>(const Term&) const = default;
};

inline Term var(std::string name) { return {TermKind::Variable, std::move(name)}; }
inline Term cst(std::string name) { return {TermKind::Constant, std::move(name)}; }

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Leaf and node payloads. Truth covers the two constants needed as
// substitution targets and as degenerate quantifier-elimination results.
struct Truth {
    bool value = true;
};
struct Atom {
    std::string pred;
    std::vector<Term> args;
};
struct Equality {
    Term lhs, rhs;
};
struct Not {
    FormulaPtr body;
};
struct And {
    FormulaPtr lhs, rhs;
};
struct Or {
    FormulaPtr lhs, rhs;
};
struct Implies {
    FormulaPtr lhs, rhs;
};
struct Exists {
    std::string variable;
    FormulaPtr body;
};
struct ForAll {
    std::string variable;
    FormulaPtr body;
};
// Least fixed point of the operator induced by `body` on the second-order
// variable `rel_var` with first-order tuple `vars`, applied to `args`.
// `rel_var` must occur only positively in `body` (checked at construction).
struct Lfp {
    std::vector<std::string> vars;
    std::string rel_var;
    FormulaPtr body;
    std::vector<Term> args;
};

// Immutable formula tree. Shared subtrees are fine; nothing mutates a node
// after construction, which is what makes value-style sharing safe across
// threads.
class Formula {
public:
    using Node = std::variant<Truth, Atom, Equality, Not, And, Or, Implies, Exists, ForAll, Lfp>;

    explicit Formula(Node node);

    const Node& node() const { return node_; }

    // No Exists/ForAll/Lfp anywhere in the tree.
    bool quantifier_free() const { return quantifier_free_; }
    // No Lfp anywhere in the tree.
    bool first_order() const { return first_order_; }

private:
    Node node_;
    bool quantifier_free_ = true;
    bool first_order_ = true;
};

FormulaPtr truth(bool value);
FormulaPtr atom(std::string pred, std::vector<Term> args);
FormulaPtr equal(Term lhs, Term rhs);
FormulaPtr negation(FormulaPtr body);
FormulaPtr conj(FormulaPtr lhs, FormulaPtr rhs);
FormulaPtr disj(FormulaPtr lhs, FormulaPtr rhs);
FormulaPtr implies(FormulaPtr lhs, FormulaPtr rhs);
FormulaPtr exists(std::string variable, FormulaPtr body);
FormulaPtr forall(std::string variable, FormulaPtr body);
FormulaPtr lfp(std::vector<std::string> vars, std::string rel_var, FormulaPtr body,
               std::vector<Term> args);

// Left-folded conjunction/disjunction; empty input gives the neutral constant.
FormulaPtr conj_all(const std::vector<FormulaPtr>& parts);
FormulaPtr disj_all(const std::vector<FormulaPtr>& parts);

// True when every occurrence of `rel_var` (as an atom predicate, outside the
// scope of a shadowing Lfp binder) sits under an even number of negations.
// Implies(a, b) counts the antecedent as negated once.
bool positive_in(const Formula& f, const std::string& rel_var);

// Rewrites Implies to not/or and ForAll to not-exists-not, leaving one
// evaluation path. Lfp bodies are desugared in place.
FormulaPtr desugar(const FormulaPtr& f);

std::set<std::string> free_variables(const Formula& f);

// Relation symbols appearing as atom predicates, minus second-order
// variables bound by an enclosing Lfp.
std::set<std::string> relation_symbols(const Formula& f);

// Deterministic s-expression rendering, used by golden tests and debugging.
// Not a stability contract.
std::string to_sexpr(const Formula& f);

// Compact infix rendering for reports: "r(x) & ~p(x,y)".
std::string pretty(const Formula& f);

}  // namespace plp::logic
