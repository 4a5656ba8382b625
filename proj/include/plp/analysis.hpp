#pragma once

#include <map>
#include <string>
#include <vector>

#include "plp/program.hpp"

namespace plp {

// Assignment of intensional symbols to strata. Extensional symbols (facts
// and relations used only in bodies) sit at level 0; a clause may use lower
// or same-level symbols positively and strictly lower ones under negation.
struct Stratification {
    std::map<std::string, int> level_of;  // every relation symbol, 0-based
    int levels = 0;                       // highest intensional level
    // rule indices grouped by head level; group g holds level g+1
    std::vector<std::vector<int>> rules_by_level;

    int level(const std::string& rel) const {
        auto it = level_of.find(rel);
        return it == level_of.end() ? 0 : it->second;
    }
};

// Lowest-first greedy assignment over the dependency graph. Throws
// UnstratifiableError naming a cycle through negation.
Stratification stratify(const ProbProgram& p);

// A clause is determinate when every body variable occurs in its head.
struct DeterminateReport {
    bool determinate = true;
    // (rule index, body-only variables) per offending clause
    std::vector<std::pair<int, std::vector<std::string>>> offenders;
};
DeterminateReport check_determinate(const ProbProgram& p);

// Strong acyclicity: no intensional symbol occurs in any clause body. A
// program whose dependency graph is a DAG counts as acyclic when unfolding
// (below) succeeds in reaching the strong form.
bool check_acyclic(const ProbProgram& p);

// Substitutes intensional body atoms by their definitions, in topological
// order, until no intensional symbol occurs in any body. Every predicate
// keeps its (now flattened) clauses. Negated intensional atoms unfold only
// when every defining clause is free of body-only variables; otherwise the
// complement is not expressible as clause bodies and this throws. Throws on
// dependency cycles.
ProbProgram unfold_acyclic(const ProbProgram& p);

}  // namespace plp
