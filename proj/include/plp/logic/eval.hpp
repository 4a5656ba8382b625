#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "plp/logic/formula.hpp"
#include "plp/logic/structure.hpp"

namespace plp::logic {

// Variable assignment into the domain {1..n}.
using Assignment = std::map<std::string, int>;

// Interpretations for free second-order variables.
using RelationBindings = std::map<std::string, std::set<std::vector<int>>>;

// Tarski evaluation with least-fixed-point semantics for Lfp nodes (iterate
// the induced operator from the empty relation). Atom predicates resolve
// against `rels` first (Lfp-bound or caller-supplied second-order variables),
// then against the structure; anything else is an error.
bool eval_formula(const FiniteStructure& s, const Formula& f, const Assignment& assignment = {},
                  const RelationBindings& rels = {});

// One application of the operator induced by `body` on `rel_var` over the
// tuple `vars`: returns { a : s |= body[vars := a, rel_var := current] }.
// `params`/`rel_params` interpret any other free variables of the body.
std::set<std::vector<int>> lfp_step(const FiniteStructure& s,
                                    const std::vector<std::string>& vars,
                                    const std::string& rel_var, const Formula& body,
                                    const std::set<std::vector<int>>& current,
                                    const Assignment& params = {},
                                    const RelationBindings& rel_params = {});

}  // namespace plp::logic
