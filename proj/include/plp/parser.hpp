#pragma once

#include <string>

#include "plp/logic/formula.hpp"
#include "plp/program.hpp"

namespace plp {

// Parses ProbLog-like surface syntax:
//
//   % comment to end of line
//   1/2 :: r(X).                   probabilistic fact (decimal or num/den)
//   s(X) :- r(X), \+ q(X, Y).      rule; \+ is negation
//   t(X, Y) :- X = Y.              equality / X \= Y inequality builtins
//   0.3 :: s(X) :- q(X, Y).        probabilistic rule, desugared into an
//                                  auxiliary fact aux_<k> plus a plain rule
//   path(X) :- edge(a, X).         lowercase identifiers are constants
//
// Variables start uppercase. Facts take distinct variable tuples. Errors are
// reported with 1-based line and column.
ProbProgram parse_program(const std::string& text);

// Query syntax for the command line: a quantifier-free formula over atoms
// whose arguments are numerals (domain elements) or variables, with
// connectives & (or ","), |, ~ (or "\+"), parentheses, "true"/"false",
// and =, \= between terms. Numerals become constants named by their value.
logic::FormulaPtr parse_query(const std::string& text);

}  // namespace plp
