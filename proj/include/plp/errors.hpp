#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plp {

// Base for all toolkit errors. Subclasses map onto CLI exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Syntax errors carry a 1-based source position.
struct ParseError : Error {
    ParseError(int line, int column, const std::string& what_arg)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what_arg),
          line(line),
          column(column) {}
    int line;
    int column;
};

// Negation through a recursive cycle; names the offending symbols.
struct UnstratifiableError : Error {
    UnstratifiableError(std::vector<std::string> cycle_arg, const std::string& what_arg)
        : Error(what_arg), cycle(std::move(cycle_arg)) {}
    std::vector<std::string> cycle;
};

// Constants where only a pure relational setting is supported.
struct ConstantsError : Error {
    using Error::Error;
};

// Desk-scale guard refusal. Explicit, never silent truncation.
struct ScaleError : Error {
    using Error::Error;
};

// Formula/structure evaluation errors (unbound variable, arity clash, ...).
struct EvalError : Error {
    using Error::Error;
};

// Semantic precondition violations on programs (undeclared extensional
// symbol in distribution semantics, boundary probability where forbidden, ...).
struct ProgramError : Error {
    using Error::Error;
};

}  // namespace plp
