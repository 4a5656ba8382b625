#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plp {

// Runs one toolkit invocation (the arguments after the executable name)
// against the given streams and returns the process exit code:
//   0 success
//   1 parse or usage error
//   2 unstratifiable program
//   3 constants in the input
//   4 scale guard refusal
//   5 semantic error (bad query, missing probability, ...)
//   6 I/O failure
// Successful payloads go to `out`; every failure writes one line
// "error: <kind>: <diagnostic>" to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plp
