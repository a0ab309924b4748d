#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlsolve/solver.hpp"

namespace nlsolve::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 2,
  kParseFailure = 3,
  kInternalFailure = 4,
};

/// Runs `nlsolve <command> ...` with argv-style arguments (args[0] is the program name).
/// Reports go to `out`, one-line diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Solve report as JSON with fixed key order and %.17g floats. With `include_timing`
/// false, wall_time_s is written as 0 so repeated runs are byte-identical.
void write_solve_json(std::ostream& out, const SolveReport& report, bool include_timing);

}  // namespace nlsolve::cli
