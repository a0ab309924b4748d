#pragma once

#include <iosfwd>
#include <string>

#include "nlsolve/graph.hpp"

namespace nlsolve {

/// Edge-list instance text:
///
///     # comment
///     n m
///     u v w [nl_spec]      (m lines; nl_spec defaults to identity)
///
/// Endpoints are 0-based. Equal nl_spec strings share one Nonlinearity.
/// Malformed lines, NaN/inf, out-of-range nodes and a wrong edge count raise ParseError
/// with the line number; non-positive weights, self loops and parallel edges raise
/// ValidationError.
Graph read_instance(std::istream& in);
Graph read_instance_file(const std::string& path);

/// One real per line, '#' comments and blank lines ignored.
NodeVector read_vector(std::istream& in);
NodeVector read_vector_file(const std::string& path);

void write_instance(std::ostream& out, const Graph& graph);

}  // namespace nlsolve
