#pragma once

#include <span>

#include "nlsolve/graph.hpp"
#include "nlsolve/spantree.hpp"

namespace nlsolve {

struct OracleSolution {
  FlowState g_star;
  NodeVector x_star;  // x*(n-1) = 0
  double phi_star = 0.0;
  double kkt_residual = 0.0;  // ||L(x*) - b||_inf
  int newton_steps = 0;
};

/// Dense reference solver for small instances.
///
/// Damped Newton on F(x) = L(x) - b with the last node pinned to 0. The Jacobian is the
/// Laplacian with weights w_e h'_e(x_u - x_v), factored densely with partial pivoting.
/// Steps are halved (at most 60 times) while ||F||_inf does not decrease. Stops when
/// ||F||_inf <= tol * (1 + ||b||_inf). Throws ValidationError for invalid instances or
/// more than 2000 nodes, InvariantViolation after 200 steps without convergence.
OracleSolution reference_solve(const Graph& graph, std::span<const double> b, double tol = 1e-12);

/// True iff every tree cycle carries |G_C| <= tol, i.e. g is p-feasible.
bool fundamental_cycle_certificate(const SpanningTree& tree, const FlowState& g, double tol);

}  // namespace nlsolve
