#pragma once

#include <span>
#include <vector>

#include "nlsolve/graph.hpp"
#include "nlsolve/spantree.hpp"

namespace nlsolve {

struct EnergyBreakdown {
  double total = 0.0;
  std::vector<double> per_edge;  // w_e * phi_e(g_e)
};

/// Adjusted weights w_e h_e(g_e) / g_e of the Laplacian linearized at a flow.
struct LinearizedWeights {
  std::vector<double> w_hat;
};

/// Phi(g) = sum_e w_e phi_e(g_e), with the per-edge terms.
EnergyBreakdown total_energy(const Graph& graph, const FlowState& g);

/// Phi(g) alone, compensated summation.
double energy(const Graph& graph, const FlowState& g);

/// |g_e| < 1e-12 uses the limit w_e h'(0).
LinearizedWeights linearized_weights(const Graph& graph, const FlowState& g_hat);

/// sum_e w_hat_e g_e^2 / 2.
double linearized_energy(const Graph& graph, const LinearizedWeights& weights, const FlowState& g);

/// sum_e w_hat_e (v_u - v_v)^2.
double laplacian_quadratic_form(const Graph& graph, const LinearizedWeights& weights,
                                std::span<const double> v);

/// sqrt(Q(x - x*) / Q(x*)) under the given weights. Q is shift invariant, so no
/// alignment of the two potentials is needed.
double accuracy(const Graph& graph, const LinearizedWeights& weights, std::span<const double> x,
                std::span<const double> x_star);
/// Q(x - x*) / Q(x*).
double accuracy_sq(const Graph& graph, const LinearizedWeights& weights, std::span<const double> x,
                   std::span<const double> x_star);

/// Lagrangian dual Theta(x) evaluated through a b-feasible g. Throws ValidationError if
/// g is not b-feasible to 1e-6 * ||b||_inf (absolute 1e-6 when b = 0).
double dual_value(const Graph& graph, std::span<const double> x, const FlowState& g,
                  std::span<const double> b);

/// Per-edge TGAP terms over non-tree edges, using the tree potentials of g. Does not
/// check feasibility.
double tree_gap_unchecked(const Graph& graph, const SpanningTree& tree, const FlowState& g);

/// TGAP(g) = Phi(g) - Theta(x_hat) for a b-feasible g; an upper bound on Phi(g) - Phi*.
double tree_gap(const Graph& graph, const SpanningTree& tree, const FlowState& g,
                std::span<const double> b);

}  // namespace nlsolve
