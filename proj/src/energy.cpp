#include "nlsolve/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

constexpr double kZeroFlow = 1e-12;
constexpr double kFeasibilityTol = 1e-6;

class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_flow(const Graph& graph, const FlowState& g) {
  if (g.size() != static_cast<std::size_t>(graph.num_edges())) {
    throw std::invalid_argument("flow has " + std::to_string(g.size()) + " entries, graph has " +
                                std::to_string(graph.num_edges()) + " edges");
  }
}

void require_b_feasible(const Graph& graph, const FlowState& g, std::span<const double> b) {
  const auto r = b_residual(graph, g, b);
  const double scale = max_abs(b);
  const double err = max_abs(r);
  if (err > kFeasibilityTol * (scale > 0.0 ? scale : 1.0)) {
    throw ValidationError("flow is not b-feasible (max residual " + std::to_string(err) + ")");
  }
}

double edge_difference(const Graph& graph, std::span<const double> x, int e) {
  const auto& ed = graph.edge(e);
  return x[static_cast<std::size_t>(ed.u)] - x[static_cast<std::size_t>(ed.v)];
}

}  // namespace

EnergyBreakdown total_energy(const Graph& graph, const FlowState& g) {
  check_flow(graph, g);
  EnergyBreakdown out;
  out.per_edge.resize(g.size());
  CompensatedSum sum;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    const double term = ed.w * ed.nl->phi(g[static_cast<std::size_t>(e)]);
    out.per_edge[static_cast<std::size_t>(e)] = term;
    sum.add(term);
  }
  out.total = sum.value();
  return out;
}

double energy(const Graph& graph, const FlowState& g) {
  check_flow(graph, g);
  CompensatedSum sum;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    sum.add(ed.w * ed.nl->phi(g[static_cast<std::size_t>(e)]));
  }
  return sum.value();
}

LinearizedWeights linearized_weights(const Graph& graph, const FlowState& g_hat) {
  check_flow(graph, g_hat);
  LinearizedWeights out;
  out.w_hat.resize(g_hat.size());
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    const double ge = g_hat[static_cast<std::size_t>(e)];
    out.w_hat[static_cast<std::size_t>(e)] =
        std::abs(ge) < kZeroFlow ? ed.w * ed.nl->h_prime(0.0) : ed.w * ed.nl->h(ge) / ge;
  }
  return out;
}

double linearized_energy(const Graph& graph, const LinearizedWeights& weights, const FlowState& g) {
  check_flow(graph, g);
  CompensatedSum sum;
  for (std::size_t e = 0; e < g.size(); ++e) sum.add(0.5 * weights.w_hat[e] * g[e] * g[e]);
  return sum.value();
}

double laplacian_quadratic_form(const Graph& graph, const LinearizedWeights& weights,
                                std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw std::invalid_argument("quadratic form: vector size does not match node count");
  }
  CompensatedSum sum;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const double d = edge_difference(graph, v, e);
    sum.add(weights.w_hat[static_cast<std::size_t>(e)] * d * d);
  }
  return sum.value();
}

double accuracy_sq(const Graph& graph, const LinearizedWeights& weights, std::span<const double> x,
                   std::span<const double> x_star) {
  if (x.size() != x_star.size()) throw std::invalid_argument("accuracy: size mismatch");
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_star[i];
  return laplacian_quadratic_form(graph, weights, diff) /
         laplacian_quadratic_form(graph, weights, x_star);
}

double accuracy(const Graph& graph, const LinearizedWeights& weights, std::span<const double> x,
                std::span<const double> x_star) {
  return std::sqrt(accuracy_sq(graph, weights, x, x_star));
}

double dual_value(const Graph& graph, std::span<const double> x, const FlowState& g,
                  std::span<const double> b) {
  check_flow(graph, g);
  if (x.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw std::invalid_argument("dual_value: potential size does not match node count");
  }
  require_b_feasible(graph, g, b);
  CompensatedSum sum;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    const double gt = edge_difference(graph, x, e);
    const double ge = g[static_cast<std::size_t>(e)];
    sum.add(ed.w * ed.nl->phi(gt));
    sum.add(-ed.w * gt * (ed.nl->h(gt) - ed.nl->h(ge)));
  }
  return sum.value();
}

double tree_gap_unchecked(const Graph& graph, const SpanningTree& tree, const FlowState& g) {
  check_flow(graph, g);
  const auto x_hat = tree_potentials(tree, g);
  CompensatedSum sum;
  for (int e : tree.non_tree_edges()) {
    const auto& ed = graph.edge(e);
    const double ge = g[static_cast<std::size_t>(e)];
    const double d = edge_difference(graph, x_hat, e);
    sum.add(ed.w * ed.nl->phi_difference(ge, d));
    sum.add(ed.w * d * (ed.nl->h(d) - ed.nl->h(ge)));
  }
  return sum.value();
}

double tree_gap(const Graph& graph, const SpanningTree& tree, const FlowState& g,
                std::span<const double> b) {
  check_flow(graph, g);
  require_b_feasible(graph, g, b);
  return tree_gap_unchecked(graph, tree, g);
}

}  // namespace nlsolve
