#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlsolve/nonlinearity.hpp"

namespace nlsolve {

using NodeVector = std::vector<double>;
using NonlinearityHandle = std::shared_ptr<const Nonlinearity>;

/// Edge stored once with u < v; g_e is the flow from u to v.
struct Edge {
  int u;
  int v;
  double w;
  NonlinearityHandle nl;
};

/// Input edge before canonicalization; endpoints may come in either order.
struct EdgeSpec {
  int a;
  int b;
  double w;
  NonlinearityHandle nl;
};

struct Incidence {
  int neighbor;
  int edge;
  int sign;  // +1 when this node is the edge's u, -1 when it is v
};

/// Signed per-edge flow in canonical orientation. g_vu is -g_uv by convention and
/// never stored.
struct FlowState {
  std::vector<double> g;

  FlowState() = default;
  explicit FlowState(std::size_t m) : g(m, 0.0) {}
  explicit FlowState(std::vector<double> values) : g(std::move(values)) {}

  std::size_t size() const noexcept { return g.size(); }
  double& operator[](std::size_t e) { return g[e]; }
  double operator[](std::size_t e) const { return g[e]; }
};

/// Undirected simple graph with per-edge weights and response functions.
///
/// Construction rejects self loops, parallel edges, out-of-range endpoints,
/// non-positive or non-finite weights and null nonlinearities (std::invalid_argument).
/// Connectivity is not enforced here; validate_instance() reports it.
class Graph {
 public:
  Graph(int n, std::vector<EdgeSpec> edges);

  int num_nodes() const noexcept { return n_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const Incidence> incident(int node) const {
    const auto begin = offsets_[static_cast<std::size_t>(node)];
    const auto end = offsets_[static_cast<std::size_t>(node) + 1];
    return {incidence_.data() + begin, end - begin};
  }
  int degree(int node) const { return static_cast<int>(incident(node).size()); }

  bool is_connected() const;
  /// Largest k_bound over all edges.
  double max_k_bound() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidence_;
};

/// (Lx)_i = sum_j w_ij h_ij(x_i - x_j).
NodeVector apply_laplacian(const Graph& graph, std::span<const double> x);

/// Per-node sum_j w_ij h_ij(g_ij) - b_i. Throws ValidationError when b does not sum to
/// zero within 1e-9 * ||b||_inf.
NodeVector b_residual(const Graph& graph, const FlowState& g, std::span<const double> b);

/// Per-edge g_uv - (x_u - x_v).
std::vector<double> p_residual(const Graph& graph, const FlowState& g, std::span<const double> x);

/// Throws ValidationError unless |sum b| <= 1e-9 * ||b||_inf.
void require_balanced(std::span<const double> b);

struct ValidationReport {
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
  std::string summary() const;
};

/// Connectivity, positive weights, and sum(b) = 0.
ValidationReport validate_instance(const Graph& graph, std::span<const double> b);

double max_abs(std::span<const double> v);

}  // namespace nlsolve
