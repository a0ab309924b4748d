#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "nlsolve/graph.hpp"

namespace nlsolve {

enum class TreeStrategy {
  ShortestPathResistance,  // shortest-path tree under edge length 1/w from a max-degree root
  MinResistanceSpanning,   // minimum spanning tree under edge cost 1/w
};

TreeStrategy parse_tree_strategy(std::string_view name);
std::string_view to_string(TreeStrategy strategy);

/// Edge traversal inside a path or cycle: sign is +1 when walked from u to v.
struct OrientedEdge {
  int edge;
  int sign;

  bool operator==(const OrientedEdge&) const = default;
};

/// Rooted spanning tree with LCA lifting tables, root-to-node resistance sums and the
/// exactly measured stretch st(T) and condition number tau(T).
class SpanningTree {
 public:
  /// `tree_edges` must hold exactly n-1 edge indices forming a spanning tree of the
  /// (connected) graph; throws std::invalid_argument otherwise.
  SpanningTree(const Graph& graph, std::span<const int> tree_edges, int root);

  int root() const noexcept { return root_; }
  int parent(int node) const { return parent_[static_cast<std::size_t>(node)]; }
  int parent_edge(int node) const { return parent_edge_[static_cast<std::size_t>(node)]; }
  int depth(int node) const { return depth_[static_cast<std::size_t>(node)]; }
  double resistance_prefix(int node) const { return prefix_[static_cast<std::size_t>(node)]; }
  bool in_tree(int edge) const { return in_tree_[static_cast<std::size_t>(edge)] != 0; }
  /// Nodes in BFS order from the root.
  const std::vector<int>& order() const noexcept { return order_; }
  const std::vector<int>& non_tree_edges() const noexcept { return non_tree_; }

  int lca(int a, int b) const;
  /// Tree-path resistance between two nodes, sum of 1/w along the path.
  double path_resistance(int a, int b) const;

  /// Per-edge stretch w_e * (tree-path resistance between its endpoints); 1 on tree edges.
  const std::vector<double>& stretch() const noexcept { return stretch_; }
  /// W_C of the tree cycle through each edge (0 for tree edges).
  const std::vector<double>& cycle_resistances() const noexcept { return cycle_resistance_; }
  double st() const noexcept { return st_; }
  /// Sum over non-tree edges of w_e / W_C.
  double tau() const noexcept { return tau_; }

  /// Tree path from v to u for non-tree edge (u, v); throws std::invalid_argument for
  /// tree edges.
  std::vector<OrientedEdge> tree_path(int edge) const;

  /// The tree cycle of non-tree edge (u, v), oriented as the edge walked v -> u followed
  /// by the tree path u -> v. Written into `out` (cleared first).
  void tree_cycle(int edge, std::vector<OrientedEdge>& out) const;
  std::vector<OrientedEdge> tree_cycle(int edge) const;

  /// W_C = (1/w_e + tree-path resistance)^-1, from prefix sums and the LCA.
  double cycle_resistance(int edge) const;

  const Graph& graph() const noexcept { return *graph_; }

 private:
  void require_non_tree(int edge) const;

  const Graph* graph_;
  int root_;
  int levels_ = 1;
  std::vector<int> parent_;
  std::vector<int> parent_edge_;
  std::vector<int> depth_;
  std::vector<std::vector<int>> up_;
  std::vector<double> prefix_;
  std::vector<char> in_tree_;
  std::vector<int> order_;
  std::vector<int> non_tree_;
  std::vector<double> stretch_;
  std::vector<double> cycle_resistance_;
  double st_ = 0.0;
  double tau_ = 0.0;
};

/// Root rule used by both strategies: maximum degree, lowest index on ties.
int max_degree_root(const Graph& graph);

/// Throws ValidationError if the graph is disconnected.
SpanningTree build_tree(const Graph& graph, TreeStrategy strategy);

/// Signed sum of g around the tree cycle of a non-tree edge (orientation of tree_cycle()).
double cycle_flow(const SpanningTree& tree, const FlowState& g, int edge);

/// Potentials with x(root) = 0 and x_u - x_v = g_uv on every tree edge.
NodeVector tree_potentials(const SpanningTree& tree, const FlowState& g);

}  // namespace nlsolve
