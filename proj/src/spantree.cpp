#include "nlsolve/spantree.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "nlsolve/errors.hpp"

namespace nlsolve {

TreeStrategy parse_tree_strategy(std::string_view name) {
  if (name == "spt" || name == "shortest_path") return TreeStrategy::ShortestPathResistance;
  if (name == "mst" || name == "min_spanning") return TreeStrategy::MinResistanceSpanning;
  throw std::invalid_argument("unknown tree strategy '" + std::string(name) + "' (use spt or mst)");
}

std::string_view to_string(TreeStrategy strategy) {
  return strategy == TreeStrategy::ShortestPathResistance ? "spt" : "mst";
}

SpanningTree::SpanningTree(const Graph& graph, std::span<const int> tree_edges, int root)
    : graph_(&graph), root_(root) {
  const int n = graph.num_nodes();
  const int m = graph.num_edges();
  const auto un = static_cast<std::size_t>(n);
  if (root < 0 || root >= n) throw std::invalid_argument("tree root out of range");
  if (tree_edges.size() != un - 1) {
    throw std::invalid_argument("spanning tree needs exactly n-1 edges");
  }
  in_tree_.assign(static_cast<std::size_t>(m), 0);
  for (int e : tree_edges) {
    if (e < 0 || e >= m) throw std::invalid_argument("tree edge index out of range");
    if (in_tree_[static_cast<std::size_t>(e)]) throw std::invalid_argument("duplicate tree edge");
    in_tree_[static_cast<std::size_t>(e)] = 1;
  }

  parent_.assign(un, -1);
  parent_edge_.assign(un, -1);
  depth_.assign(un, 0);
  prefix_.assign(un, 0.0);
  order_.reserve(un);
  parent_[static_cast<std::size_t>(root)] = root;
  order_.push_back(root);
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const int node = order_[head];
    for (const auto& inc : graph.incident(node)) {
      if (!in_tree_[static_cast<std::size_t>(inc.edge)] || inc.edge == parent_edge(node)) continue;
      const auto child = static_cast<std::size_t>(inc.neighbor);
      if (parent_[child] != -1) throw std::invalid_argument("tree edges contain a cycle");
      parent_[child] = node;
      parent_edge_[child] = inc.edge;
      depth_[child] = depth(node) + 1;
      prefix_[child] = prefix_[static_cast<std::size_t>(node)] + 1.0 / graph.edge(inc.edge).w;
      order_.push_back(inc.neighbor);
    }
  }
  if (order_.size() != un) throw std::invalid_argument("tree edges do not span the graph");

  levels_ = std::max(1, static_cast<int>(std::bit_width(un)));
  up_.assign(static_cast<std::size_t>(levels_), parent_);
  for (int l = 1; l < levels_; ++l) {
    const auto& prev = up_[static_cast<std::size_t>(l - 1)];
    auto& cur = up_[static_cast<std::size_t>(l)];
    for (std::size_t v = 0; v < un; ++v) cur[v] = prev[static_cast<std::size_t>(prev[v])];
  }

  stretch_.assign(static_cast<std::size_t>(m), 1.0);
  cycle_resistance_.assign(static_cast<std::size_t>(m), 0.0);
  for (int e = 0; e < m; ++e) {
    const auto& ed = graph.edge(e);
    if (in_tree(e)) {
      st_ += 1.0;
      continue;
    }
    non_tree_.push_back(e);
    const double path = path_resistance(ed.u, ed.v);
    stretch_[static_cast<std::size_t>(e)] = ed.w * path;
    st_ += ed.w * path;
    const double wc = 1.0 / (1.0 / ed.w + path);
    cycle_resistance_[static_cast<std::size_t>(e)] = wc;
    tau_ += ed.w / wc;
  }
}

int SpanningTree::lca(int a, int b) const {
  if (depth(a) < depth(b)) std::swap(a, b);
  int diff = depth(a) - depth(b);
  for (int l = 0; diff; ++l, diff >>= 1) {
    if (diff & 1) a = up_[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)];
  }
  if (a == b) return a;
  for (int l = levels_ - 1; l >= 0; --l) {
    const auto& row = up_[static_cast<std::size_t>(l)];
    if (row[static_cast<std::size_t>(a)] != row[static_cast<std::size_t>(b)]) {
      a = row[static_cast<std::size_t>(a)];
      b = row[static_cast<std::size_t>(b)];
    }
  }
  return parent(a);
}

double SpanningTree::path_resistance(int a, int b) const {
  return resistance_prefix(a) + resistance_prefix(b) - 2.0 * resistance_prefix(lca(a, b));
}

void SpanningTree::require_non_tree(int edge) const {
  if (edge < 0 || edge >= graph_->num_edges()) throw std::invalid_argument("edge index out of range");
  if (in_tree(edge)) {
    throw std::invalid_argument("edge " + std::to_string(edge) + " is a tree edge");
  }
}

std::vector<OrientedEdge> SpanningTree::tree_path(int edge) const {
  std::vector<OrientedEdge> cycle;
  tree_cycle(edge, cycle);
  // The cycle is [edge v->u, path u->v]; reversing the path gives v->u.
  std::vector<OrientedEdge> path;
  path.reserve(cycle.size() - 1);
  for (auto it = cycle.rbegin(); it != cycle.rend() - 1; ++it) path.push_back({it->edge, -it->sign});
  return path;
}

void SpanningTree::tree_cycle(int edge, std::vector<OrientedEdge>& out) const {
  require_non_tree(edge);
  out.clear();
  const auto& ed = graph_->edge(edge);
  out.push_back({edge, -1});
  const int top = lca(ed.u, ed.v);
  // Up from u to the LCA: each step walks child -> parent.
  for (int node = ed.u; node != top; node = parent(node)) {
    const int pe = parent_edge(node);
    out.push_back({pe, graph_->edge(pe).u == node ? +1 : -1});
  }
  // Down from the LCA to v: collect v's chain, then walk it parent -> child.
  const std::size_t mark = out.size();
  for (int node = ed.v; node != top; node = parent(node)) {
    const int pe = parent_edge(node);
    out.push_back({pe, graph_->edge(pe).v == node ? +1 : -1});
  }
  std::reverse(out.begin() + static_cast<std::ptrdiff_t>(mark), out.end());
}

std::vector<OrientedEdge> SpanningTree::tree_cycle(int edge) const {
  std::vector<OrientedEdge> out;
  tree_cycle(edge, out);
  return out;
}

double SpanningTree::cycle_resistance(int edge) const {
  require_non_tree(edge);
  const auto& ed = graph_->edge(edge);
  return 1.0 / (1.0 / ed.w + path_resistance(ed.u, ed.v));
}

int max_degree_root(const Graph& graph) {
  int best = 0;
  for (int v = 1; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) > graph.degree(best)) best = v;
  }
  return best;
}

namespace {

std::vector<int> shortest_path_tree_edges(const Graph& graph, int root) {
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> via(n, -1);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[static_cast<std::size_t>(root)] = 0.0;
  queue.push({0.0, root});
  while (!queue.empty()) {
    const auto [d, node] = queue.top();
    queue.pop();
    if (done[static_cast<std::size_t>(node)]) continue;
    done[static_cast<std::size_t>(node)] = 1;
    for (const auto& inc : graph.incident(node)) {
      const auto nb = static_cast<std::size_t>(inc.neighbor);
      const double nd = d + 1.0 / graph.edge(inc.edge).w;
      if (nd < dist[nb]) {
        dist[nb] = nd;
        via[nb] = inc.edge;
        queue.push({nd, inc.neighbor});
      }
    }
  }
  std::vector<int> edges;
  edges.reserve(n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<int>(v) != root) edges.push_back(via[v]);
  }
  return edges;
}

std::vector<int> min_spanning_tree_edges(const Graph& graph) {
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  std::vector<int> order(static_cast<std::size_t>(graph.num_edges()));
  std::iota(order.begin(), order.end(), 0);
  // Cost 1/w ascending is weight descending; stable keeps index order on ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return graph.edge(a).w > graph.edge(b).w; });
  std::vector<int> link(n);
  std::iota(link.begin(), link.end(), 0);
  auto find = [&](int x) {
    while (link[static_cast<std::size_t>(x)] != x) {
      link[static_cast<std::size_t>(x)] = link[static_cast<std::size_t>(link[static_cast<std::size_t>(x)])];
      x = link[static_cast<std::size_t>(x)];
    }
    return x;
  };
  std::vector<int> edges;
  edges.reserve(n - 1);
  for (int e : order) {
    const int a = find(graph.edge(e).u);
    const int b = find(graph.edge(e).v);
    if (a == b) continue;
    link[static_cast<std::size_t>(a)] = b;
    edges.push_back(e);
    if (edges.size() + 1 == n) break;
  }
  return edges;
}

}  // namespace

SpanningTree build_tree(const Graph& graph, TreeStrategy strategy) {
  if (!graph.is_connected()) throw ValidationError("graph is not connected");
  const int root = max_degree_root(graph);
  const auto edges = strategy == TreeStrategy::ShortestPathResistance
                         ? shortest_path_tree_edges(graph, root)
                         : min_spanning_tree_edges(graph);
  return SpanningTree(graph, edges, root);
}

double cycle_flow(const SpanningTree& tree, const FlowState& g, int edge) {
  double sum = 0.0;
  for (const auto& oe : tree.tree_cycle(edge)) sum += oe.sign * g[static_cast<std::size_t>(oe.edge)];
  return sum;
}

NodeVector tree_potentials(const SpanningTree& tree, const FlowState& g) {
  const Graph& graph = tree.graph();
  NodeVector x(static_cast<std::size_t>(graph.num_nodes()), 0.0);
  for (int node : tree.order()) {
    if (node == tree.root()) continue;
    const int pe = tree.parent_edge(node);
    const double ge = g[static_cast<std::size_t>(pe)];
    const double xp = x[static_cast<std::size_t>(tree.parent(node))];
    // g_uv = x_u - x_v on tree edges.
    x[static_cast<std::size_t>(node)] = graph.edge(pe).u == node ? xp + ge : xp - ge;
  }
  return x;
}

}  // namespace nlsolve
