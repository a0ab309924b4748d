#include "nlsolve/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

constexpr double kBalanceTol = 1e-9;

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) +
                                " entries, got " + std::to_string(got));
  }
}

// Neumaier-compensated sum; b may hold values of widely different magnitude.
double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

Graph::Graph(int n, std::vector<EdgeSpec> specs) : n_(n) {
  if (n <= 0) throw std::invalid_argument("graph needs at least one node");
  edges_.reserve(specs.size());
  std::unordered_set<long long> seen;
  for (auto& s : specs) {
    if (s.a < 0 || s.a >= n || s.b < 0 || s.b >= n) {
      throw std::invalid_argument("edge endpoint out of range: " + std::to_string(s.a) + " " +
                                  std::to_string(s.b));
    }
    if (s.a == s.b) throw std::invalid_argument("self loop at node " + std::to_string(s.a));
    if (!(s.w > 0.0) || !std::isfinite(s.w)) {
      throw std::invalid_argument("edge weight must be positive and finite");
    }
    if (!s.nl) throw std::invalid_argument("edge has no nonlinearity");
    const int u = std::min(s.a, s.b);
    const int v = std::max(s.a, s.b);
    if (!seen.insert(static_cast<long long>(u) * n + v).second) {
      throw std::invalid_argument("parallel edge " + std::to_string(u) + " " + std::to_string(v));
    }
    edges_.push_back({u, v, s.w, std::move(s.nl)});
  }

  std::vector<std::size_t> count(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : edges_) {
    ++count[static_cast<std::size_t>(e.u) + 1];
    ++count[static_cast<std::size_t>(e.v) + 1];
  }
  for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
  offsets_ = count;
  incidence_.resize(2 * edges_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (int e = 0; e < num_edges(); ++e) {
    const auto& ed = edges_[static_cast<std::size_t>(e)];
    incidence_[fill[static_cast<std::size_t>(ed.u)]++] = {ed.v, e, +1};
    incidence_[fill[static_cast<std::size_t>(ed.v)]++] = {ed.u, e, -1};
  }
}

bool Graph::is_connected() const {
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    for (const auto& inc : incident(node)) {
      if (!seen[static_cast<std::size_t>(inc.neighbor)]) {
        seen[static_cast<std::size_t>(inc.neighbor)] = 1;
        ++reached;
        stack.push_back(inc.neighbor);
      }
    }
  }
  return reached == n_;
}

double Graph::max_k_bound() const {
  double k = 1.0;
  for (const auto& e : edges_) k = std::max(k, e.nl->k_bound());
  return k;
}

NodeVector apply_laplacian(const Graph& graph, std::span<const double> x) {
  check_size(x.size(), static_cast<std::size_t>(graph.num_nodes()), "apply_laplacian");
  NodeVector out(x.size(), 0.0);
  for (const auto& e : graph.edges()) {
    const double flow = e.w * e.nl->h(x[static_cast<std::size_t>(e.u)] - x[static_cast<std::size_t>(e.v)]);
    out[static_cast<std::size_t>(e.u)] += flow;
    out[static_cast<std::size_t>(e.v)] -= flow;
  }
  return out;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_balanced(std::span<const double> b) {
  const double total = compensated_sum(b);
  if (std::abs(total) > kBalanceTol * max_abs(b)) {
    throw ValidationError("b does not sum to zero (sum = " + std::to_string(total) + ")");
  }
}

NodeVector b_residual(const Graph& graph, const FlowState& g, std::span<const double> b) {
  check_size(b.size(), static_cast<std::size_t>(graph.num_nodes()), "b_residual");
  check_size(g.size(), static_cast<std::size_t>(graph.num_edges()), "b_residual flow");
  require_balanced(b);
  NodeVector r(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = -b[i];
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    const double flow = ed.w * ed.nl->h(g[static_cast<std::size_t>(e)]);
    r[static_cast<std::size_t>(ed.u)] += flow;
    r[static_cast<std::size_t>(ed.v)] -= flow;
  }
  return r;
}

std::vector<double> p_residual(const Graph& graph, const FlowState& g, std::span<const double> x) {
  check_size(x.size(), static_cast<std::size_t>(graph.num_nodes()), "p_residual");
  check_size(g.size(), static_cast<std::size_t>(graph.num_edges()), "p_residual flow");
  std::vector<double> r(g.size());
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    r[static_cast<std::size_t>(e)] =
        g[static_cast<std::size_t>(e)] - (x[static_cast<std::size_t>(ed.u)] - x[static_cast<std::size_t>(ed.v)]);
  }
  return r;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::string out;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (i) out += "; ";
    out += failures[i];
  }
  return out;
}

ValidationReport validate_instance(const Graph& graph, std::span<const double> b) {
  ValidationReport report;
  if (!graph.is_connected()) report.failures.push_back("graph is not connected");
  for (const auto& e : graph.edges()) {
    if (!(e.w > 0.0)) {
      report.failures.push_back("non-positive edge weight");
      break;
    }
  }
  if (b.size() != static_cast<std::size_t>(graph.num_nodes())) {
    report.failures.push_back("b has " + std::to_string(b.size()) + " entries, graph has " +
                              std::to_string(graph.num_nodes()) + " nodes");
  } else {
    try {
      require_balanced(b);
    } catch (const ValidationError& e) {
      report.failures.push_back(e.what());
    }
  }
  return report;
}

}  // namespace nlsolve
