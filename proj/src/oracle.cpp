#include "nlsolve/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "nlsolve/energy.hpp"
#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

constexpr int kMaxNodes = 2000;
constexpr int kMaxNewtonSteps = 200;
constexpr int kMaxHalvings = 60;

}  // namespace

OracleSolution reference_solve(const Graph& graph, std::span<const double> b, double tol) {
  const int n = graph.num_nodes();
  if (n > kMaxNodes) {
    throw ValidationError("reference solver is limited to " + std::to_string(kMaxNodes) + " nodes");
  }
  const auto report = validate_instance(graph, b);
  if (!report.ok()) throw ValidationError(report.summary());

  const int free = n - 1;  // node n-1 is pinned
  const double target = tol * (1.0 + max_abs(b));
  NodeVector x(static_cast<std::size_t>(n), 0.0);

  auto residual = [&](const NodeVector& at) {
    auto f = apply_laplacian(graph, at);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= b[i];
    return f;
  };
  auto residual_norm = [](const NodeVector& f) { return max_abs(f); };

  NodeVector f = residual(x);
  double norm = residual_norm(f);
  int steps = 0;
  Eigen::MatrixXd jac(free, free);
  Eigen::VectorXd rhs(free);
  while (norm > target) {
    if (steps == kMaxNewtonSteps) {
      throw InvariantViolation("reference solver did not converge in " +
                               std::to_string(kMaxNewtonSteps) + " Newton steps (residual " +
                               std::to_string(norm) + ")");
    }
    ++steps;
    jac.setZero();
    for (const auto& e : graph.edges()) {
      const double d = x[static_cast<std::size_t>(e.u)] - x[static_cast<std::size_t>(e.v)];
      const double c = e.w * e.nl->h_prime(d);
      if (e.u < free) jac(e.u, e.u) += c;
      if (e.v < free) jac(e.v, e.v) += c;
      if (e.u < free && e.v < free) {
        jac(e.u, e.v) -= c;
        jac(e.v, e.u) -= c;
      }
    }
    for (int i = 0; i < free; ++i) rhs(i) = -f[static_cast<std::size_t>(i)];
    const Eigen::VectorXd dx = jac.partialPivLu().solve(rhs);

    double scale = 1.0;
    NodeVector trial(x.size());
    NodeVector trial_f;
    double trial_norm = 0.0;
    for (int halving = 0;; ++halving) {
      for (int i = 0; i < free; ++i) {
        trial[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + scale * dx(i);
      }
      trial[static_cast<std::size_t>(free)] = 0.0;
      trial_f = residual(trial);
      trial_norm = residual_norm(trial_f);
      if (trial_norm < norm || halving == kMaxHalvings) break;
      scale *= 0.5;
    }
    if (!(trial_norm < norm)) {
      throw InvariantViolation("reference solver line search failed (residual " +
                               std::to_string(norm) + ")");
    }
    x = std::move(trial);
    f = std::move(trial_f);
    norm = trial_norm;
  }

  OracleSolution out;
  out.g_star = FlowState(static_cast<std::size_t>(graph.num_edges()));
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    out.g_star[static_cast<std::size_t>(e)] =
        x[static_cast<std::size_t>(ed.u)] - x[static_cast<std::size_t>(ed.v)];
  }
  out.phi_star = energy(graph, out.g_star);
  out.kkt_residual = max_abs(f);
  out.x_star = std::move(x);
  out.newton_steps = steps;
  return out;
}

bool fundamental_cycle_certificate(const SpanningTree& tree, const FlowState& g, double tol) {
  for (int e : tree.non_tree_edges()) {
    if (!(std::abs(cycle_flow(tree, g, e)) <= tol)) return false;
  }
  return true;
}

}  // namespace nlsolve
