#include "nlsolve/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "nlsolve/energy.hpp"
#include "nlsolve/errors.hpp"

namespace nlsolve {

namespace {

constexpr double kSkipCycleFlow = 1e-14;
constexpr double kFeasibilityTol = 1e-9;

bool env_check_feasibility() {
  const char* v = std::getenv("NLSOLVE_CHECK_FEASIBILITY");
  return v && *v && std::string(v) != "0";
}

}  // namespace

FlowState init_tree_flow(const Graph& graph, const SpanningTree& tree, std::span<const double> b) {
  if (b.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw std::invalid_argument("b size does not match node count");
  }
  require_balanced(b);
  FlowState g(static_cast<std::size_t>(graph.num_edges()));
  std::vector<double> remaining(b.begin(), b.end());
  const auto& order = tree.order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int node = *it;
    if (node == tree.root()) continue;
    const int pe = tree.parent_edge(node);
    const auto& ed = graph.edge(pe);
    const double need = remaining[static_cast<std::size_t>(node)];
    const double out = ed.nl->h_inv(need / ed.w);  // flow from node toward its parent
    g[static_cast<std::size_t>(pe)] = ed.u == node ? out : -out;
    remaining[static_cast<std::size_t>(tree.parent(node))] += need;
  }
  return g;
}

CycleUpdater::CycleUpdater(const SpanningTree& tree) : tree_(&tree) {}

double CycleUpdater::evaluate(double t, double* slope) {
  const Graph& graph = tree_->graph();
  double r = 0.0;
  double dr = 0.0;
  for (std::size_t j = 0; j < cycle_.size(); ++j) {
    const auto& nl = *graph.edge(cycle_[j].edge).nl;
    const double v = nl.h_inv(base_response_[j] + t * inv_weight_[j]);
    trial_[j] = v;
    r += v;
    if (slope) dr += inv_weight_[j] / nl.h_prime(v);
  }
  if (slope) *slope = dr;
  return r;
}

CycleUpdateResult CycleUpdater::apply(FlowState& g, int edge, double k,
                                      const CycleUpdateOptions& options) {
  const Graph& graph = tree_->graph();
  tree_->tree_cycle(edge, cycle_);
  const std::size_t len = cycle_.size();
  base_response_.resize(len);
  inv_weight_.resize(len);
  trial_.resize(len);

  CycleUpdateResult result;
  result.cycle_resistance = tree_->cycle_resistances()[static_cast<std::size_t>(edge)];
  double gc = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const auto& ed = graph.edge(cycle_[j].edge);
    const double oriented = cycle_[j].sign * g[static_cast<std::size_t>(cycle_[j].edge)];
    gc += oriented;
    base_response_[j] = ed.nl->h(oriented);
    inv_weight_[j] = 1.0 / ed.w;
  }
  result.cycle_flow = gc;
  result.residual = gc;
  if (std::abs(gc) <= kSkipCycleFlow) {
    result.skipped = true;
    return result;
  }

  const double tol = options.residual_tol.value_or(std::abs(gc) / (2.0 * k * k));
  const double far = -k * result.cycle_resistance * gc;
  double lo = std::min(0.0, far);
  double hi = std::max(0.0, far);
  double r_lo = gc < 0.0 ? gc : evaluate(lo, nullptr);
  double r_hi = gc > 0.0 ? gc : evaluate(hi, nullptr);
  if (r_lo > tol || r_hi < -tol) {
    throw InvariantViolation("cycle update bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] has no sign change on edge " +
                             std::to_string(edge));
  }

  // Exact for linear responses; inside the bracket since 1/k <= 1 <= k.
  double t = -result.cycle_resistance * gc;
  double slope = 0.0;
  double r = evaluate(t, &slope);
  int iter = 1;
  double prev_abs = std::abs(gc);
  while (std::abs(r) > tol) {
    if (r < 0.0) {
      lo = t;
      r_lo = r;
    } else {
      hi = t;
      r_hi = r;
    }
    if (iter >= options.max_iterations || !(hi > lo) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
    double next = t - r / slope;
    // Bisect when Newton leaves the bracket or stalls.
    if (!(next > lo && next < hi) || std::abs(r) > 0.5 * prev_abs) next = 0.5 * (lo + hi);
    prev_abs = std::abs(r);
    t = next;
    r = evaluate(t, &slope);
    ++iter;
  }
  if (std::abs(r) > tol) {
    // Bracket exhausted; keep the endpoint with the smaller residual.
    if (std::abs(r_lo) < std::abs(r)) {
      t = lo;
      r = evaluate(t, nullptr);
    }
    if (std::abs(r_hi) < std::abs(r)) {
      t = hi;
      r = evaluate(t, nullptr);
    }
  }

  double drop = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const auto e = static_cast<std::size_t>(cycle_[j].edge);
    const auto& ed = graph.edge(cycle_[j].edge);
    const double before = cycle_[j].sign * g[e];
    drop += ed.w * ed.nl->phi_difference(before, trial_[j]);
    g[e] = cycle_[j].sign * trial_[j];
  }
  result.t = t;
  result.residual = r;
  result.energy_drop = drop;
  result.iterations = iter;
  return result;
}

CycleUpdateOutcome cycle_update(const Graph& graph, const SpanningTree& tree, const FlowState& g,
                                int edge, double k, const CycleUpdateOptions& options) {
  if (&tree.graph() != &graph) throw std::invalid_argument("tree belongs to a different graph");
  CycleUpdateOutcome out{g, {}};
  CycleUpdater updater(tree);
  out.result = updater.apply(out.g, edge, k, options);
  return out;
}

EdgeSampler::EdgeSampler(const SpanningTree& tree) : edges_(tree.non_tree_edges()) {
  const Graph& graph = tree.graph();
  probabilities_.reserve(edges_.size());
  cumulative_.reserve(edges_.size());
  double total = 0.0;
  for (int e : edges_) {
    const double p = graph.edge(e).w / (tree.cycle_resistances()[static_cast<std::size_t>(e)] * tree.tau());
    probabilities_.push_back(p);
    total += p;
    cumulative_.push_back(total);
  }
}

int EdgeSampler::sample(Rng& rng) const {
  if (edges_.empty()) throw std::logic_error("no non-tree edges to sample");
  const double u = rng.uniform01() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min(static_cast<std::size_t>(it - cumulative_.begin()), edges_.size() - 1);
  return edges_[idx];
}

std::int64_t iteration_budget(double k, double tau, double st, double epsilon) {
  if (!(k > 0.0) || !(tau > 0.0) || !(st > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("iteration budget needs positive k, tau, st, epsilon");
  }
  if (!(epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  const double k2 = k * k;
  const double arg = k2 * k2 * k2 * st * tau / (epsilon * epsilon);
  const double s = std::ceil(2.0 * k2 * tau * std::log(arg));
  if (!(s < 0x1.0p63)) throw std::overflow_error("iteration budget exceeds 2^63");
  return s > 0.0 ? static_cast<std::int64_t>(s) : 0;
}

void require_admissible(const Graph& graph, double k) {
  if (!(k >= 1.0)) throw ValidationError("k must be >= 1");
  const auto grid = default_admissibility_grid();
  std::unordered_set<const Nonlinearity*> checked;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const Nonlinearity* nl = graph.edge(e).nl.get();
    if (!checked.insert(nl).second) continue;
    const auto report = validate_admissibility(*nl, k, grid);
    if (!report.ok()) {
      throw ValidationError("edge " + std::to_string(e) + " (" + nl->to_spec() +
                            ") not admissible at k=" + std::to_string(k) + ": " + report.summary());
    }
  }
}

SolveReport solve(const Graph& graph, std::span<const double> b, const SolverConfig& config,
                  const IterationObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1)");
  }
  const auto instance = validate_instance(graph, b);
  if (!instance.ok()) throw ValidationError(instance.summary());
  const double k = config.k.value_or(graph.max_k_bound());
  require_admissible(graph, k);

  const SpanningTree tree = build_tree(graph, config.tree_strategy);
  SolveReport report;
  report.tau = tree.tau();
  report.st = tree.st();
  report.seed = config.seed;
  report.k = k;
  report.epsilon = config.epsilon;
  report.root = tree.root();
  report.tree_strategy = config.tree_strategy;

  FlowState g = init_tree_flow(graph, tree, b);
  const EdgeSampler sampler(tree);
  report.s_budget = sampler.empty() ? 0 : iteration_budget(k, tree.tau(), tree.st(), config.epsilon);
  const std::int64_t steps =
      sampler.empty() ? 0 : config.max_iterations_override.value_or(report.s_budget);
  const std::int64_t trace_every =
      std::max<std::int64_t>(1, config.trace_every.value_or((steps + 99) / 100));
  const std::int64_t check_every =
      (config.check_every_iteration || env_check_feasibility()) ? 1
                                                                 : std::max<std::int64_t>(1, (steps + 99) / 100);
  const double feas_tol = kFeasibilityTol * (1.0 + max_abs(b));

  double phi = energy(graph, g);
  auto record = [&](std::int64_t iteration) {
    report.energy_trace.push_back({iteration, phi});
    report.tgap_trace.push_back({iteration, tree_gap_unchecked(graph, tree, g)});
  };
  auto check_feasible = [&](std::int64_t iteration) {
    const double err = max_abs(b_residual(graph, g, b));
    if (!(err <= feas_tol)) {
      throw InvariantViolation("b-feasibility lost at iteration " + std::to_string(iteration) +
                               " (residual " + std::to_string(err) + ")");
    }
  };

  check_feasible(0);
  record(0);
  Rng rng(config.seed);
  CycleUpdater updater(tree);
  std::int64_t it = 0;
  while (it < steps) {
    const int edge = sampler.sample(rng);
    const auto update = updater.apply(g, edge, k);
    ++it;
    phi -= update.energy_drop;
    if (observer) observer(IterationEvent{it, edge, update, g});
    if (it % check_every == 0) check_feasible(it);
    if (it % trace_every == 0 || it == steps) {
      record(it);
      if (config.gap_early_exit && report.tgap_trace.back().value <= *config.gap_early_exit * phi) {
        report.stopped_early = it < steps;
        break;
      }
    }
  }
  if (steps > 0 && it % check_every != 0) check_feasible(it);

  report.iterations = it;
  report.x_final = tree_potentials(tree, g);
  report.final_energy = energy(graph, g);
  report.final_tgap = tree_gap_unchecked(graph, tree, g);
  report.g_final = std::move(g);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace nlsolve
