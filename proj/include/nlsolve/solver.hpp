#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nlsolve/graph.hpp"
#include "nlsolve/rng.hpp"
#include "nlsolve/spantree.hpp"

namespace nlsolve {

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

/// b-feasible flow supported on tree edges, by leaf elimination in reverse BFS order:
/// at a leaf i with tree edge e to its parent, w_e h_e(g out of i) = remaining b_i.
/// Throws ValidationError when b is unbalanced.
FlowState init_tree_flow(const Graph& graph, const SpanningTree& tree, std::span<const double> b);

// ---------------------------------------------------------------------------
// Cycle updates
// ---------------------------------------------------------------------------

struct CycleUpdateOptions {
  /// Absolute stopping tolerance on the cycle residual; defaults to |G_C| / (2k^2).
  std::optional<double> residual_tol;
  int max_iterations = 200;
};

struct CycleUpdateResult {
  double cycle_flow = 0.0;        // G_C before the update
  double cycle_resistance = 0.0;  // W_C
  double t = 0.0;                 // accepted shift of the weighted response
  double residual = 0.0;          // G_C + sum alpha(t) after the update
  double energy_drop = 0.0;       // Phi before minus Phi after, summed over cycle edges
  int iterations = 0;
  bool skipped = false;           // |G_C| <= 1e-14
};

/// Applies cycle updates along tree cycles. Holds scratch buffers, so one instance
/// per thread.
///
/// For cycle edges j with traversal sign s_j, the update sets the oriented flow to
/// h^-1(h(s_j g_j) + t / w_j), which keeps every node balance unchanged. t is the root
/// of r(t) = sum_j h^-1(h(s_j g_j) + t / w_j), increasing with slope in
/// [1/(k W_C), k/W_C], so the root lies between 0 and -k W_C G_C. The root is found by
/// bracketed Newton with bisection fallback until |r(t)| <= tolerance.
class CycleUpdater {
 public:
  explicit CycleUpdater(const SpanningTree& tree);

  /// Throws std::invalid_argument for tree edges, InvariantViolation when the bracket
  /// does not contain a sign change.
  CycleUpdateResult apply(FlowState& g, int edge, double k, const CycleUpdateOptions& options = {});

 private:
  double evaluate(double t, double* slope);

  const SpanningTree* tree_;
  std::vector<OrientedEdge> cycle_;
  std::vector<double> base_response_;  // h(s_j g_j)
  std::vector<double> inv_weight_;
  std::vector<double> trial_;          // oriented flows at the last evaluated t
};

/// Convenience wrapper returning the updated flow.
struct CycleUpdateOutcome {
  FlowState g;
  CycleUpdateResult result;
};
CycleUpdateOutcome cycle_update(const Graph& graph, const SpanningTree& tree, const FlowState& g,
                                int edge, double k, const CycleUpdateOptions& options = {});

// ---------------------------------------------------------------------------
// Sampling and budget
// ---------------------------------------------------------------------------

/// p_e = w_e / (W_C tau) over non-tree edges, sampled by binary search in the
/// cumulative table.
class EdgeSampler {
 public:
  explicit EdgeSampler(const SpanningTree& tree);

  bool empty() const noexcept { return edges_.empty(); }
  const std::vector<int>& edges() const noexcept { return edges_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  int sample(Rng& rng) const;

 private:
  std::vector<int> edges_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

/// ceil(2 k^2 tau ln(k^6 st tau / eps^2)), clamped at 0 when the log is negative.
/// Throws std::invalid_argument for non-positive inputs or eps >= 1, std::overflow_error
/// when the result exceeds 2^63.
std::int64_t iteration_budget(double k, double tau, double st, double epsilon);

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

struct SolverConfig {
  double epsilon = 0.1;
  /// Global nonlinearity bound; unset means the largest k_bound over the edges.
  std::optional<double> k;
  std::uint64_t seed = 1;
  TreeStrategy tree_strategy = TreeStrategy::ShortestPathResistance;
  std::optional<std::int64_t> max_iterations_override;
  /// Stop once TGAP / Phi falls to this value (checked at trace points).
  std::optional<double> gap_early_exit;
  /// Trace interval in iterations; unset means ceil(S / 100).
  std::optional<std::int64_t> trace_every;
  /// Verify b-feasibility after every update instead of every ceil(S / 100). Also
  /// enabled by the environment variable NLSOLVE_CHECK_FEASIBILITY=1.
  bool check_every_iteration = false;
};

struct TracePoint {
  std::int64_t iteration;
  double value;
};

struct SolveReport {
  FlowState g_final;
  NodeVector x_final;  // tree potentials, x(root) = 0
  std::int64_t iterations = 0;
  std::vector<TracePoint> energy_trace;
  std::vector<TracePoint> tgap_trace;
  double tau = 0.0;
  double st = 0.0;
  std::int64_t s_budget = 0;
  std::uint64_t seed = 0;
  double k = 1.0;
  double epsilon = 0.0;
  int root = 0;
  TreeStrategy tree_strategy = TreeStrategy::ShortestPathResistance;
  double final_energy = 0.0;
  double final_tgap = 0.0;
  bool stopped_early = false;
  double wall_time_s = 0.0;
};

struct IterationEvent {
  std::int64_t iteration;  // 1-based
  int edge;
  const CycleUpdateResult& update;
  const FlowState& g;  // after the update
};

using IterationObserver = std::function<void(const IterationEvent&)>;

/// Randomized cycle-update solver: build tree, initialize on the tree, then S sampled
/// tree-cycle updates. Throws ValidationError for invalid instances or edges that are
/// not admissible at the configured k, InvariantViolation if feasibility is lost.
SolveReport solve(const Graph& graph, std::span<const double> b, const SolverConfig& config,
                  const IterationObserver& observer = {});

/// Throws ValidationError unless every distinct nonlinearity passes
/// validate_admissibility at k on the default grid.
void require_admissible(const Graph& graph, double k);

}  // namespace nlsolve
