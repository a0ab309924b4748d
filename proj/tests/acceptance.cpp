// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "nlsolve/cli.hpp"
#include "nlsolve/energy.hpp"
#include "nlsolve/oracle.hpp"
#include "nlsolve/solver.hpp"
#include "support/test_support.hpp"

using namespace nlsolve;
using namespace nlsolve::testing;

namespace {

const std::string kData = NLSOLVE_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Instance {
  std::string family;
  double k;
  Graph graph;
  NodeVector b;
};

// n in [n_lo, n_hi], n - 1 <= m <= min(max_m_factor * n, n(n-1)/2).
Instance random_instance(const Family& fam, std::mt19937_64& rng, int n_lo, int n_hi, int max_m_factor) {
  std::uniform_int_distribution<int> pick_n(n_lo, n_hi);
  const int n = pick_n(rng);
  const int max_m = std::min(max_m_factor * n, n * (n - 1) / 2);
  std::uniform_int_distribution<int> pick_m(std::min(n, max_m), max_m);
  const int m = pick_m(rng);
  Graph g = random_connected_graph(n, m, fam.nl, rng);
  return {fam.name, fam.k, std::move(g), random_rhs(n, rng, 2.0)};
}

std::vector<Instance> criterion1_instances() {
  std::mt19937_64 rng(1001);
  const auto fams = builtin_families();
  std::vector<Instance> out;
  for (int i = 0; i < 50; ++i) out.push_back(random_instance(fams[static_cast<std::size_t>(i) % fams.size()], rng, 5, 40, 4));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1 and 2 share one pass over the instance set.
struct CycleSuiteResult {
  Outcome drop;
  Outcome exact;
};

CycleSuiteResult cycle_update_suites() {
  const auto start = std::chrono::steady_clock::now();
  const auto instances = criterion1_instances();
  long long checked = 0;
  long long drop_failures = 0;
  double worst_drop_slack = std::numeric_limits<double>::infinity();
  long long exact_checked = 0;
  long long exact_failures = 0;
  double worst_exact_ratio = 0.0;

  for (std::size_t idx = 0; idx < instances.size(); ++idx) {
    const auto& inst = instances[idx];
    const auto tree = build_tree(inst.graph, TreeStrategy::ShortestPathResistance);
    CycleUpdater tight_updater(tree);
    CycleUpdateOptions tight;
    tight.residual_tol = 1e-13;
    std::mt19937_64 probe_rng(idx);

    SolverConfig cfg;
    cfg.epsilon = 0.1;
    cfg.k = inst.k;
    cfg.seed = 500 + idx;
    double prev = energy(inst.graph, init_tree_flow(inst.graph, tree, inst.b));
    solve(inst.graph, inst.b, cfg, [&](const IterationEvent& ev) {
      const double now = energy(inst.graph, ev.g);
      const auto& u = ev.update;
      if (std::abs(u.cycle_flow) > 1e-10) {
        const double bound = u.cycle_resistance * u.cycle_flow * u.cycle_flow / (4.0 * inst.k);
        const double slack = (prev - now) - (bound - 1e-10);
        worst_drop_slack = std::min(worst_drop_slack, slack);
        ++checked;
        if (slack < 0.0) ++drop_failures;
      }
      prev = now;

      // Every 25th state: drive one random cycle to its exact optimum on a copy.
      if (ev.iteration % 25 == 1) {
        FlowState copy = ev.g;
        const auto& nt = tree.non_tree_edges();
        const int e = nt[probe_rng() % nt.size()];
        const auto r = tight_updater.apply(copy, e, inst.k, tight);
        const double after = std::abs(cycle_flow(tree, copy, e));
        const double limit = 1e-9 * (1.0 + std::abs(r.cycle_flow));
        worst_exact_ratio = std::max(worst_exact_ratio, after / limit);
        ++exact_checked;
        if (after > limit) ++exact_failures;
      }
    });
  }
  const double elapsed = seconds_since(start);
  CycleSuiteResult res;
  res.drop.pass = drop_failures == 0 && checked > 0 && elapsed < 60.0;
  res.drop.detail = fmt("%lld updates on %zu instances, %lld violations, min slack %.3g, %.1f s (limit 60 s)",
                        checked, instances.size(), drop_failures, worst_drop_slack, elapsed);
  res.exact.pass = exact_failures == 0 && exact_checked > 0;
  res.exact.detail = fmt("%lld tight updates, %lld violations, worst |cycle flow| / (1e-9 (1+|G_C|)) = %.3g",
                         exact_checked, exact_failures, worst_exact_ratio);
  return res;
}

// b-feasible state: tree initialization plus random response shifts along tree cycles.
FlowState perturbed_flow(const Graph& g, const SpanningTree& t, std::span<const double> b, std::mt19937_64& rng,
                         int shifts) {
  FlowState flow = init_tree_flow(g, t, b);
  if (t.non_tree_edges().empty()) return flow;
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int s = 0; s < shifts; ++s) {
    const int e = t.non_tree_edges()[rng() % t.non_tree_edges().size()];
    const double shift = dist(rng);
    for (const auto& oe : t.tree_cycle(e)) {
      const auto& ed = g.edge(oe.edge);
      auto& ge = flow[static_cast<std::size_t>(oe.edge)];
      ge = oe.sign * ed.nl->h_inv(ed.nl->h(oe.sign * ge) + shift / ed.w);
    }
  }
  return flow;
}

Outcome duality_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3003);
  const auto fams = builtin_families();
  int states = 0;
  int weak_fail = 0;
  int tgap_fail = 0;
  int bound_fail = 0;
  int opt_fail = 0;
  int instances = 0;
  double worst_opt = 0.0;
  while (states < 1000) {
    const auto& fam = fams[static_cast<std::size_t>(instances) % fams.size()];
    const auto inst = random_instance(fam, rng, 4, 30, 3);
    ++instances;
    const auto tree = build_tree(inst.graph, instances % 2 ? TreeStrategy::MinResistanceSpanning
                                                           : TreeStrategy::ShortestPathResistance);
    const auto oracle = reference_solve(inst.graph, inst.b, 1e-12);
    const double opt_tgap = tree_gap(inst.graph, tree, oracle.g_star, inst.b);
    worst_opt = std::max(worst_opt, opt_tgap / (1.0 + oracle.phi_star));
    if (opt_tgap > 1e-8 * (1.0 + oracle.phi_star)) ++opt_fail;

    for (int s = 0; s < 20 && states < 1000; ++s, ++states) {
      const auto flow = perturbed_flow(inst.graph, tree, inst.b, rng, s);
      const double phi = energy(inst.graph, flow);
      const double theta = dual_value(inst.graph, tree_potentials(tree, flow), flow, inst.b);
      if (theta > phi + 1e-9) ++weak_fail;
      const double gap = phi - oracle.phi_star;
      const double tgap = tree_gap(inst.graph, tree, flow, inst.b);
      if (gap > tgap + 1e-9) ++tgap_fail;
      double bound = 0.0;
      for (int e : tree.non_tree_edges()) {
        const double gc = cycle_flow(tree, flow, e);
        bound += inst.graph.edge(e).w * gc * gc * inst.k / 2.0;
      }
      if (gap > bound + 1e-8) ++bound_fail;
    }
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = weak_fail == 0 && tgap_fail == 0 && bound_fail == 0 && opt_fail == 0 && elapsed < 120.0;
  o.detail = fmt("%d states on %d instances; violations: weak %d, GAP<=TGAP %d, GAP bound %d, TGAP(g*) %d "
                 "(worst TGAP(g*)/(1+Phi*) %.2g); %.1f s (limit 120 s)",
                 states, instances, weak_fail, tgap_fail, bound_fail, opt_fail, worst_opt, elapsed);
  return o;
}

Outcome identity_suite() {
  std::mt19937_64 rng(4004);
  const Family fam{"identity", identity_nl(), 1.0};
  double worst = 0.0;
  int fails = 0;
  for (int i = 0; i < 20; ++i) {
    const auto inst = random_instance(fam, rng, 3, 50, 4);
    SolverConfig cfg;
    cfg.epsilon = 1e-6;
    cfg.seed = 40 + static_cast<std::uint64_t>(i);
    const auto rep = solve(inst.graph, inst.b, cfg);
    std::vector<double> w;
    for (const auto& e : inst.graph.edges()) w.push_back(e.w);
    const auto x_star = dense_linear_solve(inst.graph, w, inst.b);
    const double acc = accuracy(inst.graph, LinearizedWeights{w}, mean_shifted(rep.x_final), mean_shifted(x_star));
    worst = std::max(worst, acc);
    if (acc > 1e-6) ++fails;
  }

  const Graph tri = triangle();
  const NodeVector b{1.0, -1.0, 0.0};
  SolverConfig cfg;
  cfg.epsilon = 1e-6;
  const auto rep = solve(tri, b, cfg);
  const auto x = mean_shifted(rep.x_final);
  const auto expect = mean_shifted(NodeVector{1.0 / 3, -1.0 / 3, 0.0});
  double tri_err = std::abs(rep.final_energy - 1.0 / 3);
  for (std::size_t i = 0; i < 3; ++i) tri_err = std::max(tri_err, std::abs(x[i] - expect[i]));

  Outcome o;
  o.pass = fails == 0 && tri_err <= 1e-12;
  o.detail = fmt("20 graphs, worst accuracy ratio %.3g (limit 1e-6); triangle max error %.2g (limit 1e-12)", worst,
                 tri_err);
  return o;
}

Outcome convergence_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5005);
  const std::vector<Family> fams{{"arctan", arctan_nl(), 2.0}, {"two_slope", two_slope_nl(2.0), 2.0}};
  int groups = 0;
  int group_fails = 0;
  int seed_pass = 0;
  int seed_total = 0;
  double worst_margin = 0.0;  // max over groups of mean excess / threshold
  for (const auto& fam : fams) {
    for (int gi = 0; gi < 10; ++gi) {
      const auto inst = random_instance(fam, rng, 5, 20, 3);
      const auto oracle = reference_solve(inst.graph, inst.b, 1e-13);
      double sum = 0.0;
      double threshold = 0.0;
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SolverConfig cfg;
        cfg.epsilon = 0.1;
        cfg.k = 2.0;
        cfg.seed = seed;
        const auto rep = solve(inst.graph, inst.b, cfg);
        threshold = cfg.epsilon * cfg.epsilon / (rep.tau * std::pow(rep.k, 4));
        const double excess = energy(inst.graph, rep.g_final) / oracle.phi_star - 1.0;
        sum += excess;
        ++seed_total;
        if (excess <= threshold) ++seed_pass;
      }
      ++groups;
      const double mean = sum / 20.0;
      worst_margin = std::max(worst_margin, mean / threshold);
      if (mean > threshold) ++group_fails;
    }
  }
  const double elapsed = seconds_since(start);
  const double rate = static_cast<double>(seed_pass) / seed_total;
  Outcome o;
  o.pass = group_fails == 0 && rate >= 0.5 && elapsed < 600.0;
  o.detail = fmt("%d graph/family groups x 20 seeds; groups over threshold %d, worst mean/threshold %.3g, "
                 "per-seed pass rate %.3f (limit 0.5); %.1f s (limit 600 s)",
                 groups, group_fails, worst_margin, rate, elapsed);
  return o;
}

Outcome structural_suite() {
  std::mt19937_64 rng(6006);
  const auto fams = builtin_families();
  int tau_fail = 0;
  int init_fail = 0;
  double worst_tau = 0.0;
  double worst_init = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(fams[static_cast<std::size_t>(i) % fams.size()], rng, 3, 60, 4);
    const auto oracle = reference_solve(inst.graph, inst.b, 1e-12);
    const double m = inst.graph.num_edges();
    const double n = inst.graph.num_nodes();
    for (auto strategy : {TreeStrategy::ShortestPathResistance, TreeStrategy::MinResistanceSpanning}) {
      const auto tree = build_tree(inst.graph, strategy);
      const double identity = tree.st() + m - 2 * n + 2;
      const double rel = std::abs(tree.tau() - identity) / std::max(1.0, std::abs(identity));
      worst_tau = std::max(worst_tau, rel);
      if (rel > 1e-9) ++tau_fail;
      const double phi0 = energy(inst.graph, init_tree_flow(inst.graph, tree, inst.b));
      const double bound = inst.k * inst.k * tree.st() * oracle.phi_star;
      worst_init = std::max(worst_init, phi0 / bound);
      if (phi0 > bound * (1 + 1e-12)) ++init_fail;
    }
  }
  Outcome o;
  o.pass = tau_fail == 0 && init_fail == 0;
  o.detail = fmt("100 graphs x 2 strategies; tau identity failures %d (worst rel %.2g), init bound failures %d "
                 "(worst Phi(g0)/(k^2 st Phi*) %.3g)",
                 tau_fail, worst_tau, init_fail, worst_init);
  return o;
}

Outcome reduction_suite() {
  std::mt19937_64 rng(7007);
  std::string details;
  bool pass = true;
  for (const auto& fam : std::vector<Family>{{"arctan", arctan_nl(), 2.0}, {"two_slope", two_slope_nl(2.0), 2.0}}) {
    const Graph g = random_connected_graph(30, 90, fam.nl, rng);
    const auto b = random_rhs(30, rng, 2.0);
    const auto oracle = reference_solve(g, b, 1e-13);
    SolverConfig cfg;
    cfg.k = fam.k;
    cfg.seed = 17;
    cfg.max_iterations_override = 40;
    const auto mid = solve(g, b, cfg);
    const auto tree = build_tree(g, cfg.tree_strategy);
    const double gap = energy(g, mid.g_final) - oracle.phi_star;
    const EdgeSampler sampler(tree);
    CycleUpdater updater(tree);
    Rng sample_rng(2024);
    const int samples = 500;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
      FlowState copy = mid.g_final;
      updater.apply(copy, sampler.sample(sample_rng), fam.k);
      const double rel = (gap - (energy(g, copy) - oracle.phi_star)) / gap;
      sum += rel;
      sum_sq += rel * rel;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, sum_sq / samples - mean * mean) * samples / (samples - 1);
    const double se = std::sqrt(var / samples);
    const double target = 1.0 / (2 * fam.k * fam.k * tree.tau());
    const bool ok = gap > 0.0 && mean >= target - 3 * se;
    pass = pass && ok;
    details += fmt("%s%s: gap %.3g, mean %.4g vs 1/(2k^2 tau) %.4g, SE %.2g", details.empty() ? "" : "; ",
                   fam.name.c_str(), gap, mean, target, se);
  }
  return {pass, "30 nodes, 500 samples each; " + details};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism_suite() {
  int mismatches = 0;
  int golden_fail = 0;
  for (const std::string name : {"triangle", "four_cycle"}) {
    const std::vector<std::string> args{"nlsolve", "solve", kData + "/" + name + ".txt", kData + "/" + name + "_b.txt",
                                        "--seed", "7", "--omit-timing"};
    std::ostringstream a, b, err;
    const int ca = cli::run(args, a, err);
    const int cb = cli::run(args, b, err);
    if (ca != 0 || cb != 0 || a.str() != b.str()) ++mismatches;
    if (a.str() != slurp(kData + "/" + name + "_seed7.json")) ++golden_fail;
  }

  // Library-level reruns on a larger instance.
  std::mt19937_64 rng(8008);
  const Graph g = random_connected_graph(60, 200, arctan_nl(), rng);
  const auto bvec = random_rhs(60, rng, 2.0);
  SolverConfig cfg;
  cfg.seed = 99;
  std::ostringstream r1, r2;
  cli::write_solve_json(r1, solve(g, bvec, cfg), false);
  cli::write_solve_json(r2, solve(g, bvec, cfg), false);
  if (r1.str() != r2.str()) ++mismatches;

  Outcome o;
  o.pass = mismatches == 0 && golden_fail == 0;
  o.detail = fmt("rerun mismatches %d, golden mismatches %d (triangle, four_cycle)", mismatches, golden_fail);
  return o;
}

Outcome scale_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(9009);
  const Graph g = random_connected_graph(1000, 3000, arctan_nl(), rng);
  const auto b = random_rhs(1000, rng, 2.0);
  SolverConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.k = 2.0;
  cfg.seed = 1;
  const auto rep = solve(g, b, cfg);
  const double elapsed = seconds_since(start);
  int increases = 0;
  for (std::size_t i = 1; i < rep.energy_trace.size(); ++i) {
    if (rep.energy_trace[i].value > rep.energy_trace[i - 1].value) ++increases;
  }
  const double feas = max_abs(b_residual(g, rep.g_final, b));
  Outcome o;
  o.pass = elapsed < 300.0 && increases == 0 && rep.iterations == rep.s_budget && feas <= 1e-9 * (1 + max_abs(b));
  o.detail = fmt("S = %lld, tau %.1f, %.1f s (limit 300 s), trace points %zu, increases %d, TGAP/Phi %.2g",
                 static_cast<long long>(rep.s_budget), rep.tau, elapsed, rep.energy_trace.size(), increases,
                 rep.final_tgap / rep.final_energy);
  return o;
}

void report(int id, const char* name, const std::function<Outcome()>& run, int& failures) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  int failures = 0;
  CycleSuiteResult cycles;
  try {
    cycles = cycle_update_suites();
  } catch (const std::exception& e) {
    cycles.drop = cycles.exact = {false, std::string("exception: ") + e.what()};
  }
  report(1, "per-update energy drop", [&] { return cycles.drop; }, failures);
  report(2, "exact cycle optimum", [&] { return cycles.exact; }, failures);
  report(3, "duality gaps", duality_suite, failures);
  report(4, "identity equivalence", identity_suite, failures);
  report(5, "nonlinear convergence", convergence_suite, failures);
  report(6, "structural identities", structural_suite, failures);
  report(7, "expected gap reduction", reduction_suite, failures);
  report(8, "determinism and golden files", determinism_suite, failures);
  report(9, "scale smoke test", scale_suite, failures);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
