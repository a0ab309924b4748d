#include "nlsolve/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string_view>

#include "nlsolve/energy.hpp"
#include "nlsolve/errors.hpp"
#include "nlsolve/instance_io.hpp"
#include "nlsolve/oracle.hpp"

namespace nlsolve::cli {

namespace {

// Minimal JSON emitter: keys appear in insertion order, reals as %.17g.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) { out_ << '{'; }
  ~JsonWriter() { out_ << "\n}\n"; }

  void key(std::string_view k) {
    if (count_++) out_ << ',';
    out_ << "\n  \"" << k << "\": ";
  }
  void real(std::string_view k, double v) {
    key(k);
    write_real(v);
  }
  void integer(std::string_view k, long long v) {
    key(k);
    out_ << v;
  }
  void unsigned_integer(std::string_view k, unsigned long long v) {
    key(k);
    out_ << v;
  }
  void boolean(std::string_view k, bool v) {
    key(k);
    out_ << (v ? "true" : "false");
  }
  void string(std::string_view k, std::string_view v) {
    key(k);
    out_ << nlohmann::json(std::string(v)).dump();
  }
  void reals(std::string_view k, std::span<const double> values) {
    key(k);
    out_ << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ", ";
      write_real(values[i]);
    }
    out_ << ']';
  }
  void trace(std::string_view k, const std::vector<TracePoint>& points) {
    key(k);
    out_ << '[';
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) out_ << ", ";
      out_ << '[' << points[i].iteration << ", ";
      write_real(points[i].value);
      out_ << ']';
    }
    out_ << ']';
  }
  void strings(std::string_view k, const std::vector<std::string>& values) {
    key(k);
    out_ << nlohmann::json(values).dump();
  }

 private:
  void write_real(double v) {
    if (!std::isfinite(v)) {
      out_ << "null";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out_ << buf;
  }

  std::ostream& out_;
  int count_ = 0;
};

std::vector<std::string> nonlinearity_failures(const Graph& graph, double k) {
  try {
    require_admissible(graph, k);
  } catch (const ValidationError& e) {
    return {e.what()};
  }
  return {};
}

NodeVector load_b(const std::string& path, const Graph& graph) {
  auto b = read_vector_file(path);
  if (b.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw ValidationError("b has " + std::to_string(b.size()) + " entries, graph has " +
                          std::to_string(graph.num_nodes()) + " nodes");
  }
  return b;
}

struct SolveArgs {
  std::string instance;
  std::string b;
  double epsilon = 0.1;
  std::optional<double> k;
  std::uint64_t seed = 1;
  std::string tree = "spt";
  std::optional<std::int64_t> max_iters;
  std::optional<double> gap_exit;
  std::optional<std::int64_t> trace_every;
  bool omit_timing = false;
};

int cmd_solve(const SolveArgs& args, std::ostream& out) {
  const Graph graph = read_instance_file(args.instance);
  const NodeVector b = load_b(args.b, graph);
  SolverConfig config;
  config.epsilon = args.epsilon;
  config.k = args.k;
  config.seed = args.seed;
  config.tree_strategy = parse_tree_strategy(args.tree);
  config.max_iterations_override = args.max_iters;
  config.gap_early_exit = args.gap_exit;
  config.trace_every = args.trace_every;
  const auto report = solve(graph, b, config);
  write_solve_json(out, report, !args.omit_timing);
  return kSuccess;
}

int cmd_tree(const std::string& instance, const std::string& strategy, std::ostream& out) {
  const Graph graph = read_instance_file(instance);
  const auto tree = build_tree(graph, parse_tree_strategy(strategy));
  char buf[64];
  out << "edge\tu\tv\tw\tin_tree\tstretch\n";
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& ed = graph.edge(e);
    out << e << '\t' << ed.u << '\t' << ed.v << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", ed.w);
    out << buf << '\t' << (tree.in_tree(e) ? 1 : 0) << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", tree.stretch()[static_cast<std::size_t>(e)]);
    out << buf << '\n';
  }
  const double identity =
      tree.st() + graph.num_edges() - 2.0 * graph.num_nodes() + 2.0;
  const bool holds = std::abs(identity - tree.tau()) <= 1e-9 * std::max(1.0, std::abs(tree.tau()));
  std::snprintf(buf, sizeof buf, "%.17g", tree.st());
  out << "# st\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", tree.tau());
  out << "# tau\t" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", identity);
  out << "# st+m-2n+2\t" << buf << '\n';
  out << "# tau_identity\t" << (holds ? "ok" : "MISMATCH") << '\n';
  return holds ? kSuccess : kInternalFailure;
}

int cmd_oracle(const std::string& instance, const std::string& b_path, double tol, std::ostream& out) {
  const Graph graph = read_instance_file(instance);
  const NodeVector b = load_b(b_path, graph);
  const auto sol = reference_solve(graph, b, tol);
  JsonWriter json(out);
  json.reals("x_star", sol.x_star);
  json.reals("g_star", sol.g_star.g);
  json.real("phi_star", sol.phi_star);
  json.real("kkt_residual", sol.kkt_residual);
  json.integer("newton_steps", sol.newton_steps);
  return kSuccess;
}

int cmd_validate(const std::string& instance, const std::string& b_path,
                 const std::optional<std::string>& solution, std::optional<double> k_arg,
                 std::ostream& out) {
  const Graph graph = read_instance_file(instance);
  const NodeVector b = read_vector_file(b_path);
  const auto report = validate_instance(graph, b);

  nlohmann::json sol;
  if (solution) {
    std::ifstream in(*solution);
    if (!in) throw ParseError("cannot open '" + *solution + "'");
    try {
      sol = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("solution file: " + std::string(e.what()));
    }
  }
  double k = k_arg.value_or(graph.max_k_bound());
  if (!k_arg && sol.contains("k")) k = sol.at("k").get<double>();
  const auto nl_failures = nonlinearity_failures(graph, k);

  bool ok = report.ok() && nl_failures.empty();
  JsonWriter json(out);
  json.boolean("instance_ok", report.ok());
  json.strings("instance_failures", report.failures);
  json.real("k", k);
  json.boolean("admissible", nl_failures.empty());
  json.strings("admissibility_failures", nl_failures);
  if (solution && report.ok()) {
    std::vector<double> gv;
    try {
      gv = sol.at("g").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("solution file: " + std::string(e.what()));
    }
    if (gv.size() != static_cast<std::size_t>(graph.num_edges())) {
      throw ValidationError("solution g has " + std::to_string(gv.size()) + " entries, graph has " +
                            std::to_string(graph.num_edges()) + " edges");
    }
    const FlowState g(std::move(gv));
    const auto strategy = parse_tree_strategy(sol.value("tree", std::string("spt")));
    const auto tree = build_tree(graph, strategy);
    const double residual = max_abs(b_residual(graph, g, b));
    const bool feasible = residual <= 1e-9 * (1.0 + max_abs(b));
    const double tgap = tree_gap_unchecked(graph, tree, g);
    json.real("b_residual_max", residual);
    json.boolean("b_feasible", feasible);
    json.real("energy", energy(graph, g));
    json.real("tgap", tgap);
    if (sol.contains("final_tgap")) {
      const double reported = sol.at("final_tgap").get<double>();
      const double rel = std::abs(tgap - reported) / std::max(std::abs(reported), 1e-300);
      const bool match = tgap == reported || rel <= 1e-9;
      json.real("reported_final_tgap", reported);
      json.real("tgap_relative_difference", tgap == reported ? 0.0 : rel);
      json.boolean("tgap_matches", match);
      ok = ok && match;
    }
    ok = ok && feasible;
  }
  json.boolean("ok", ok);
  return ok ? kSuccess : kValidationFailure;
}

}  // namespace

void write_solve_json(std::ostream& out, const SolveReport& report, bool include_timing) {
  JsonWriter json(out);
  json.reals("x", report.x_final);
  json.reals("g", report.g_final.g);
  json.integer("iterations", report.iterations);
  json.integer("S_budget", report.s_budget);
  json.real("tau", report.tau);
  json.real("st", report.st);
  json.trace("energy_trace", report.energy_trace);
  json.trace("tgap_trace", report.tgap_trace);
  json.unsigned_integer("seed", report.seed);
  json.real("wall_time_s", include_timing ? report.wall_time_s : 0.0);
  json.real("final_tgap", report.final_tgap);
  json.real("final_energy", report.final_energy);
  json.real("k", report.k);
  json.real("epsilon", report.epsilon);
  json.string("tree", to_string(report.tree_strategy));
  json.integer("root", report.root);
  json.boolean("stopped_early", report.stopped_early);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized cycle-update solver for nonlinear graph Laplacian systems"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve L(x) = b and print a JSON report");
  solve_cmd->add_option("instance", solve_args.instance, "Edge-list instance file")->required();
  solve_cmd->add_option("b", solve_args.b, "Right-hand side, one value per line")->required();
  solve_cmd->add_option("--epsilon", solve_args.epsilon, "Target accuracy in (0, 1)");
  solve_cmd->add_option("--k", solve_args.k, "Nonlinearity bound (default: max over edges)");
  solve_cmd->add_option("--seed", solve_args.seed, "RNG seed");
  solve_cmd->add_option("--tree", solve_args.tree, "Tree strategy: spt or mst");
  solve_cmd->add_option("--max-iters", solve_args.max_iters, "Override the iteration budget");
  solve_cmd->add_option("--gap-exit", solve_args.gap_exit, "Stop when TGAP/energy falls to this");
  solve_cmd->add_option("--trace-every", solve_args.trace_every, "Trace interval in iterations");
  solve_cmd->add_flag("--omit-timing", solve_args.omit_timing, "Write wall_time_s as 0");

  std::string tree_instance;
  std::string tree_strategy = "spt";
  auto* tree_cmd = app.add_subcommand("tree", "Print per-edge stretch, st(T) and tau(T) as TSV");
  tree_cmd->add_option("instance", tree_instance, "Edge-list instance file")->required();
  tree_cmd->add_option("--tree", tree_strategy, "Tree strategy: spt or mst");

  std::string oracle_instance;
  std::string oracle_b;
  double oracle_tol = 1e-12;
  auto* oracle_cmd = app.add_subcommand("oracle", "Dense reference solve, JSON output");
  oracle_cmd->add_option("instance", oracle_instance, "Edge-list instance file")->required();
  oracle_cmd->add_option("b", oracle_b, "Right-hand side file")->required();
  oracle_cmd->add_option("--tol", oracle_tol, "Residual tolerance relative to 1 + ||b||_inf");

  std::string validate_instance_path;
  std::string validate_b;
  std::optional<std::string> validate_solution;
  std::optional<double> validate_k;
  auto* validate_cmd = app.add_subcommand("validate", "Check an instance and optionally a solve report");
  validate_cmd->add_option("instance", validate_instance_path, "Edge-list instance file")->required();
  validate_cmd->add_option("b", validate_b, "Right-hand side file")->required();
  validate_cmd->add_option("--solution", validate_solution, "JSON report written by solve");
  validate_cmd->add_option("--k", validate_k, "Nonlinearity bound to check");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseFailure;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, out);
    if (*tree_cmd) return cmd_tree(tree_instance, tree_strategy, out);
    if (*oracle_cmd) return cmd_oracle(oracle_instance, oracle_b, oracle_tol, out);
    if (*validate_cmd) {
      return cmd_validate(validate_instance_path, validate_b, validate_solution, validate_k, out);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseFailure;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalFailure;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalFailure;
  }
  return kInternalFailure;
}

}  // namespace nlsolve::cli
