#include "netlqr/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace netlqr;

// Exit codes: 0 success, 2 input error, 3 condition failure, 4 guardrail.

std::string resolve_out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty()) {
    const char* env = std::getenv("NETLQR_OUTPUT_DIR");
    dir = (env && *env) ? env : ".";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_valid_graph(const NetworkGraph& g) {
  const GraphValidation v = validate(g);
  if (v.ok) return;
  // A zero-delay cycle is a well-formed file describing an infeasible
  // instance; everything else is a malformed input.
  if (!v.zero_delay_cycle.empty()) throw std::runtime_error(v.message());
  throw InputError(v.message());
}

// Edges with delay >= 2 are rewritten through relay chains so that synthesis,
// simulation, and verification all run on a 0/1-delay network.
LQProblem maybe_expand(LQProblem p, double relay_weight, bool quiet = false) {
  bool needs = false;
  for (const Edge& e : p.graph.edges) needs = needs || e.delay >= 2;
  if (!needs) return p;
  const int before = static_cast<int>(p.graph.nodes.size());
  auto [g2, p2] = expand_relays(p.graph, p, relay_weight);
  if (!quiet)
    std::cout << "expanded " << (p2.graph.nodes.size() - before)
              << " relay node(s) for delays >= 2\n";
  return p2;
}

void ensure_conformant(const LQProblem& p, const DelayMatrix& D) {
  const ProblemReport rep = validate(p, D);
  if (!rep.ok) throw std::runtime_error(rep.message());
}

int cmd_infograph(const std::string& file, const std::string& dir_flag) {
  const std::string dir = resolve_out_dir(dir_flag);
  NetworkGraph g = load_graph(file);
  ensure_valid_graph(g);
  const DelayMatrix D = delay_matrix(g);
  const InfoGraph ig = build_info_graph(D);
  const InfoGraphReport rep = check_properties(ig, D.n());

  write_text_file(join(dir, "infograph.dot"), infograph_dot(ig));
  write_text_file(join(dir, "infograph.json"),
                  infograph_to_json(ig).dump(2) + "\n");
  std::cout << "nodes " << ig.size() << " (bounds " << D.n() << ".."
            << D.n() * D.n() - D.n() + 1 << ")\n";
  for (int s = 0; s < ig.size(); ++s)
    std::cout << "  " << node_set_name(ig.nodes[s]) << " -> "
              << node_set_name(ig.nodes[ig.descendant[s]]) << "\n";
  if (!rep.ok) {
    for (const std::string& v : rep.violations) std::cerr << v << "\n";
    return 3;
  }
  std::cout << "properties ok; wrote infograph.dot, infograph.json in " << dir
            << "\n";
  return 0;
}

int cmd_synth(const std::string& file, int horizon, bool steady,
              int trace_horizon, double relay_weight,
              const std::string& dir_flag) {
  const std::string dir = resolve_out_dir(dir_flag);
  LQProblem p = load_problem(file);
  if (horizon > 0) p = with_horizon(p, horizon);
  p = maybe_expand(std::move(p), relay_weight);
  const DelayMatrix D = delay_matrix(p.graph);
  ensure_conformant(p, D);
  const InfoGraph ig = build_info_graph(D);

  if (steady) {
    if (!p.time_invariant)
      throw InputError("steady-state synthesis needs a time-invariant problem");
    const SsConditionReport cond = check_ss_conditions(p, ig);
    std::cout << cond.message();
    if (!cond.ok) return 3;
    const SteadyState ss = steady_state(p, ig);
    write_text_file(join(dir, "gains.json"),
                    steady_gains_to_json(ss.K, ig).dump(2) + "\n");
    const StabilityReport stab = stability_check(p, ig, ss.K);
    for (const auto& loop : stab.self_loops)
      std::cout << "self-loop " << node_set_name(loop.s)
                << " closed-loop spectral radius " << loop.rho << "\n";
    std::cout << "converged in " << ss.iterations << " iterations (last step "
              << format_g17(ss.final_delta) << ")\n";
    std::cout << "average cost rate " << format_g17(ss.average_cost) << "\n";
    // Convergence table: the finite-horizon recursion long enough to show
    // every Trace(X_t^r) flatten out.
    const LQProblem pw = with_horizon(p, trace_horizon);
    const auto [vs, ks] = finite_horizon(pw, ig);
    write_text_file(join(dir, "traces.csv"), trace_csv(trace_table(vs), ig));
    if (!stab.ok) {
      std::cerr << "closed loop is not stable\n";
      return 3;
    }
  } else {
    const auto [vs, ks] = finite_horizon(p, ig);
    write_text_file(join(dir, "gains.json"),
                    gains_to_json(ks, ig).dump(2) + "\n");
    write_text_file(join(dir, "traces.csv"), trace_csv(trace_table(vs), ig));
    std::cout << "V0 " << format_g17(optimal_cost(vs, p, ig)) << "\n";
  }
  std::cout << "wrote gains.json, traces.csv in " << dir << "\n";
  return 0;
}

int cmd_simulate(const std::string& file, const std::string& gains_file,
                 std::uint64_t seed, int rollouts, bool distributed,
                 double relay_weight, const std::string& dir_flag) {
  const std::string dir = resolve_out_dir(dir_flag);
  LQProblem p = load_problem(file);
  p = maybe_expand(std::move(p), relay_weight);
  const DelayMatrix D = delay_matrix(p.graph);
  ensure_conformant(p, D);
  const InfoGraph ig = build_info_graph(D);
  GainSchedule ks;
  if (gains_file.empty()) {
    ks = finite_horizon(p, ig).second;
    std::cout << "no --gains given; synthesized the optimal schedule\n";
  } else {
    ks = load_gains(gains_file, ig, p, p.horizon);
  }

  MonteCarloResult mc;
  const DisturbanceSampler sampler(p);
  if (distributed) {
    const MessagePlan plan = build_plan(p.graph, ig);
    write_text_file(join(dir, "plan.dot"), plan_dot(p.graph, ig, plan));
    long out_of_span = 0;
    for (int k = 0; k < rollouts; ++k) {
      const DistributedRun run = run_distributed(
          p, ig, ks, plan, sampler.sample(rollout_seed(seed, k)));
      mc.costs.push_back(evaluate_cost(run.trajectory, p));
      out_of_span += run.out_of_span_reads;
      if (rollouts == 1) {
        write_text_file(join(dir, "trajectory.csv"),
                        trajectory_csv(run.trajectory, p));
        write_text_file(join(dir, "trace_log.jsonl"),
                        trace_jsonl(run.trace, ig));
        std::cout << "memory: max " << run.max_memory_scalars
                  << " scalars, unread fraction "
                  << format_g17(run.unread_fraction) << "\n";
      }
    }
    if (out_of_span > 0) {
      std::cerr << "locality violated: " << out_of_span
                << " out-of-span reads\n";
      return 3;
    }
    double sum = 0.0;
    for (double c : mc.costs) sum += c;
    mc.mean = sum / rollouts;
    double var = 0.0;
    for (double c : mc.costs) var += (c - mc.mean) * (c - mc.mean);
    mc.std_error =
        rollouts > 1 ? std::sqrt(var / (rollouts - 1) / rollouts) : 0.0;
  } else {
    const ControllerRealization cr = realize(p, ig, ks);
    if (rollouts == 1) {
      const Trajectory traj =
          simulate(cr, p, sampler.sample(rollout_seed(seed, 0)));
      write_text_file(join(dir, "trajectory.csv"), trajectory_csv(traj, p));
      mc.costs = {evaluate_cost(traj, p)};
      mc.mean = mc.costs[0];
    } else {
      mc = monte_carlo_cost(cr, p, rollouts, seed);
    }
  }

  write_text_file(join(dir, "costs.csv"), costs_csv(mc));
  if (rollouts == 1)
    std::cout << "cost " << format_g17(mc.costs[0]) << "\n";
  else
    std::cout << "mean " << format_g17(mc.mean) << "\nstd_error "
              << format_g17(mc.std_error) << "\n";
  std::cout << "wrote costs.csv in " << dir << "\n";
  return 0;
}

int cmd_verify(const std::string& file, const std::string& gains_file,
               double tol, int cap, double relay_weight,
               const std::string& dir_flag) {
  const std::string dir = resolve_out_dir(dir_flag);
  LQProblem p = load_problem(file);
  p = maybe_expand(std::move(p), relay_weight);
  const DelayMatrix D = delay_matrix(p.graph);
  ensure_conformant(p, D);
  const InfoGraph ig = build_info_graph(D);

  GainSchedule ks;
  double claimed = 0.0;
  if (gains_file.empty()) {
    const auto [vs, opt] = finite_horizon(p, ig);
    ks = opt;
    claimed = optimal_cost(vs, p, ig);
  } else {
    ks = load_gains(gains_file, ig, p, p.horizon);
    claimed = analytic_policy_cost(p, ig, ks);
  }

  const OracleResult oracle = brute_force_solve(p, D, cap);
  const CompareReport rep = compare(p, ig, ks, claimed, oracle);
  const bool pass =
      rep.rel_gap <= tol && (!rep.maps_compared || rep.max_map_deviation <= tol);
  write_text_file(join(dir, "verify.json"),
                  verify_report_json(rep, oracle, pass).dump(2) + "\n");
  std::cout << rep.summary() << "\n";
  std::cout << "decision dims " << oracle.decision_dims << ", condition number "
            << format_g17(oracle.condition_number) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << " (tolerance " << tol << ")\n";
  std::cout << "wrote verify.json in " << dir << "\n";
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized LQ synthesis over networks with delays"};
  app.require_subcommand(1);

  std::string file, gains_file, out_dir;
  int horizon = -1;
  bool steady = false;
  int trace_horizon = 200;
  std::uint64_t seed = 1;
  int rollouts = 1;
  bool distributed = false;
  double tol = 1e-6;
  int cap = 2000;
  double relay_weight = 1.0;

  CLI::App* info = app.add_subcommand(
      "infograph", "derive the information graph of a network file");
  info->add_option("file", file, "graph or problem JSON")->required();
  info->add_option("--output-dir", out_dir,
                   "output directory (default $NETLQR_OUTPUT_DIR or .)");

  CLI::App* synth =
      app.add_subcommand("synth", "synthesize the optimal gain schedule");
  synth->add_option("file", file, "problem JSON")->required();
  synth->add_option("--horizon", horizon, "override the problem horizon");
  synth->add_flag("--steady-state", steady, "infinite-horizon synthesis");
  synth->add_option("--trace-horizon", trace_horizon,
                    "length of the convergence table")->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--relay-weight", relay_weight,
                    "input weight for relay nodes")->capture_default_str();
  synth->add_option("--output-dir", out_dir, "output directory");

  CLI::App* sim = app.add_subcommand("simulate", "roll out the closed loop");
  sim->add_option("file", file, "problem JSON")->required();
  sim->add_option("--gains", gains_file, "gains JSON from synth");
  sim->add_option("--seed", seed, "disturbance seed")->capture_default_str();
  sim->add_option("--rollouts", rollouts, "number of rollouts")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_flag("--distributed", distributed,
                "run the message-passing protocol instead of the centralized "
                "recursion");
  sim->add_option("--relay-weight", relay_weight,
                  "input weight for relay nodes")->capture_default_str();
  sim->add_option("--output-dir", out_dir, "output directory");

  CLI::App* verify = app.add_subcommand(
      "verify", "certify gains against the brute-force policy optimum");
  verify->add_option("file", file, "problem JSON")->required();
  verify->add_option("--gains", gains_file,
                     "gains to check (default: synthesize)");
  verify->add_option("--tol", tol, "pass tolerance")->capture_default_str();
  verify->add_option("--cap", cap, "decision-dimension guardrail")->capture_default_str();
  verify->add_option("--relay-weight", relay_weight,
                     "input weight for relay nodes")->capture_default_str();
  verify->add_option("--output-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (info->parsed()) return cmd_infograph(file, out_dir);
    if (synth->parsed())
      return cmd_synth(file, horizon, steady, trace_horizon, relay_weight,
                       out_dir);
    if (sim->parsed())
      return cmd_simulate(file, gains_file, seed, rollouts, distributed,
                          relay_weight, out_dir);
    if (verify->parsed())
      return cmd_verify(file, gains_file, tol, cap, relay_weight, out_dir);
  } catch (const GuardrailError& e) {
    std::cerr << "guardrail: " << e.what() << "\n";
    return 4;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
