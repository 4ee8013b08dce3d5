// Benchmarks the OpenMP Monte Carlo rollout kernel against its serial
// reference on a ring network, and checks that both produce bitwise
// identical costs (the kernel seeds every rollout independently, so thread
// count must not matter).

#include "netlqr/controller.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#ifdef _OPENMP
#include <omp.h>
#endif

using namespace netlqr;

namespace {

LQProblem ring_problem(int n, int horizon) {
  NetworkGraph g;
  for (int i = 1; i <= n; ++i) g.nodes.push_back(i);
  for (int i = 1; i <= n; ++i) g.edges.push_back({i, i % n + 1, i % 2});

  const BlockPartition part(g.nodes, std::vector<int>(n, 1),
                            std::vector<int>(n, 1));
  Eigen::MatrixXd A = 0.8 * Eigen::MatrixXd::Identity(n, n);
  for (const Edge& e : g.edges) A(e.to - 1, e.from - 1) = 0.2;
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  const std::vector<Eigen::MatrixXd> cov(
      n, 0.2 * Eigen::MatrixXd::Identity(1, 1));
  return make_time_invariant(g, part, horizon, A, B, Q, R, S, Q, cov, cov);
}

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel Monte Carlo rollout benchmark"};
  int nodes = 6, horizon = 40, rollouts = 20000, repeats = 3;
  std::uint64_t seed = 7;
  app.add_option("--nodes", nodes, "ring size")->capture_default_str()->check(CLI::Range(2, 12));
  app.add_option("--horizon", horizon, "rollout length")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--rollouts", rollouts, "rollouts per run")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "timed repetitions")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "base seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const LQProblem p = ring_problem(nodes, horizon);
  const DelayMatrix D = delay_matrix(p.graph);
  const InfoGraph ig = build_info_graph(D);
  const auto [vs, ks] = finite_horizon(p, ig);
  const ControllerRealization cr = realize(p, ig, ks);

  double best_serial = 1e100, best_parallel = 1e100;
  MonteCarloResult serial, parallel;
  for (int rep = 0; rep < repeats; ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    serial = monte_carlo_cost_serial(cr, p, rollouts, seed);
    auto t1 = std::chrono::steady_clock::now();
    parallel = monte_carlo_cost(cr, p, rollouts, seed);
    auto t2 = std::chrono::steady_clock::now();
    best_serial = std::min(best_serial, seconds(t0, t1));
    best_parallel = std::min(best_parallel, seconds(t1, t2));
  }

  bool identical = serial.costs.size() == parallel.costs.size() &&
                   serial.mean == parallel.mean &&
                   serial.std_error == parallel.std_error;
  for (std::size_t k = 0; identical && k < serial.costs.size(); ++k)
    identical = serial.costs[k] == parallel.costs[k];

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::cout << "ring n=" << nodes << " T=" << horizon << " rollouts=" << rollouts
            << " threads=" << threads << "\n";
  std::cout << "serial   " << best_serial << " s  ("
            << rollouts / best_serial << " rollouts/s)\n";
  std::cout << "parallel " << best_parallel << " s  ("
            << rollouts / best_parallel << " rollouts/s)\n";
  std::cout << "speedup  " << best_serial / best_parallel << "x\n";
  std::cout << "mean " << serial.mean << " +/- " << serial.std_error << "\n";
  std::cout << "bitwise identical: " << (identical ? "yes" : "NO") << "\n";
  return identical ? 0 : 1;
}
