#pragma once

#include "netlqr/problem.hpp"

#include <random>
#include <string>
#include <vector>

// Shared fixtures for the test binaries: the two bundled network examples,
// small hand-checkable instances, random instance generators for property
// tests, and an independently coded classical Riccati recursion used to
// cross-check the centralized special case.
namespace fix {

std::string data_path(const std::string& name);

// Three nodes: 1 <-> 2 with delay 1 both ways, 2 -> 3 with delay 0.
netlqr::NetworkGraph example1_graph();
netlqr::LQProblem example1(int horizon = 10);

// Four nodes: 1 -> {2,3} delay 1, 2 -> 4 delay 1, 3 -> 4 delay 1,
// 4 -> 3 delay 0; dense coupled costs.
netlqr::NetworkGraph example8_graph();
netlqr::LQProblem example8(int horizon = 200);

// Two nodes joined only by a delay-2 edge (coupling through the cost), the
// smallest instance that exercises relay expansion.
netlqr::LQProblem relay_pair(int horizon = 6);

netlqr::LQProblem single_node(int horizon, int dim = 1);

struct RandomOptions {
  int min_nodes = 2;
  int max_nodes = 3;
  int max_dim = 2;      // per-node state/input dims drawn from 1..max_dim
  int min_horizon = 1;
  int max_horizon = 4;
  double edge_prob = 0.6;
  int max_delay = 1;    // backward edges get 1..max_delay
};

// Random delays in {0,1,..}: delay-0 edges only run forward along a random
// node permutation, so the delay-0 subgraph is acyclic by construction.
netlqr::NetworkGraph random_graph(std::mt19937_64& rng, int n,
                                  double edge_prob, int max_delay = 1);

// Conformant sparsity (A/B blocks masked by the delay matrix), positive
// definite stage cost (Gram matrix plus ridge), positive definite noise.
netlqr::LQProblem random_problem(std::mt19937_64& rng,
                                 const RandomOptions& opt);

// Plain dense time-varying Riccati recursion with cross terms, written from
// the textbook formulas (explicit inverse, no block structure) so it shares
// no code path with the library.
struct ClassicalSolution {
  std::vector<Eigen::MatrixXd> P;  // t = 0..T
  std::vector<Eigen::MatrixXd> K;  // t = 0..T-1
  double v0 = 0.0;                 // expected cost under the problem's noise
};
ClassicalSolution classical_riccati(const netlqr::LQProblem& p);

}  // namespace fix
