#pragma once

#include "netlqr/infograph.hpp"
#include "netlqr/problem.hpp"

#include <vector>

namespace netlqr {

// Backward value recursion over the information graph. For each info node r
// with descendant s:
//   X_T^r = Qf^{rr}
//   Omega_t^r = R_t^{rr} + B_t^{sr}' X_{t+1}^s B_t^{sr}
//   K_t^r = -(Omega_t^r)^{-1} (S_t^{rr} + A_t^{sr}' X_{t+1}^s B_t^{sr})'
//   X_t^r = Q_t^{rr} + A_t^{sr}' X_{t+1}^s A_t^{sr} - K_t^r' Omega_t^r K_t^r
// plus the completed square Gamma_t^r and the additive cost offsets c_t.
struct ValueSchedule {
  std::vector<std::vector<Eigen::MatrixXd>> X;      // [t][r], t = 0..T
  std::vector<std::vector<Eigen::MatrixXd>> Omega;  // [t][r], t = 0..T-1
  std::vector<std::vector<Eigen::MatrixXd>> Gamma;  // [t][r], t = 0..T-1
  std::vector<double> c;                            // t = 0..T, c_T = 0
};

struct GainSchedule {
  std::vector<std::vector<Eigen::MatrixXd>> K;  // [t][r], t = 0..T-1
};

// Throws std::runtime_error when some Omega_t^r fails to be positive definite
// (the standing assumption R > 0 failed numerically).
std::pair<ValueSchedule, GainSchedule> finite_horizon(const LQProblem& p,
                                                      const InfoGraph& ig);

// V_0 = sum_i Tr((X_0^{root(i)})^{ii} Sigma0^i)
//     + sum_t sum_i Tr((X_{t+1}^{root(i)})^{ii} W_t^i).
double optimal_cost(const ValueSchedule& vs, const LQProblem& p,
                    const InfoGraph& ig);

// The (i,i) diagonal block of a subset-indexed symmetric matrix X^s.
Eigen::MatrixXd diag_block(const Eigen::MatrixXd& Xs, const BlockPartition& part,
                           const NodeSet& s, int node_id);

struct SteadyState {
  std::vector<Eigen::MatrixXd> X;  // per info node
  std::vector<Eigen::MatrixXd> K;  // per info node
  int iterations = 0;              // self-loop fixpoint iterations used
  double final_delta = 0.0;        // last max-norm step over self-loops
  double average_cost = 0.0;       // steady-state cost rate
};

// Iterates the self-loop recursions from Qf^{ss} until the max-norm update
// drops below tol (throws std::runtime_error naming the failing self-loop
// after max_iter). Non-self-loop values then follow by walking each chain
// backwards one recursion step per edge.
SteadyState steady_state(const LQProblem& p, const InfoGraph& ig,
                         double tol = 1e-9, int max_iter = 10000);

struct SsConditionReport {
  struct SelfLoopCheck {
    NodeSet s;
    bool stabilizable = false;
    bool full_column_rank = false;
    // Smallest sigma_min/sigma_max over the theta grid (rank margin).
    double rank_margin = 0.0;
  };
  bool ok = false;
  std::vector<SelfLoopCheck> checks;
  int theta_grid = 0;
  // The rank condition is sampled on a grid, not proven over the continuum.
  std::string grid_note;
  std::string message() const;
};

// Existence conditions per self-loop s: (A^{ss}, B^{ss}) stabilizable
// (PBH eigenvector test) and [A^{ss} - e^{j theta} I, B^{ss}; C, D] full
// column rank on a theta grid, where [C D]'[C D] = [[Q,S],[S',R]]^{ss blocks}.
SsConditionReport check_ss_conditions(const LQProblem& p, const InfoGraph& ig,
                                      int theta_grid = 720);

// Per-(t, r) Trace(X_t^r) rows for the convergence table.
std::vector<std::vector<double>> trace_table(const ValueSchedule& vs);

}  // namespace netlqr
