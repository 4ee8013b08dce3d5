#pragma once

#include "netlqr/riccati.hpp"

#include <cstdint>
#include <vector>

namespace netlqr {

// The optimal controller in its internal coordinates: per info node s,
//   zeta_0^s    = sum_{root(i)=s} I^{s,{i}} x_0^i
//   zeta_{t+1}^s = sum_{r->s} (A_t^{sr} + B_t^{sr} K_t^r) zeta_t^r
//                 + sum_{root(i)=s} I^{s,{i}} w_t^i
//   u_t^i       = sum_{r contains i} I^{{i},r} K_t^r zeta_t^r
struct ControllerRealization {
  InfoGraph ig;
  BlockPartition partition;
  int horizon = 0;
  std::vector<std::vector<Eigen::MatrixXd>> K;  // [t][r]

  struct UpdateTerm {
    int r;              // source info node
    Eigen::MatrixXd M;  // A^{sr} + B^{sr} K^r
  };
  std::vector<std::vector<std::vector<UpdateTerm>>> updates;  // [t][s]
};

ControllerRealization realize(const LQProblem& p, const InfoGraph& ig,
                              const GainSchedule& ks);

// Constant gain schedule from steady-state gains (for simulating the
// infinite-horizon controller over a finite window).
GainSchedule constant_gains(const std::vector<Eigen::MatrixXd>& K, int horizon);

struct Trajectory {
  std::vector<Eigen::VectorXd> x;                  // t = 0..T
  std::vector<Eigen::VectorXd> u;                  // t = 0..T-1
  std::vector<std::vector<Eigen::VectorXd>> zeta;  // [t][r], t = 0..T
  std::vector<double> stage_costs;                 // T stage terms + terminal
};

Trajectory simulate(const ControllerRealization& cr, const LQProblem& p,
                    const Disturbances& d);

// Realized quadratic cost of a trajectory (sum of stage costs).
double evaluate_cost(const Trajectory& traj, const LQProblem& p);

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> costs;  // per rollout, in rollout order
};

// N seeded rollouts; rollout k draws from a seed derived of (seed, k), so the
// result is independent of thread count. The parallel version is the OpenMP
// kernel; the serial twin is the reference used to test it. Both reduce the
// stored per-rollout costs in index order, so their outputs match exactly.
MonteCarloResult monte_carlo_cost(const ControllerRealization& cr,
                                  const LQProblem& p, int rollouts,
                                  std::uint64_t seed);
MonteCarloResult monte_carlo_cost_serial(const ControllerRealization& cr,
                                         const LQProblem& p, int rollouts,
                                         std::uint64_t seed);

// Per-rollout seed derivation (exposed so distributed rollouts can match).
std::uint64_t rollout_seed(std::uint64_t seed, int k);

struct StabilityReport {
  struct SelfLoop {
    NodeSet s;
    double rho;  // spectral radius of A^{ss} + B^{ss} K^s
  };
  bool ok = false;
  std::vector<SelfLoop> self_loops;
  double lifted_rho = 0.0;  // spectral radius of the stacked zeta update map
};

// Stability of the steady-state closed loop.
StabilityReport stability_check(const LQProblem& p, const InfoGraph& ig,
                                const std::vector<Eigen::MatrixXd>& K);

// Exact linear maps from the stacked noise basis to zeta_t^r, u_t, and x_t.
// Columns outside the label set L_t^r are structurally zero; the oracle
// compares against the u maps.
struct NoiseMaps {
  NoiseBasis basis;
  std::vector<std::vector<Eigen::MatrixXd>> zeta;  // [t][r]
  std::vector<Eigen::MatrixXd> u;                  // [t], t = 0..T-1
  std::vector<Eigen::MatrixXd> x;                  // [t], t = 0..T
};

NoiseMaps noise_maps(const ControllerRealization& cr, const LQProblem& p);

// Exact expected cost of an arbitrary structured linear policy (gains need
// not be optimal), by propagating the joint covariance of the stacked zeta.
double analytic_policy_cost(const LQProblem& p, const InfoGraph& ig,
                            const GainSchedule& ks);

}  // namespace netlqr
