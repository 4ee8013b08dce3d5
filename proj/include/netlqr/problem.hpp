#pragma once

#include "netlqr/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace netlqr {

// Full LQ problem instance over a network graph:
//   x_{t+1} = A_t x_t + B_t u_t + w_t,  x_0 ~ N(0, blkdiag Sigma0^i),
//   w_t^i ~ N(0, W_t^i) mutually independent,
//   cost = E[ sum_t [x;u]' [[Q,S],[S',R]] [x;u] + x_T' Qf x_T ].
// A_t^{ij} and B_t^{ij} must vanish whenever D^{ij} >= 2.
struct LQProblem {
  NetworkGraph graph;
  BlockPartition partition;
  int horizon = 0;            // T >= 1
  bool time_invariant = false;
  std::vector<BlockMatrix> A, B;     // size T: State x State, State x Input
  std::vector<BlockMatrix> Q, S, R;  // size T: SxS, SxI, IxI
  BlockMatrix Qf;                    // State x State
  std::vector<std::vector<Eigen::MatrixXd>> W;  // [t][node index]
  std::vector<Eigen::MatrixXd> Sigma0;          // [node index]

  int state_dim() const { return partition.total_dim(Axis::State); }
  int input_dim() const { return partition.total_dim(Axis::Input); }
};

// Replicates one set of time-invariant matrices across the horizon.
LQProblem make_time_invariant(NetworkGraph graph, BlockPartition partition,
                              int horizon, Eigen::MatrixXd A, Eigen::MatrixXd B,
                              Eigen::MatrixXd Q, Eigen::MatrixXd R,
                              Eigen::MatrixXd S, Eigen::MatrixXd Qf,
                              std::vector<Eigen::MatrixXd> W_per_node,
                              std::vector<Eigen::MatrixXd> Sigma0);

struct ProblemReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::string message() const;
};

// Checks sparsity conformance exactly (every A/B block against D) and the
// standing assumptions to tolerance: [[Q,S],[S',R]] PSD, R PD, Qf PSD,
// W and Sigma0 PSD. Reports every violating block or eigenvalue.
ProblemReport validate(const LQProblem& p, const DelayMatrix& d);

// PSD/PD slack: minimum eigenvalue >= -tol (PSD) or >= +tol (PD) with
// tol = 1e-9 * (1 + ||M||).
bool is_psd(const Eigen::MatrixXd& m, std::string* why = nullptr);
bool is_pd(const Eigen::MatrixXd& m, std::string* why = nullptr);

// Symmetric PSD square root with small negative eigenvalues clamped to zero;
// throws std::invalid_argument naming `what` when the matrix is not PSD.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const std::string& what);

struct Disturbances {
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> w;  // size T
};

// Precomputes covariance square roots so repeated sampling is cheap.
// Degenerate (singular PSD) covariances are fine; zero gives exact zeros.
class DisturbanceSampler {
 public:
  explicit DisturbanceSampler(const LQProblem& p);
  // Deterministic given seed; per-node draws in partition order.
  Disturbances sample(std::uint64_t seed) const;

 private:
  int state_dim_;
  int horizon_;
  std::vector<Eigen::MatrixXd> sqrt_sigma0_;          // per node
  std::vector<std::vector<Eigen::MatrixXd>> sqrt_w_;  // [t][node]
};

Disturbances sample_disturbances(const LQProblem& p, std::uint64_t seed);

// Layout of the stacked independent-noise basis [x_0 blocks ; w_0 ; ... ; w_{T-1}]:
// the coordinates every noise-to-signal linear map is expressed in.
class NoiseBasis {
 public:
  NoiseBasis() = default;
  NoiseBasis(const BlockPartition& partition, int horizon);
  int dim() const { return dim_; }
  int horizon() const { return horizon_; }
  // Block start for symbol w_k^node (k = -1 is x_0^node).
  int offset(int node_id, int k) const;
  int block_dim(int node_id) const;

 private:
  BlockPartition partition_;
  int horizon_ = 0;
  int dim_ = 0;
};

}  // namespace netlqr
