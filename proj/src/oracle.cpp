#include "netlqr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace netlqr {

namespace {

struct FreeEntry {
  int t, row, col;
};

// One scalar decision per structurally admissible Theta entry.
std::vector<FreeEntry> free_entries(const LQProblem& p, const DelayMatrix& D,
                                    const NoiseBasis& basis) {
  std::vector<FreeEntry> out;
  const BlockPartition& part = p.partition;
  for (int t = 0; t < p.horizon; ++t) {
    for (int i : part.node_ids()) {
      const int r0 = part.offset(Axis::Input, i);
      const int mi = part.dim(Axis::Input, i);
      for (int j : part.node_ids()) {
        const int d = D.at(i, j);
        if (d == kInfDelay) continue;
        // Symbol w_{k-1}^j (k = 0 is x_0^j) is visible to i at t when
        // k <= t - D^{ij}.
        for (int k = 0; k <= t - d; ++k) {
          const int c0 = basis.offset(j, k - 1);
          const int nj = basis.block_dim(j);
          for (int r = 0; r < mi; ++r)
            for (int c = 0; c < nj; ++c)
              out.push_back({t, r0 + r, c0 + c});
        }
      }
    }
  }
  return out;
}

// Square root of the stacked noise covariance blkdiag(Sigma0^i; W_t^i),
// aligned with the NoiseBasis layout.
Eigen::MatrixXd noise_sqrt(const LQProblem& p, const NoiseBasis& basis) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
  const BlockPartition& part = p.partition;
  for (int idx = 0; idx < part.node_count(); ++idx) {
    const int j = part.node_ids()[idx];
    const int o = basis.offset(j, -1);
    const int d = basis.block_dim(j);
    L.block(o, o, d, d) = psd_sqrt(p.Sigma0[idx], "Sigma0");
  }
  for (int t = 0; t < p.horizon; ++t) {
    for (int idx = 0; idx < part.node_count(); ++idx) {
      const int j = part.node_ids()[idx];
      const int o = basis.offset(j, t);
      const int d = basis.block_dim(j);
      L.block(o, o, d, d) = psd_sqrt(p.W[t][idx], "W");
    }
  }
  return L;
}

// Residual of the exact expected cost: stacking C_t [Phi_t; Theta_t] L over
// t plus the terminal row block gives J(Theta) = ||residual||_F^2, affine in
// the decision entries.
Eigen::VectorXd residual(const LQProblem& p, const NoiseBasis& basis,
                         const std::vector<Eigen::MatrixXd>& stage_sqrt,
                         const Eigen::MatrixXd& final_sqrt,
                         const Eigen::MatrixXd& L,
                         const std::vector<Eigen::MatrixXd>& Theta) {
  const int T = p.horizon;
  const int N = p.state_dim();
  const int M = p.input_dim();
  const int Nb = basis.dim();
  Eigen::VectorXd r(static_cast<long>(T) * (N + M) * Nb +
                    static_cast<long>(N) * Nb);
  long at = 0;
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(N, Nb);
  Phi.leftCols(N).setIdentity();  // x_0 coordinates come first in the basis
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd stacked(N + M, Nb);
    stacked.topRows(N) = Phi;
    stacked.bottomRows(M) = Theta[t];
    Eigen::MatrixXd block = stage_sqrt[t] * stacked * L;
    r.segment(at, block.size()) =
        Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    at += block.size();
    Phi = p.A[t].m * Phi + p.B[t].m * Theta[t];
    Phi.middleCols((t + 1) * N, N) += Eigen::MatrixXd::Identity(N, N);
  }
  Eigen::MatrixXd block = final_sqrt * Phi * L;
  r.segment(at, block.size()) =
      Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
  return r;
}

}  // namespace

OracleResult brute_force_solve(const LQProblem& p, const DelayMatrix& D,
                               int max_decision_dims) {
  const int T = p.horizon;
  const int N = p.state_dim();
  const int M = p.input_dim();
  OracleResult out;
  out.basis = NoiseBasis(p.partition, T);

  const std::vector<FreeEntry> entries = free_entries(p, D, out.basis);
  out.decision_dims = static_cast<int>(entries.size());
  if (out.decision_dims > max_decision_dims) {
    std::ostringstream os;
    os << "brute-force policy space has " << out.decision_dims
       << " decision variables, above the cap of " << max_decision_dims
       << "; use a smaller instance";
    throw GuardrailError(os.str(), out.decision_dims);
  }

  std::vector<Eigen::MatrixXd> stage_sqrt;
  stage_sqrt.reserve(T);
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd H(N + M, N + M);
    H.topLeftCorner(N, N) = p.Q[t].m;
    H.topRightCorner(N, M) = p.S[t].m;
    H.bottomLeftCorner(M, N) = p.S[t].m.transpose();
    H.bottomRightCorner(M, M) = p.R[t].m;
    stage_sqrt.push_back(psd_sqrt(H, "stage cost"));
  }
  const Eigen::MatrixXd final_sqrt = psd_sqrt(p.Qf.m, "Qf");
  const Eigen::MatrixXd L = noise_sqrt(p, out.basis);

  std::vector<Eigen::MatrixXd> Theta(T, Eigen::MatrixXd::Zero(M, out.basis.dim()));
  const Eigen::VectorXd r0 =
      residual(p, out.basis, stage_sqrt, final_sqrt, L, Theta);

  // Columns of the affine residual map, one per decision entry.
  Eigen::MatrixXd Amat(r0.size(), entries.size());
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const FreeEntry& e = entries[j];
    Theta[e.t](e.row, e.col) = 1.0;
    Amat.col(static_cast<long>(j)) =
        residual(p, out.basis, stage_sqrt, final_sqrt, L, Theta) - r0;
    Theta[e.t](e.row, e.col) = 0.0;
  }

  Eigen::VectorXd theta;
  if (entries.empty()) {
    theta.resize(0);
    out.condition_number = 1.0;
  } else {
    const Eigen::MatrixXd G = Amat.transpose() * Amat;
    const Eigen::VectorXd rhs = -Amat.transpose() * r0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double lam_max = std::max(ev.maxCoeff(), 0.0);
    const double lam_min = ev.minCoeff();
    out.condition_number = lam_min > 0.0
                               ? lam_max / lam_min
                               : std::numeric_limits<double>::infinity();
    if (lam_min <= 1e-12 * std::max(lam_max, 1.0)) {
      // Flat directions (possible only with degenerate cost or noise):
      // take the minimum-norm stationary point.
      out.min_norm_fallback = true;
      Eigen::VectorXd inv = ev;
      for (int i = 0; i < inv.size(); ++i)
        inv[i] = ev[i] > 1e-12 * std::max(lam_max, 1.0) ? 1.0 / ev[i] : 0.0;
      theta = es.eigenvectors() * inv.asDiagonal() *
              es.eigenvectors().transpose() * rhs;
    } else {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
      theta = ldlt.solve(rhs);
      theta += ldlt.solve(rhs - G * theta);  // one refinement round
    }
  }

  for (std::size_t j = 0; j < entries.size(); ++j)
    Theta[entries[j].t](entries[j].row, entries[j].col) =
        theta[static_cast<long>(j)];
  out.theta = std::move(Theta);
  out.cost = residual(p, out.basis, stage_sqrt, final_sqrt, L, out.theta)
                 .squaredNorm();
  return out;
}

CompareReport compare(const LQProblem& p, const InfoGraph& ig,
                      const GainSchedule& ks, double synthesized_cost,
                      const OracleResult& oracle) {
  CompareReport rep;
  rep.synthesized_cost = synthesized_cost;
  rep.oracle_cost = oracle.cost;
  rep.abs_gap = std::abs(synthesized_cost - oracle.cost);
  rep.rel_gap = rep.abs_gap / std::max(1.0, std::abs(oracle.cost));
  rep.maps_compared = !oracle.min_norm_fallback;
  if (rep.maps_compared) {
    const ControllerRealization cr = realize(p, ig, ks);
    const NoiseMaps maps = noise_maps(cr, p);
    for (int t = 0; t < p.horizon; ++t) {
      // Column j of each map is the input response to a unit impulse in
      // noise coordinate j; uniqueness of the optimum makes them comparable.
      const double dev =
          (maps.u[t] - oracle.theta[t]).cwiseAbs().maxCoeff();
      rep.max_map_deviation = std::max(rep.max_map_deviation, dev);
    }
  }
  return rep;
}

std::string CompareReport::summary() const {
  std::ostringstream os;
  os << "synthesized cost " << synthesized_cost << ", oracle cost "
     << oracle_cost << ", abs gap " << abs_gap << ", rel gap " << rel_gap;
  if (maps_compared)
    os << ", max input-map deviation " << max_map_deviation;
  else
    os << ", input maps not compared (optimum not unique)";
  return os.str();
}

}  // namespace netlqr
