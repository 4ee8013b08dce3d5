#include "netlqr/problem.hpp"

#include <random>
#include <stdexcept>

namespace netlqr {

namespace {

double psd_tol(const Eigen::MatrixXd& m) { return 1e-9 * (1.0 + m.norm()); }

double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

bool is_psd(const Eigen::MatrixXd& m, std::string* why) {
  if (m.rows() != m.cols()) {
    if (why) *why = "not square";
    return false;
  }
  double lo = min_eig(m);
  if (lo < -psd_tol(m)) {
    if (why) *why = "min eigenvalue " + std::to_string(lo);
    return false;
  }
  return true;
}

bool is_pd(const Eigen::MatrixXd& m, std::string* why) {
  if (m.rows() != m.cols()) {
    if (why) *why = "not square";
    return false;
  }
  double lo = min_eig(m);
  if (lo < psd_tol(m)) {
    if (why) *why = "min eigenvalue " + std::to_string(lo);
    return false;
  }
  return true;
}

LQProblem make_time_invariant(NetworkGraph graph, BlockPartition partition,
                              int horizon, Eigen::MatrixXd A, Eigen::MatrixXd B,
                              Eigen::MatrixXd Q, Eigen::MatrixXd R,
                              Eigen::MatrixXd S, Eigen::MatrixXd Qf,
                              std::vector<Eigen::MatrixXd> W_per_node,
                              std::vector<Eigen::MatrixXd> Sigma0) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  LQProblem p;
  p.graph = std::move(graph);
  p.partition = std::move(partition);
  p.horizon = horizon;
  p.time_invariant = true;
  BlockMatrix a(p.partition, Axis::State, Axis::State, std::move(A));
  BlockMatrix b(p.partition, Axis::State, Axis::Input, std::move(B));
  BlockMatrix q(p.partition, Axis::State, Axis::State, std::move(Q));
  BlockMatrix r(p.partition, Axis::Input, Axis::Input, std::move(R));
  BlockMatrix s(p.partition, Axis::State, Axis::Input, std::move(S));
  p.Qf = BlockMatrix(p.partition, Axis::State, Axis::State, std::move(Qf));
  p.A.assign(horizon, a);
  p.B.assign(horizon, b);
  p.Q.assign(horizon, q);
  p.R.assign(horizon, r);
  p.S.assign(horizon, s);
  const int n = p.partition.node_count();
  if (static_cast<int>(W_per_node.size()) != n ||
      static_cast<int>(Sigma0.size()) != n)
    throw std::invalid_argument("need one W and Sigma0 matrix per node");
  p.W.assign(horizon, W_per_node);
  p.Sigma0 = std::move(Sigma0);
  return p;
}

std::string ProblemReport::message() const {
  if (ok) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

ProblemReport validate(const LQProblem& p, const DelayMatrix& d) {
  ProblemReport r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.violations.push_back(std::move(msg));
  };
  const auto& part = p.partition;
  const int n = part.node_count();
  const int T = p.horizon;
  if (T < 1) fail("horizon must be >= 1");
  if (part.node_ids() != d.node_ids()) fail("partition and delay matrix disagree on nodes");
  auto expect = [&](const std::vector<BlockMatrix>& v, const char* name, Axis ra,
                    Axis ca) {
    if (static_cast<int>(v.size()) != T) {
      fail(std::string(name) + ": expected " + std::to_string(T) + " entries");
      return false;
    }
    for (const auto& m : v)
      if (m.row_axis != ra || m.col_axis != ca ||
          m.rows() != part.total_dim(ra) || m.cols() != part.total_dim(ca)) {
        fail(std::string(name) + ": block structure mismatch");
        return false;
      }
    return true;
  };
  bool shapes_ok = expect(p.A, "A", Axis::State, Axis::State) &&
                   expect(p.B, "B", Axis::State, Axis::Input) &&
                   expect(p.Q, "Q", Axis::State, Axis::State) &&
                   expect(p.S, "S", Axis::State, Axis::Input) &&
                   expect(p.R, "R", Axis::Input, Axis::Input);
  if (p.Qf.rows() != part.total_dim(Axis::State) ||
      p.Qf.cols() != part.total_dim(Axis::State)) {
    fail("Qf: block structure mismatch");
    shapes_ok = false;
  }
  if (static_cast<int>(p.W.size()) != T) {
    fail("W: expected one per-node list per timestep");
    shapes_ok = false;
  }
  if (static_cast<int>(p.Sigma0.size()) != n) {
    fail("Sigma0: expected one matrix per node");
    shapes_ok = false;
  }
  if (!shapes_ok) return r;

  // Sparsity conformance: blocks must vanish exactly when D^{ij} >= 2.
  for (int t = 0; t < T; ++t) {
    for (int i : part.node_ids())
      for (int j : part.node_ids()) {
        if (i == j) continue;
        int delay = d.at(i, j);
        if (delay != kInfDelay && delay <= 1) continue;
        if (!p.A[t].block(i, j).isZero(0.0))
          fail("A_" + std::to_string(t) + " block (" + std::to_string(i) + "," +
               std::to_string(j) + ") must be zero: D = " +
               (delay == kInfDelay ? std::string("inf") : std::to_string(delay)));
        if (!p.B[t].block(i, j).isZero(0.0))
          fail("B_" + std::to_string(t) + " block (" + std::to_string(i) + "," +
               std::to_string(j) + ") must be zero");
      }
  }
  // Standing assumptions.
  std::string why;
  for (int t = 0; t < T; ++t) {
    const int N = part.total_dim(Axis::State);
    const int M = part.total_dim(Axis::Input);
    Eigen::MatrixXd H(N + M, N + M);
    H << p.Q[t].m, p.S[t].m, p.S[t].m.transpose(), p.R[t].m;
    if (!is_psd(H, &why)) fail("[[Q,S],[S',R]] at t=" + std::to_string(t) + " not PSD: " + why);
    if (!is_pd(p.R[t].m, &why)) fail("R at t=" + std::to_string(t) + " not PD: " + why);
    if (static_cast<int>(p.W[t].size()) != n) {
      fail("W at t=" + std::to_string(t) + ": expected one matrix per node");
      continue;
    }
    for (int k = 0; k < n; ++k) {
      int nd = part.dim_at(Axis::State, k);
      if (p.W[t][k].rows() != nd || p.W[t][k].cols() != nd)
        fail("W at t=" + std::to_string(t) + " node " +
             std::to_string(part.node_ids()[k]) + ": wrong dimensions");
      else if (!is_psd(p.W[t][k], &why))
        fail("W at t=" + std::to_string(t) + " node " +
             std::to_string(part.node_ids()[k]) + " not PSD: " + why);
    }
  }
  if (!is_psd(p.Qf.m, &why)) fail("Qf not PSD: " + why);
  for (int k = 0; k < n; ++k) {
    int nd = part.dim_at(Axis::State, k);
    if (p.Sigma0[k].rows() != nd || p.Sigma0[k].cols() != nd)
      fail("Sigma0 node " + std::to_string(part.node_ids()[k]) + ": wrong dimensions");
    else if (!is_psd(p.Sigma0[k], &why))
      fail("Sigma0 node " + std::to_string(part.node_ids()[k]) + " not PSD: " + why);
  }
  return r;
}

// Symmetric PSD square root with small negative eigenvalues clamped to zero;
// rejects matrices that fail the PSD tolerance outright.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -psd_tol(m))
    throw std::invalid_argument(what + " is not PSD (min eigenvalue " +
                                std::to_string(ev.minCoeff()) + ")");
  Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

DisturbanceSampler::DisturbanceSampler(const LQProblem& p)
    : state_dim_(p.state_dim()), horizon_(p.horizon) {
  const int n = p.partition.node_count();
  sqrt_sigma0_.reserve(n);
  for (int k = 0; k < n; ++k)
    sqrt_sigma0_.push_back(psd_sqrt(p.Sigma0[k], "Sigma0"));
  sqrt_w_.resize(horizon_);
  for (int t = 0; t < horizon_; ++t) {
    sqrt_w_[t].reserve(n);
    for (int k = 0; k < n; ++k)
      sqrt_w_[t].push_back(psd_sqrt(p.W[t][k], "W"));
  }
}

Disturbances DisturbanceSampler::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](const Eigen::MatrixXd& root) {
    Eigen::VectorXd z(root.cols());
    for (int i = 0; i < z.size(); ++i) z[i] = gauss(rng);
    return Eigen::VectorXd(root * z);
  };
  Disturbances d;
  d.x0.setZero(state_dim_);
  int pos = 0;
  for (const auto& root : sqrt_sigma0_) {
    d.x0.segment(pos, root.rows()) = draw(root);
    pos += static_cast<int>(root.rows());
  }
  d.w.resize(horizon_);
  for (int t = 0; t < horizon_; ++t) {
    d.w[t].setZero(state_dim_);
    pos = 0;
    for (const auto& root : sqrt_w_[t]) {
      d.w[t].segment(pos, root.rows()) = draw(root);
      pos += static_cast<int>(root.rows());
    }
  }
  return d;
}

Disturbances sample_disturbances(const LQProblem& p, std::uint64_t seed) {
  return DisturbanceSampler(p).sample(seed);
}

NoiseBasis::NoiseBasis(const BlockPartition& partition, int horizon)
    : partition_(partition), horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("noise basis: horizon must be >= 1");
  dim_ = partition_.total_dim(Axis::State) * (horizon_ + 1);
}

int NoiseBasis::offset(int node_id, int k) const {
  if (k < -1 || k >= horizon_)
    throw std::out_of_range("noise basis: symbol time out of range");
  return (k + 1) * partition_.total_dim(Axis::State) +
         partition_.offset(Axis::State, node_id);
}

int NoiseBasis::block_dim(int node_id) const {
  return partition_.dim(Axis::State, node_id);
}

}  // namespace netlqr
