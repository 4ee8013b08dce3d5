#include "support/fixtures.hpp"

#include "netlqr/graph.hpp"

#include <algorithm>
#include <numeric>

namespace fix {

using namespace netlqr;

std::string data_path(const std::string& name) {
  return std::string(NETLQR_DATA_DIR) + "/" + name;
}

NetworkGraph example1_graph() {
  NetworkGraph g;
  g.nodes = {1, 2, 3};
  g.edges = {{1, 2, 1}, {2, 1, 1}, {2, 3, 0}};
  return g;
}

LQProblem example1(int horizon) {
  Eigen::MatrixXd A(3, 3), B(3, 3);
  A << 0.4, 0.3, 0.0,
      -0.2, 0.5, 0.0,
       0.1, -0.3, 0.6;
  B << 1.0, 0.0, 0.0,
       0.2, 1.0, 0.0,
       0.0, 0.3, 1.0;
  const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<Eigen::MatrixXd> unit(3, Eigen::MatrixXd::Identity(1, 1));
  const BlockPartition part({1, 2, 3}, {1, 1, 1}, {1, 1, 1});
  return make_time_invariant(example1_graph(), part, horizon, A, B, I3, I3,
                             Eigen::MatrixXd::Zero(3, 3), I3, unit, unit);
}

NetworkGraph example8_graph() {
  NetworkGraph g;
  g.nodes = {1, 2, 3, 4};
  g.edges = {{1, 2, 1}, {1, 3, 1}, {2, 4, 1}, {3, 4, 1}, {4, 3, 0}};
  return g;
}

LQProblem example8(int horizon) {
  Eigen::MatrixXd A(4, 4), B(4, 4), Q(4, 4);
  A << 3, 0, 0, 0,
       2, 3, 0, 0,
       1, 2, 2, 1,
       0, 1, 3, 2;
  B << 1, 0, 0, 0,
       2, 3, 0, 0,
       0, 1, 2, 2,
       0, 0, 1, 3;
  Q << 8, -1, -1, -1,
      -1, 8, -1, -1,
      -1, -1, 8, -1,
      -1, -1, -1, 8;
  const Eigen::MatrixXd S = -Eigen::MatrixXd::Ones(4, 4);
  const std::vector<Eigen::MatrixXd> unit(4, Eigen::MatrixXd::Identity(1, 1));
  const BlockPartition part({1, 2, 3, 4}, {1, 1, 1, 1}, {1, 1, 1, 1});
  return make_time_invariant(example8_graph(), part, horizon, A, B, Q, Q, S, Q,
                             unit, unit);
}

LQProblem relay_pair(int horizon) {
  NetworkGraph g;
  g.nodes = {1, 2};
  g.edges = {{1, 2, 2}};
  Eigen::MatrixXd A(2, 2), Q(2, 2);
  A << 0.7, 0.0,
       0.0, 0.5;  // A^{21} = 0: the only path 1 -> 2 has delay 2
  Q << 2.0, 0.5,
       0.5, 1.0;
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const std::vector<Eigen::MatrixXd> unit(2, Eigen::MatrixXd::Identity(1, 1));
  const BlockPartition part({1, 2}, {1, 1}, {1, 1});
  return make_time_invariant(g, part, horizon, A, I2, Q, I2,
                             Eigen::MatrixXd::Zero(2, 2), Q, unit, unit);
}

LQProblem single_node(int horizon, int dim) {
  NetworkGraph g;
  g.nodes = {1};
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  const BlockPartition part({1}, {dim}, {dim});
  return make_time_invariant(g, part, horizon, I, I, I, I,
                             Eigen::MatrixXd::Zero(dim, dim), I, {I}, {I});
}

NetworkGraph random_graph(std::mt19937_64& rng, int n, double edge_prob,
                          int max_delay) {
  NetworkGraph g;
  for (int i = 1; i <= n; ++i) g.nodes.push_back(i);
  std::vector<int> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> delay_pick(1, std::max(1, max_delay));
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      if (i == j || coin(rng) > edge_prob) continue;
      // Zero-delay edges only go up in rank, so delay-0 cycles are impossible.
      const bool forward = rank[i - 1] < rank[j - 1];
      const int delay = forward && coin(rng) < 0.5 ? 0 : delay_pick(rng);
      g.edges.push_back({i, j, delay});
    }
  }
  return g;
}

LQProblem random_problem(std::mt19937_64& rng, const RandomOptions& opt) {
  std::uniform_int_distribution<int> node_pick(opt.min_nodes, opt.max_nodes);
  std::uniform_int_distribution<int> dim_pick(1, opt.max_dim);
  std::uniform_int_distribution<int> t_pick(opt.min_horizon, opt.max_horizon);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);

  const int n = node_pick(rng);
  const NetworkGraph g = random_graph(rng, n, opt.edge_prob, opt.max_delay);
  const DelayMatrix D = delay_matrix(g);

  std::vector<int> ids, sdims, idims;
  for (int i = 1; i <= n; ++i) {
    ids.push_back(i);
    sdims.push_back(dim_pick(rng));
    idims.push_back(dim_pick(rng));
  }
  const BlockPartition part(ids, sdims, idims);
  const int N = part.total_dim(Axis::State);
  const int M = part.total_dim(Axis::Input);

  auto random_matrix = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c; ++b) m(a, b) = entry(rng);
    return m;
  };
  // Zero out dynamics blocks whenever information is too slow to carry them.
  auto mask = [&](Eigen::MatrixXd m, Axis col_axis) {
    for (int i : ids)
      for (int j : ids)
        if (D.at(i, j) >= 2)
          m.block(part.offset(Axis::State, i), part.offset(col_axis, j),
                  part.dim(Axis::State, i), part.dim(col_axis, j))
              .setZero();
    return m;
  };

  const Eigen::MatrixXd A = mask(random_matrix(N, N), Axis::State);
  const Eigen::MatrixXd B = mask(random_matrix(N, M), Axis::Input);

  // Gram-plus-ridge stage cost: strictly convex, which keeps the policy
  // optimum unique for the oracle comparisons.
  const Eigen::MatrixXd F = random_matrix(N + M, N + M);
  const Eigen::MatrixXd H =
      F.transpose() * F + 0.1 * Eigen::MatrixXd::Identity(N + M, N + M);
  const Eigen::MatrixXd Q = H.topLeftCorner(N, N);
  const Eigen::MatrixXd S = H.topRightCorner(N, M);
  const Eigen::MatrixXd R = H.bottomRightCorner(M, M);
  const Eigen::MatrixXd Gf = random_matrix(N, N);
  const Eigen::MatrixXd Qf =
      Gf.transpose() * Gf + 0.1 * Eigen::MatrixXd::Identity(N, N);

  std::vector<Eigen::MatrixXd> W, Sigma0;
  for (int k = 0; k < n; ++k) {
    const int d = sdims[k];
    const Eigen::MatrixXd C1 = random_matrix(d, d);
    const Eigen::MatrixXd C2 = random_matrix(d, d);
    W.push_back(C1.transpose() * C1 + 0.1 * Eigen::MatrixXd::Identity(d, d));
    Sigma0.push_back(C2.transpose() * C2 +
                     0.1 * Eigen::MatrixXd::Identity(d, d));
  }
  return make_time_invariant(g, part, t_pick(rng), A, B, Q, R, S, Qf, W,
                             Sigma0);
}

ClassicalSolution classical_riccati(const LQProblem& p) {
  const int T = p.horizon;
  const int N = p.state_dim();
  ClassicalSolution out;
  out.P.assign(T + 1, Eigen::MatrixXd());
  out.K.assign(T, Eigen::MatrixXd());
  out.P[T] = p.Qf.m;
  for (int t = T - 1; t >= 0; --t) {
    const Eigen::MatrixXd& A = p.A[t].m;
    const Eigen::MatrixXd& B = p.B[t].m;
    const Eigen::MatrixXd G = p.R[t].m + B.transpose() * out.P[t + 1] * B;
    const Eigen::MatrixXd H = p.S[t].m + A.transpose() * out.P[t + 1] * B;
    out.K[t] = -G.inverse() * H.transpose();
    Eigen::MatrixXd P = p.Q[t].m + A.transpose() * out.P[t + 1] * A -
                        H * G.inverse() * H.transpose();
    out.P[t] = 0.5 * (P + P.transpose());
  }
  Eigen::MatrixXd Sigma0 = Eigen::MatrixXd::Zero(N, N);
  for (int k = 0; k < p.partition.node_count(); ++k) {
    const int id = p.partition.node_ids()[k];
    const int o = p.partition.offset(Axis::State, id);
    const int d = p.partition.dim(Axis::State, id);
    Sigma0.block(o, o, d, d) = p.Sigma0[k];
  }
  out.v0 = (out.P[0] * Sigma0).trace();
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < p.partition.node_count(); ++k) {
      const int id = p.partition.node_ids()[k];
      const int o = p.partition.offset(Axis::State, id);
      const int d = p.partition.dim(Axis::State, id);
      out.v0 += (out.P[t + 1].block(o, o, d, d) * p.W[t][k]).trace();
    }
  }
  return out;
}

}  // namespace fix
