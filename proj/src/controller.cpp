#include "netlqr/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace netlqr {

ControllerRealization realize(const LQProblem& p, const InfoGraph& ig,
                              const GainSchedule& ks) {
  const int T = p.horizon;
  const int m = ig.size();
  if (static_cast<int>(ks.K.size()) != T)
    throw std::invalid_argument("gain schedule horizon mismatch");
  ControllerRealization cr;
  cr.ig = ig;
  cr.partition = p.partition;
  cr.horizon = T;
  cr.K = ks.K;
  for (int t = 0; t < T; ++t) {
    if (static_cast<int>(ks.K[t].size()) != m)
      throw std::invalid_argument("gain schedule has wrong node count at t=" +
                                  std::to_string(t));
    for (int r = 0; r < m; ++r) {
      const auto& nr = ig.nodes[r];
      if (ks.K[t][r].rows() != p.partition.subset_dim(Axis::Input, nr) ||
          ks.K[t][r].cols() != p.partition.subset_dim(Axis::State, nr))
        throw std::invalid_argument("gain K at t=" + std::to_string(t) + ", r=" +
                                    node_set_name(nr) + " has wrong dimensions");
    }
  }
  cr.updates.assign(T, std::vector<std::vector<ControllerRealization::UpdateTerm>>(m));
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < m; ++r) {
      int s = ig.descendant[r];
      Eigen::MatrixXd M = submatrix(p.A[t], ig.nodes[s], ig.nodes[r]) +
                          submatrix(p.B[t], ig.nodes[s], ig.nodes[r]) * ks.K[t][r];
      cr.updates[t][s].push_back({r, std::move(M)});
    }
  return cr;
}

GainSchedule constant_gains(const std::vector<Eigen::MatrixXd>& K, int horizon) {
  GainSchedule gs;
  gs.K.assign(horizon, K);
  return gs;
}

namespace {

// zeta_0 from x_0: root injections only.
std::vector<Eigen::VectorXd> initial_zeta(const ControllerRealization& cr,
                                          const Eigen::VectorXd& x0) {
  const auto& ig = cr.ig;
  std::vector<Eigen::VectorXd> z(ig.size());
  for (int r = 0; r < ig.size(); ++r)
    z[r].setZero(cr.partition.subset_dim(Axis::State, ig.nodes[r]));
  for (std::size_t i = 0; i < ig.root.size(); ++i) {
    int s = ig.root[i];
    int id = ig.plant_ids[i];
    int off = cr.partition.offset_in_subset(Axis::State, ig.nodes[s], id);
    z[s].segment(off, cr.partition.dim(Axis::State, id)) =
        x0.segment(cr.partition.offset(Axis::State, id),
                   cr.partition.dim(Axis::State, id));
  }
  return z;
}

Eigen::VectorXd control_from_zeta(const ControllerRealization& cr, int t,
                                  const std::vector<Eigen::VectorXd>& z) {
  const auto& ig = cr.ig;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(cr.partition.total_dim(Axis::Input));
  for (int r = 0; r < ig.size(); ++r)
    add_embedded(cr.partition, Axis::Input, ig.nodes[r],
                 Eigen::VectorXd(cr.K[t][r] * z[r]), u);
  return u;
}

std::vector<Eigen::VectorXd> step_zeta(const ControllerRealization& cr, int t,
                                       const std::vector<Eigen::VectorXd>& z,
                                       const Eigen::VectorXd& wt) {
  const auto& ig = cr.ig;
  std::vector<Eigen::VectorXd> next(ig.size());
  for (int s = 0; s < ig.size(); ++s) {
    next[s].setZero(cr.partition.subset_dim(Axis::State, ig.nodes[s]));
    for (const auto& term : cr.updates[t][s]) next[s] += term.M * z[term.r];
  }
  for (std::size_t i = 0; i < ig.root.size(); ++i) {
    int s = ig.root[i];
    int id = ig.plant_ids[i];
    int off = cr.partition.offset_in_subset(Axis::State, ig.nodes[s], id);
    next[s].segment(off, cr.partition.dim(Axis::State, id)) +=
        wt.segment(cr.partition.offset(Axis::State, id),
                   cr.partition.dim(Axis::State, id));
  }
  return next;
}

double stage_cost(const LQProblem& p, int t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& u) {
  return x.dot(p.Q[t].m * x) + 2.0 * x.dot(p.S[t].m * u) + u.dot(p.R[t].m * u);
}

}  // namespace

Trajectory simulate(const ControllerRealization& cr, const LQProblem& p,
                    const Disturbances& d) {
  const int T = p.horizon;
  if (static_cast<int>(d.w.size()) != T)
    throw std::invalid_argument("disturbance trajectory has wrong horizon");
  Trajectory traj;
  traj.x.reserve(T + 1);
  traj.u.reserve(T);
  traj.zeta.reserve(T + 1);
  traj.stage_costs.reserve(T + 1);
  Eigen::VectorXd x = d.x0;
  auto z = initial_zeta(cr, x);
  traj.x.push_back(x);
  traj.zeta.push_back(z);
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd u = control_from_zeta(cr, t, z);
    traj.stage_costs.push_back(stage_cost(p, t, x, u));
    x = p.A[t].m * x + p.B[t].m * u + d.w[t];
    z = step_zeta(cr, t, z, d.w[t]);
    traj.u.push_back(std::move(u));
    traj.x.push_back(x);
    traj.zeta.push_back(z);
  }
  traj.stage_costs.push_back(x.dot(p.Qf.m * x));
  return traj;
}

double evaluate_cost(const Trajectory& traj, const LQProblem& p) {
  // Recomputed from (x, u) so the result does not depend on how the
  // trajectory was produced (centralized or distributed).
  double c = 0.0;
  for (int t = 0; t < p.horizon; ++t) c += stage_cost(p, t, traj.x[t], traj.u[t]);
  return c + traj.x[p.horizon].dot(p.Qf.m * traj.x[p.horizon]);
}

std::uint64_t rollout_seed(std::uint64_t seed, int k) {
  // splitmix64 over (seed, k): well-spread, deterministic, thread-agnostic.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(k) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

MonteCarloResult reduce_costs(std::vector<double> costs) {
  MonteCarloResult out;
  out.costs = std::move(costs);
  const int n = static_cast<int>(out.costs.size());
  double sum = 0.0;
  for (double c : out.costs) sum += c;
  out.mean = sum / n;
  double ss = 0.0;
  for (double c : out.costs) ss += (c - out.mean) * (c - out.mean);
  out.std_error = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return out;
}

}  // namespace

MonteCarloResult monte_carlo_cost(const ControllerRealization& cr,
                                  const LQProblem& p, int rollouts,
                                  std::uint64_t seed) {
  if (rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  DisturbanceSampler sampler(p);
  std::vector<double> costs(rollouts);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < rollouts; ++k) {
    auto d = sampler.sample(rollout_seed(seed, k));
    costs[k] = evaluate_cost(simulate(cr, p, d), p);
  }
  return reduce_costs(std::move(costs));
}

MonteCarloResult monte_carlo_cost_serial(const ControllerRealization& cr,
                                         const LQProblem& p, int rollouts,
                                         std::uint64_t seed) {
  if (rollouts < 1) throw std::invalid_argument("rollouts must be >= 1");
  DisturbanceSampler sampler(p);
  std::vector<double> costs(rollouts);
  for (int k = 0; k < rollouts; ++k) {
    auto d = sampler.sample(rollout_seed(seed, k));
    costs[k] = evaluate_cost(simulate(cr, p, d), p);
  }
  return reduce_costs(std::move(costs));
}

StabilityReport stability_check(const LQProblem& p, const InfoGraph& ig,
                                const std::vector<Eigen::MatrixXd>& K) {
  StabilityReport rep;
  rep.ok = true;
  for (int s = 0; s < ig.size(); ++s) {
    if (!ig.is_self_loop(s)) continue;
    const auto& ns = ig.nodes[s];
    Eigen::MatrixXd Acl =
        submatrix(p.A[0], ns, ns) + submatrix(p.B[0], ns, ns) * K[s];
    double rho = Acl.eigenvalues().cwiseAbs().maxCoeff();
    rep.ok = rep.ok && rho < 1.0;
    rep.self_loops.push_back({ns, rho});
  }
  // Stacked zeta update map: block (s,r) = A^{sr} + B^{sr} K^r for r -> s.
  std::vector<int> offs(ig.size() + 1, 0);
  for (int r = 0; r < ig.size(); ++r)
    offs[r + 1] = offs[r] + p.partition.subset_dim(Axis::State, ig.nodes[r]);
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(offs.back(), offs.back());
  for (int r = 0; r < ig.size(); ++r) {
    int s = ig.descendant[r];
    F.block(offs[s], offs[r], offs[s + 1] - offs[s], offs[r + 1] - offs[r]) =
        submatrix(p.A[0], ig.nodes[s], ig.nodes[r]) +
        submatrix(p.B[0], ig.nodes[s], ig.nodes[r]) * K[r];
  }
  rep.lifted_rho = F.eigenvalues().cwiseAbs().maxCoeff();
  rep.ok = rep.ok && rep.lifted_rho < 1.0;
  return rep;
}

NoiseMaps noise_maps(const ControllerRealization& cr, const LQProblem& p) {
  const int T = p.horizon;
  const auto& ig = cr.ig;
  const auto& part = cr.partition;
  NoiseMaps nm;
  nm.basis = NoiseBasis(part, T);
  const int nb = nm.basis.dim();
  const int N = part.total_dim(Axis::State);
  const int M = part.total_dim(Axis::Input);

  nm.zeta.assign(T + 1, {});
  nm.zeta[0].resize(ig.size());
  for (int r = 0; r < ig.size(); ++r)
    nm.zeta[0][r].setZero(part.subset_dim(Axis::State, ig.nodes[r]), nb);
  for (std::size_t i = 0; i < ig.root.size(); ++i) {
    int s = ig.root[i];
    int id = ig.plant_ids[i];
    int off = part.offset_in_subset(Axis::State, ig.nodes[s], id);
    nm.zeta[0][s]
        .block(off, nm.basis.offset(id, -1), part.dim(Axis::State, id),
               part.dim(Axis::State, id))
        .setIdentity();
  }
  for (int t = 0; t < T; ++t) {
    nm.zeta[t + 1].resize(ig.size());
    for (int s = 0; s < ig.size(); ++s) {
      nm.zeta[t + 1][s].setZero(part.subset_dim(Axis::State, ig.nodes[s]), nb);
      for (const auto& term : cr.updates[t][s])
        nm.zeta[t + 1][s] += term.M * nm.zeta[t][term.r];
    }
    for (std::size_t i = 0; i < ig.root.size(); ++i) {
      int s = ig.root[i];
      int id = ig.plant_ids[i];
      int off = part.offset_in_subset(Axis::State, ig.nodes[s], id);
      nm.zeta[t + 1][s]
          .block(off, nm.basis.offset(id, t), part.dim(Axis::State, id),
                 part.dim(Axis::State, id))
          .setIdentity();
    }
  }
  // x_t = sum_s I^{V,s} zeta_t^s;  u_t = sum_r I^{V,r} K_t^r zeta_t^r.
  nm.x.assign(T + 1, Eigen::MatrixXd::Zero(N, nb));
  nm.u.assign(T, Eigen::MatrixXd::Zero(M, nb));
  for (int t = 0; t <= T; ++t)
    for (int r = 0; r < ig.size(); ++r) {
      const auto& nr = ig.nodes[r];
      auto idx = part.subset_indices(Axis::State, nr);
      for (std::size_t k = 0; k < idx.size(); ++k)
        nm.x[t].row(idx[k]) += nm.zeta[t][r].row(static_cast<int>(k));
    }
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < ig.size(); ++r) {
      const auto& nr = ig.nodes[r];
      Eigen::MatrixXd Ku = cr.K[t][r] * nm.zeta[t][r];
      auto idx = part.subset_indices(Axis::Input, nr);
      for (std::size_t k = 0; k < idx.size(); ++k)
        nm.u[t].row(idx[k]) += Ku.row(static_cast<int>(k));
    }
  return nm;
}

double analytic_policy_cost(const LQProblem& p, const InfoGraph& ig,
                            const GainSchedule& ks) {
  const int T = p.horizon;
  const auto& part = p.partition;
  const int m = ig.size();
  std::vector<int> offs(m + 1, 0);
  for (int r = 0; r < m; ++r)
    offs[r + 1] = offs[r] + part.subset_dim(Axis::State, ig.nodes[r]);
  const int Z = offs.back();
  const int N = part.total_dim(Axis::State);
  const int M = part.total_dim(Axis::Input);

  // x = Ex * zstack; u_t = Eu_t * zstack.
  Eigen::MatrixXd Ex = Eigen::MatrixXd::Zero(N, Z);
  for (int r = 0; r < m; ++r) {
    auto idx = part.subset_indices(Axis::State, ig.nodes[r]);
    for (std::size_t k = 0; k < idx.size(); ++k)
      Ex(idx[k], offs[r] + static_cast<int>(k)) = 1.0;
  }
  // Initial covariance: roots are disjoint per-node injections, so the stack
  // covariance is block diagonal in the root blocks.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Z, Z);
  for (std::size_t i = 0; i < ig.root.size(); ++i) {
    int s = ig.root[i];
    int id = ig.plant_ids[i];
    int off = offs[s] + part.offset_in_subset(Axis::State, ig.nodes[s], id);
    int d = part.dim(Axis::State, id);
    P.block(off, off, d, d) = p.Sigma0[i];
  }
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd Eu = Eigen::MatrixXd::Zero(M, Z);
    for (int r = 0; r < m; ++r) {
      auto idx = part.subset_indices(Axis::Input, ig.nodes[r]);
      Eigen::MatrixXd Kr = ks.K[t][r];
      for (std::size_t k = 0; k < idx.size(); ++k)
        Eu.block(idx[k], offs[r], 1, offs[r + 1] - offs[r]) =
            Kr.row(static_cast<int>(k));
    }
    Eigen::MatrixXd xP = Ex * P;
    Eigen::MatrixXd uP = Eu * P;
    cost += (p.Q[t].m * xP * Ex.transpose()).trace() +
            2.0 * (p.S[t].m * uP * Ex.transpose()).trace() +
            (p.R[t].m * uP * Eu.transpose()).trace();
    // zstack_{t+1} = F zstack + G w_t.
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(Z, Z);
    for (int r = 0; r < m; ++r) {
      int s = ig.descendant[r];
      F.block(offs[s], offs[r], offs[s + 1] - offs[s], offs[r + 1] - offs[r]) =
          submatrix(p.A[t], ig.nodes[s], ig.nodes[r]) +
          submatrix(p.B[t], ig.nodes[s], ig.nodes[r]) * ks.K[t][r];
    }
    P = F * P * F.transpose();
    for (std::size_t i = 0; i < ig.root.size(); ++i) {
      int s = ig.root[i];
      int id = ig.plant_ids[i];
      int off = offs[s] + part.offset_in_subset(Axis::State, ig.nodes[s], id);
      int d = part.dim(Axis::State, id);
      P.block(off, off, d, d) += p.W[t][i];
    }
    P = 0.5 * (P + P.transpose());
  }
  cost += (p.Qf.m * Ex * P * Ex.transpose()).trace();
  return cost;
}

}  // namespace netlqr
