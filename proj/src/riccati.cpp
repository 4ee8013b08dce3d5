#include "netlqr/riccati.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace netlqr {

namespace {

struct StepResult {
  Eigen::MatrixXd X, K, Omega, Gamma;
};

// One backward step of the coupled recursion at node r given X_{t+1}^s of its
// descendant s. Uses an LLT solve for Omega^{-1}; the X update keeps the
// K-form so no explicit inverse is ever formed.
StepResult riccati_step(const LQProblem& p, int t, const NodeSet& r,
                        const NodeSet& s, const Eigen::MatrixXd& Xs) {
  Eigen::MatrixXd Asr = submatrix(p.A[t], s, r);
  Eigen::MatrixXd Bsr = submatrix(p.B[t], s, r);
  Eigen::MatrixXd Qrr = submatrix(p.Q[t], r, r);
  Eigen::MatrixXd Srr = submatrix(p.S[t], r, r);
  Eigen::MatrixXd Rrr = submatrix(p.R[t], r, r);

  StepResult out;
  out.Omega = Rrr + Bsr.transpose() * Xs * Bsr;
  out.Omega = 0.5 * (out.Omega + out.Omega.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(out.Omega);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("Omega at t=" + std::to_string(t) + ", r=" +
                             node_set_name(r) +
                             " is not positive definite (is R positive definite?)");
  Eigen::MatrixXd cross = Srr + Asr.transpose() * Xs * Bsr;  // z-v coupling
  out.K = -llt.solve(cross.transpose());
  Eigen::MatrixXd X =
      Qrr + Asr.transpose() * Xs * Asr - out.K.transpose() * out.Omega * out.K;
  out.X = 0.5 * (X + X.transpose());

  const int nz = static_cast<int>(Qrr.rows());
  const int nv = static_cast<int>(Rrr.rows());
  out.Gamma.resize(nz + nv, nz + nv);
  out.Gamma.topLeftCorner(nz, nz) = Qrr + Asr.transpose() * Xs * Asr;
  out.Gamma.topRightCorner(nz, nv) = cross;
  out.Gamma.bottomLeftCorner(nv, nz) = cross.transpose();
  out.Gamma.bottomRightCorner(nv, nv) = out.Omega;
  return out;
}

double noise_cost_at(const Eigen::MatrixXd& Xs, const LQProblem& p,
                     const InfoGraph& ig, int root_idx, int node_idx,
                     const Eigen::MatrixXd& cov) {
  const NodeSet& s = ig.nodes[root_idx];
  Eigen::MatrixXd blk =
      diag_block(Xs, p.partition, s, ig.plant_ids[node_idx]);
  return (blk * cov).trace();
}

}  // namespace

Eigen::MatrixXd diag_block(const Eigen::MatrixXd& Xs, const BlockPartition& part,
                           const NodeSet& s, int node_id) {
  int off = part.offset_in_subset(Axis::State, s, node_id);
  int d = part.dim(Axis::State, node_id);
  return Xs.block(off, off, d, d);
}

std::pair<ValueSchedule, GainSchedule> finite_horizon(const LQProblem& p,
                                                      const InfoGraph& ig) {
  const int T = p.horizon;
  const int m = ig.size();
  ValueSchedule vs;
  GainSchedule gs;
  vs.X.assign(T + 1, {});
  vs.Omega.assign(T, {});
  vs.Gamma.assign(T, {});
  vs.c.assign(T + 1, 0.0);
  gs.K.assign(T, {});
  vs.X[T].reserve(m);
  for (int r = 0; r < m; ++r)
    vs.X[T].push_back(submatrix(p.Qf, ig.nodes[r], ig.nodes[r]));
  for (int t = T - 1; t >= 0; --t) {
    vs.X[t].resize(m);
    vs.Omega[t].resize(m);
    vs.Gamma[t].resize(m);
    gs.K[t].resize(m);
    for (int r = 0; r < m; ++r) {
      int s = ig.descendant[r];
      auto step = riccati_step(p, t, ig.nodes[r], ig.nodes[s], vs.X[t + 1][s]);
      vs.X[t][r] = std::move(step.X);
      vs.Omega[t][r] = std::move(step.Omega);
      vs.Gamma[t][r] = std::move(step.Gamma);
      gs.K[t][r] = std::move(step.K);
    }
    // c_t = c_{t+1} + sum over roots of Tr((X_{t+1}^{root(i)})^{ii} W_t^i).
    double inject = 0.0;
    for (std::size_t i = 0; i < ig.root.size(); ++i)
      inject += noise_cost_at(vs.X[t + 1][ig.root[i]], p, ig, ig.root[i],
                              static_cast<int>(i), p.W[t][i]);
    vs.c[t] = vs.c[t + 1] + inject;
  }
  return {std::move(vs), std::move(gs)};
}

double optimal_cost(const ValueSchedule& vs, const LQProblem& p,
                    const InfoGraph& ig) {
  double v = 0.0;
  for (std::size_t i = 0; i < ig.root.size(); ++i)
    v += noise_cost_at(vs.X[0][ig.root[i]], p, ig, ig.root[i],
                       static_cast<int>(i), p.Sigma0[i]);
  for (int t = 0; t < p.horizon; ++t)
    for (std::size_t i = 0; i < ig.root.size(); ++i)
      v += noise_cost_at(vs.X[t + 1][ig.root[i]], p, ig, ig.root[i],
                         static_cast<int>(i), p.W[t][i]);
  return v;
}

SteadyState steady_state(const LQProblem& p, const InfoGraph& ig, double tol,
                         int max_iter) {
  if (!p.time_invariant)
    throw std::invalid_argument("steady_state: problem must be time-invariant");
  const int m = ig.size();
  SteadyState out;
  out.X.assign(m, {});
  out.K.assign(m, {});

  // Self-loop nodes first: iterate X <- step(X) to the fixpoint.
  for (int s = 0; s < m; ++s) {
    if (!ig.is_self_loop(s)) continue;
    const NodeSet& ns = ig.nodes[s];
    Eigen::MatrixXd X = submatrix(p.Qf, ns, ns);
    int it = 0;
    double delta = 0.0;
    for (;; ++it) {
      if (it >= max_iter)
        throw std::runtime_error(
            "steady_state: self-loop " + node_set_name(ns) + " did not converge in " +
            std::to_string(max_iter) + " iterations (last delta " +
            std::to_string(delta) + ")");
      auto step = riccati_step(p, 0, ns, ns, X);
      delta = (step.X - X).cwiseAbs().maxCoeff();
      X = std::move(step.X);
      if (delta < tol) break;
    }
    // Gains from the converged value, not the second-to-last iterate.
    out.K[s] = riccati_step(p, 0, ns, ns, X).K;
    out.X[s] = std::move(X);
    out.iterations = std::max(out.iterations, it + 1);
    out.final_delta = std::max(out.final_delta, delta);
  }
  // Remaining nodes: one extra backward application per chain edge, walking
  // from converged descendants toward the chain heads.
  std::vector<bool> done(m, false);
  for (int s = 0; s < m; ++s) done[s] = ig.is_self_loop(s);
  for (bool progress = true; progress;) {
    progress = false;
    for (int r = 0; r < m; ++r) {
      if (done[r] || !done[ig.descendant[r]]) continue;
      int s = ig.descendant[r];
      auto step = riccati_step(p, 0, ig.nodes[r], ig.nodes[s], out.X[s]);
      out.X[r] = std::move(step.X);
      out.K[r] = std::move(step.K);
      done[r] = true;
      progress = true;
    }
  }
  for (int r = 0; r < m; ++r)
    if (!done[r])
      throw std::logic_error("steady_state: chain from " +
                             node_set_name(ig.nodes[r]) + " never reaches a self-loop");
  // Steady-state cost rate: noise injections priced by the root values.
  for (std::size_t i = 0; i < ig.root.size(); ++i) {
    Eigen::MatrixXd blk = diag_block(out.X[ig.root[i]], p.partition,
                                     ig.nodes[ig.root[i]], ig.plant_ids[i]);
    out.average_cost += (blk * p.W[0][i]).trace();
  }
  return out;
}

std::string SsConditionReport::message() const {
  std::string out = ok ? "conditions hold" : "conditions FAILED";
  for (const auto& c : checks) {
    out += "; " + node_set_name(c.s) + ": stabilizable=" +
           (c.stabilizable ? "yes" : "NO") + ", full column rank=" +
           (c.full_column_rank ? "yes" : "NO");
  }
  if (!grid_note.empty()) out += " (" + grid_note + ")";
  return out;
}

SsConditionReport check_ss_conditions(const LQProblem& p, const InfoGraph& ig,
                                      int theta_grid) {
  if (!p.time_invariant)
    throw std::invalid_argument("check_ss_conditions: problem must be time-invariant");
  SsConditionReport rep;
  rep.theta_grid = theta_grid;
  rep.grid_note = "rank condition sampled at " + std::to_string(theta_grid) +
                  " grid points, not proven over the continuum";
  rep.ok = true;
  for (int s = 0; s < ig.size(); ++s) {
    if (!ig.is_self_loop(s)) continue;
    const NodeSet& ns = ig.nodes[s];
    Eigen::MatrixXd A = submatrix(p.A[0], ns, ns);
    Eigen::MatrixXd B = submatrix(p.B[0], ns, ns);
    const int nx = static_cast<int>(A.rows());
    const int nu = static_cast<int>(B.cols());
    SsConditionReport::SelfLoopCheck chk;
    chk.s = ns;

    // PBH: for every eigenvalue with |lambda| >= 1, [A - lambda I, B] must
    // have full row rank.
    chk.stabilizable = true;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    for (int k = 0; k < nx; ++k) {
      std::complex<double> lam = es.eigenvalues()[k];
      if (std::abs(lam) < 1.0 - 1e-12) continue;
      Eigen::MatrixXcd pbh(nx, nx + nu);
      pbh << A.cast<std::complex<double>>() -
                 lam * Eigen::MatrixXcd::Identity(nx, nx),
          B.cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
      double smax = svd.singularValues()(0);
      double smin = svd.singularValues()(nx - 1);
      if (smin <= 1e-8 * std::max(smax, 1.0)) chk.stabilizable = false;
    }

    // Factor the cost block [[Q,S],[S',R]]^{ss} = [C D]'[C D].
    Eigen::MatrixXd H(nx + nu, nx + nu);
    H << submatrix(p.Q[0], ns, ns), submatrix(p.S[0], ns, ns),
        submatrix(p.S[0], ns, ns).transpose(), submatrix(p.R[0], ns, ns);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hes(0.5 * (H + H.transpose()));
    Eigen::MatrixXd CD = hes.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                         hes.eigenvectors().transpose();
    Eigen::MatrixXd C = CD.leftCols(nx);
    Eigen::MatrixXd D = CD.rightCols(nu);

    chk.full_column_rank = true;
    chk.rank_margin = std::numeric_limits<double>::infinity();
    const int rows = nx + static_cast<int>(CD.rows());
    Eigen::MatrixXcd M(rows, nx + nu);
    for (int g = 0; g < theta_grid; ++g) {
      double theta = 2.0 * std::numbers::pi * g / theta_grid;
      std::complex<double> z = std::polar(1.0, theta);
      M.topLeftCorner(nx, nx) = A.cast<std::complex<double>>() -
                                z * Eigen::MatrixXcd::Identity(nx, nx);
      M.topRightCorner(nx, nu) = B.cast<std::complex<double>>();
      M.bottomLeftCorner(CD.rows(), nx) = C.cast<std::complex<double>>();
      M.bottomRightCorner(CD.rows(), nu) = D.cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
      double smax = svd.singularValues()(0);
      double smin = svd.singularValues()(nx + nu - 1);
      double margin = smax > 0 ? smin / smax : 0.0;
      chk.rank_margin = std::min(chk.rank_margin, margin);
      if (smin <= 1e-8 * smax) chk.full_column_rank = false;
    }
    rep.ok = rep.ok && chk.stabilizable && chk.full_column_rank;
    rep.checks.push_back(std::move(chk));
  }
  return rep;
}

std::vector<std::vector<double>> trace_table(const ValueSchedule& vs) {
  std::vector<std::vector<double>> rows;
  rows.reserve(vs.X.size());
  for (const auto& per_r : vs.X) {
    std::vector<double> row;
    row.reserve(per_r.size());
    for (const auto& X : per_r) row.push_back(X.trace());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace netlqr
