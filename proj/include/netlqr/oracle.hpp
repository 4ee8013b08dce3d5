#pragma once

#include "netlqr/controller.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace netlqr {

// Raised when the disturbance-feedback QP would exceed the decision-variable
// budget. The oracle is a desk-scale certification tool, not a solver; it
// refuses rather than thrash.
class GuardrailError : public std::runtime_error {
 public:
  GuardrailError(const std::string& what, int dims)
      : std::runtime_error(what), decision_dims_(dims) {}
  int decision_dims() const { return decision_dims_; }

 private:
  int decision_dims_ = 0;
};

// Optimum over all linear disturbance-feedback policies u_t = Theta_t nu,
// nu = [x_0; w_0; ...; w_{T-1}], with the (input node i, symbol w_{k-1}^j)
// block of Theta_t free only when 0 <= k <= t - D^{ij} — exactly the
// policies whose u_t^i uses information that has had time to reach i.
struct OracleResult {
  double cost = 0.0;
  std::vector<Eigen::MatrixXd> theta;  // [t]: input_dim x basis dim
  NoiseBasis basis;
  int decision_dims = 0;
  // Of the normal-equations matrix (the policy Hessian up to a factor 2).
  double condition_number = 0.0;
  // Hessian singular to tolerance; the minimum-norm optimum was returned.
  // Cannot happen when R and all noise covariances are positive definite.
  bool min_norm_fallback = false;
};

// The expected cost is assembled exactly from the noise second moments
// (never sampled) as a linear least-squares residual, and minimized through
// the normal equations with one round of iterative refinement.
OracleResult brute_force_solve(const LQProblem& p, const DelayMatrix& D,
                               int max_decision_dims = 2000);

struct CompareReport {
  double synthesized_cost = 0.0;
  double oracle_cost = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  // Largest input-response difference over unit impulses in every noise
  // coordinate, between the synthesized controller and the oracle policy.
  double max_map_deviation = 0.0;
  // Map comparison is meaningful only when the QP optimum is unique.
  bool maps_compared = false;
  std::string summary() const;
};

// Both sides already solved; this only measures their agreement.
CompareReport compare(const LQProblem& p, const InfoGraph& ig,
                      const GainSchedule& ks, double synthesized_cost,
                      const OracleResult& oracle);

}  // namespace netlqr
