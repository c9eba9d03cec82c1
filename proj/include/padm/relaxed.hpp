#ifndef PADM_RELAXED_HPP_
#define PADM_RELAXED_HPP_

#include "padm/sim.hpp"

namespace padm {

/// Settings for the projected-gradient solver of the relaxed subproblem.
struct RelaxedSolveOptions {
  double stationarity_tol = 1e-6;
  int max_iterations = 5000;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double initial_step = 1.0;

  // Either block may be frozen at its warm-start value.
  bool optimize_u = true;
  bool optimize_w = true;

  void validate() const;
};

struct RelaxedSolveResult {
  ContinuousControlPath u;
  RelaxedControlPath w;
  double value;          ///< penalized objective at (u, w)
  double initial_value;  ///< penalized objective at the warm start
  double stationarity;   ///< max-norm of x - P(x - grad)
  int iterations;
  bool converged;
};

/// Euclidean projection onto the probability simplex (sort and threshold).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& row);

/// Minimizes Psi(u, w) + rho * int sum_i w_i |r^i - v_tilde|_1 over box
/// constrained u and simplex constrained w, starting from (u0, w0).
///
/// Spectral projected gradient with monotone Armijo backtracking: the trial
/// step length starts at options.initial_step and follows Barzilai-Borwein
/// estimates afterwards. Every iterate is feasible and the value sequence is
/// non-increasing. Returns the best iterate with converged = false when the
/// iteration budget runs out.
RelaxedSolveResult solve_relaxed_poc(const SwitchedSystem& system, const TimeGrid& grid,
                                     const BinaryControlPath& v_tilde, double rho,
                                     const ContinuousControlPath& u0, const RelaxedControlPath& w0,
                                     const RelaxedSolveOptions& options = {});

}  // namespace padm

#endif  // PADM_RELAXED_HPP_
