#ifndef PADM_SIM_HPP_
#define PADM_SIM_HPP_

#include "padm/core.hpp"

#include <string>
#include <vector>

namespace padm {

enum class Integrator { kRk4, kForwardEuler };

/// Thrown when the forward sweep produces a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int interval) : Error(what), interval_(interval) {}
  int interval() const { return interval_; }

 private:
  int interval_;
};

/**
 * Switched system y' = f(t, y, u, r^i) in Mayer form.
 *
 * The full right-hand side (linear part included) is supplied per mode r^i of
 * the mode table; integral costs are expected as extra quadrature states so
 * that the objective is Phi(y(T)). Implementations must be immutable.
 */
class SwitchedSystem {
 public:
  virtual ~SwitchedSystem() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual const ModeTable& modes() const = 0;
  virtual ControlBounds control_bounds() const;
  virtual Eigen::VectorXd initial_state() const = 0;

  /// dy = f(t, y, u, r^mode)
  virtual void rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                   Eigen::VectorXd& dy) const = 0;

  /// Dense partial derivatives of f with respect to y and u.
  virtual void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                         Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const = 0;

  /// Adds lambda^T df/dy to gy and lambda^T df/du to gu. The default forms
  /// the dense Jacobians; large systems should override.
  virtual void vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                   const Eigen::VectorXd& lambda, Eigen::VectorXd& gy, Eigen::VectorXd& gu) const;

  virtual double terminal_cost(const Eigen::VectorXd& y) const = 0;
  virtual Eigen::VectorXd terminal_gradient(const Eigen::VectorXd& y) const = 0;

  virtual Integrator integrator() const { return Integrator::kRk4; }

  virtual std::vector<std::string> state_names() const;
  virtual std::vector<std::string> control_names() const;
};

/// Node values of the state on a grid; row 0 is the initial state.
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd states;

  Eigen::VectorXd final_state() const { return states.row(states.rows() - 1).transpose(); }
};

/// One macro step of the convexified field sum_i w_i f(., ., r^i) with u and
/// w held constant, using the system's integrator.
Eigen::VectorXd advance_state(const SwitchedSystem& system, double t, double h,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& w);

Trajectory integrate(const SwitchedSystem& system, const TimeGrid& grid,
                     const ContinuousControlPath& u, const RelaxedControlPath& w);

/// Phi at the final node.
double objective(const SwitchedSystem& system, const Trajectory& trajectory);

/// step * sum_k sum_i w_{k,i} |r^i - v_tilde_k|_1, the closed-form value of
/// the penalty state z(T) for unit weight.
double weighted_penalty(const RelaxedControlPath& w, const BinaryControlPath& v_tilde,
                        const ModeTable& modes);

/// Psi(u, w) + rho * weighted_penalty(w, v_tilde).
double penalized_objective(const SwitchedSystem& system, const TimeGrid& grid,
                           const ContinuousControlPath& u, const RelaxedControlPath& w,
                           const BinaryControlPath& v_tilde, double rho);

struct PenalizedGradient {
  double value = 0.0;
  Eigen::MatrixXd u;  ///< n_intervals x m_u
  Eigen::MatrixXd w;  ///< n_intervals x n_modes
};

/// Value and exact gradient of the discretized penalized objective by a
/// reverse sweep through the integrator stages.
PenalizedGradient adjoint_gradient(const SwitchedSystem& system, const TimeGrid& grid,
                                   const ContinuousControlPath& u, const RelaxedControlPath& w,
                                   const BinaryControlPath& v_tilde, double rho);

/// Raw-matrix variants used inside the solvers (no SOS1/box validation).
double penalized_objective(const SwitchedSystem& system, const TimeGrid& grid,
                           const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& penalty_weights, double rho);
PenalizedGradient adjoint_gradient(const SwitchedSystem& system, const TimeGrid& grid,
                                   const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                                   const Eigen::MatrixXd& penalty_weights, double rho);

/// Matrix of |r^i - v_tilde_k|_1, n_intervals x n_modes.
Eigen::MatrixXd penalty_weights(const BinaryControlPath& v_tilde, const ModeTable& modes);

}  // namespace padm

#endif  // PADM_SIM_HPP_
