#include "padm/sim.hpp"

#include <cmath>

namespace padm {

ControlBounds SwitchedSystem::control_bounds() const {
  return ControlBounds{Eigen::VectorXd::Zero(control_dim()), Eigen::VectorXd::Zero(control_dim())};
}

void SwitchedSystem::vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                         const Eigen::VectorXd& lambda, Eigen::VectorXd& gy,
                         Eigen::VectorXd& gu) const {
  Eigen::MatrixXd dfdy(state_dim(), state_dim());
  Eigen::MatrixXd dfdu(state_dim(), control_dim());
  jacobians(t, y, u, mode, dfdy, dfdu);
  gy.noalias() += dfdy.transpose() * lambda;
  if (control_dim() > 0) gu.noalias() += dfdu.transpose() * lambda;
}

std::vector<std::string> SwitchedSystem::state_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < state_dim(); ++i) names.push_back("y" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> SwitchedSystem::control_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < control_dim(); ++i) names.push_back("u" + std::to_string(i + 1));
  return names;
}

namespace {

void check_shapes(const SwitchedSystem& system, const TimeGrid& grid, const Eigen::MatrixXd& u,
                  const Eigen::MatrixXd& w) {
  if (u.rows() != grid.n_intervals() || u.cols() != system.control_dim()) {
    throw DimensionError("continuous control shape does not match grid/system");
  }
  if (w.rows() != grid.n_intervals() || w.cols() != system.modes().n_modes()) {
    throw DimensionError("relaxed control shape does not match grid/mode table");
  }
}

// Convexified field sum_i w_i f(t, y, u, r^i); zero-weight modes are skipped.
void convexified_rhs(const SwitchedSystem& system, double t, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                     Eigen::VectorXd& scratch, Eigen::VectorXd& out) {
  out.setZero(y.size());
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    system.rhs(t, y, u, i, scratch);
    if (w[i] == 1.0) {
      out += scratch;
    } else {
      out += w[i] * scratch;
    }
  }
}

struct Stages {
  Eigen::VectorXd y[4];
  Eigen::VectorXd k[4];
};

void rk4_stages(const SwitchedSystem& system, double t, double h, const Eigen::VectorXd& y,
                const Eigen::VectorXd& u, const Eigen::VectorXd& w, Eigen::VectorXd& scratch,
                Stages& s) {
  s.y[0] = y;
  convexified_rhs(system, t, s.y[0], u, w, scratch, s.k[0]);
  s.y[1] = y + 0.5 * h * s.k[0];
  convexified_rhs(system, t + 0.5 * h, s.y[1], u, w, scratch, s.k[1]);
  s.y[2] = y + 0.5 * h * s.k[1];
  convexified_rhs(system, t + 0.5 * h, s.y[2], u, w, scratch, s.k[2]);
  s.y[3] = y + h * s.k[2];
  convexified_rhs(system, t + h, s.y[3], u, w, scratch, s.k[3]);
}

Eigen::MatrixXd forward_states(const SwitchedSystem& system, const TimeGrid& grid,
                               const Eigen::MatrixXd& u, const Eigen::MatrixXd& w) {
  const int n = grid.n_intervals();
  Eigen::MatrixXd states(n + 1, system.state_dim());
  Eigen::VectorXd y = system.initial_state();
  if (y.size() != system.state_dim()) {
    throw DimensionError("initial state length differs from state_dim");
  }
  states.row(0) = y.transpose();
  for (int k = 0; k < n; ++k) {
    y = advance_state(system, grid.node(k), grid.step(), y, u.row(k).transpose(),
                      w.row(k).transpose());
    if (!y.allFinite()) {
      throw DivergenceError("non-finite state in interval " + std::to_string(k), k);
    }
    states.row(k + 1) = y.transpose();
  }
  return states;
}

// Backpropagates one stage: given the cotangent bk of K = F(t, Y), adds the
// contributions to grad_u / grad_w and returns the cotangent of Y.
void stage_adjoint(const SwitchedSystem& system, double t, const Eigen::VectorXd& y_stage,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& w, const Eigen::VectorXd& bk,
                   Eigen::VectorXd& scratch, Eigen::VectorXd& scaled, Eigen::VectorXd& gy,
                   Eigen::VectorXd& gu, Eigen::VectorXd& grad_w) {
  gy.setZero(y_stage.size());
  for (int i = 0; i < w.size(); ++i) {
    system.rhs(t, y_stage, u, i, scratch);
    grad_w[i] += scratch.dot(bk);
    if (w[i] == 0.0) continue;
    scaled = w[i] * bk;
    system.vjp(t, y_stage, u, i, scaled, gy, gu);
  }
}

}  // namespace

Eigen::VectorXd advance_state(const SwitchedSystem& system, double t, double h,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& w) {
  Eigen::VectorXd scratch(y.size());
  if (system.integrator() == Integrator::kForwardEuler) {
    Eigen::VectorXd k1;
    convexified_rhs(system, t, y, u, w, scratch, k1);
    return y + h * k1;
  }
  Stages s;
  rk4_stages(system, t, h, y, u, w, scratch, s);
  return y + (h / 6.0) * (s.k[0] + 2.0 * s.k[1] + 2.0 * s.k[2] + s.k[3]);
}

Trajectory integrate(const SwitchedSystem& system, const TimeGrid& grid,
                     const ContinuousControlPath& u, const RelaxedControlPath& w) {
  if (!(u.grid() == grid) || !(w.grid() == grid)) {
    throw DimensionError("integrate: control grids differ from simulation grid");
  }
  check_shapes(system, grid, u.values(), w.values());
  return Trajectory{grid, forward_states(system, grid, u.values(), w.values())};
}

double objective(const SwitchedSystem& system, const Trajectory& trajectory) {
  const double value = system.terminal_cost(trajectory.final_state());
  if (!std::isfinite(value)) {
    throw DivergenceError("non-finite objective", trajectory.grid.n_intervals() - 1);
  }
  return value;
}

Eigen::MatrixXd penalty_weights(const BinaryControlPath& v_tilde, const ModeTable& modes) {
  if (v_tilde.n_components() != modes.n_switches()) {
    throw DimensionError("penalty_weights: component count differs from mode table");
  }
  Eigen::MatrixXd p(v_tilde.n_intervals(), modes.n_modes());
  for (int k = 0; k < v_tilde.n_intervals(); ++k) {
    for (int i = 0; i < modes.n_modes(); ++i) {
      p(k, i) = modes.distance(i, v_tilde.values().row(k));
    }
  }
  return p;
}

double weighted_penalty(const RelaxedControlPath& w, const BinaryControlPath& v_tilde,
                        const ModeTable& modes) {
  if (!(w.grid() == v_tilde.grid())) throw DimensionError("weighted_penalty: grids differ");
  if (w.n_modes() != modes.n_modes()) {
    throw DimensionError("weighted_penalty: mode count differs from table");
  }
  return w.grid().step() * w.values().cwiseProduct(penalty_weights(v_tilde, modes)).sum();
}

double penalized_objective(const SwitchedSystem& system, const TimeGrid& grid,
                           const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& weights, double rho) {
  check_shapes(system, grid, u, w);
  const Eigen::MatrixXd states = forward_states(system, grid, u, w);
  double value = system.terminal_cost(states.row(states.rows() - 1).transpose());
  if (rho != 0.0) value += rho * grid.step() * w.cwiseProduct(weights).sum();
  if (!std::isfinite(value)) throw DivergenceError("non-finite objective", grid.n_intervals() - 1);
  return value;
}

double penalized_objective(const SwitchedSystem& system, const TimeGrid& grid,
                           const ContinuousControlPath& u, const RelaxedControlPath& w,
                           const BinaryControlPath& v_tilde, double rho) {
  if (rho < 0.0) throw ConfigError("penalized_objective: rho must be >= 0");
  if (!(u.grid() == grid) || !(w.grid() == grid) || !(v_tilde.grid() == grid)) {
    throw DimensionError("penalized_objective: grids differ");
  }
  return penalized_objective(system, grid, u.values(), w.values(),
                             penalty_weights(v_tilde, system.modes()), rho);
}

PenalizedGradient adjoint_gradient(const SwitchedSystem& system, const TimeGrid& grid,
                                   const Eigen::MatrixXd& u, const Eigen::MatrixXd& w,
                                   const Eigen::MatrixXd& weights, double rho) {
  check_shapes(system, grid, u, w);
  const int n = grid.n_intervals();
  const int ny = system.state_dim();
  const double h = grid.step();
  const Eigen::MatrixXd states = forward_states(system, grid, u, w);

  PenalizedGradient out;
  const Eigen::VectorXd y_final = states.row(n).transpose();
  out.value = system.terminal_cost(y_final);
  if (rho != 0.0) out.value += rho * h * w.cwiseProduct(weights).sum();
  if (!std::isfinite(out.value)) throw DivergenceError("non-finite objective", n - 1);
  out.u = Eigen::MatrixXd::Zero(n, system.control_dim());
  out.w = rho * h * weights;

  Eigen::VectorXd lambda = system.terminal_gradient(y_final);
  Eigen::VectorXd scratch(ny), scaled(ny), gy(ny), gu(system.control_dim()), grad_w;
  Stages s;
  Eigen::VectorXd bk[4];
  for (int k = n - 1; k >= 0; --k) {
    const double t = grid.node(k);
    const Eigen::VectorXd y = states.row(k).transpose();
    const Eigen::VectorXd uk = u.row(k).transpose();
    const Eigen::VectorXd wk = w.row(k).transpose();
    gu.setZero();
    grad_w.setZero(w.cols());
    if (system.integrator() == Integrator::kForwardEuler) {
      bk[0] = h * lambda;
      stage_adjoint(system, t, y, uk, wk, bk[0], scratch, scaled, gy, gu, grad_w);
      lambda += gy;
    } else {
      rk4_stages(system, t, h, y, uk, wk, scratch, s);
      bk[0] = (h / 6.0) * lambda;
      bk[1] = (h / 3.0) * lambda;
      bk[2] = (h / 3.0) * lambda;
      bk[3] = (h / 6.0) * lambda;
      stage_adjoint(system, t + h, s.y[3], uk, wk, bk[3], scratch, scaled, gy, gu, grad_w);
      lambda += gy;
      bk[2] += h * gy;
      stage_adjoint(system, t + 0.5 * h, s.y[2], uk, wk, bk[2], scratch, scaled, gy, gu, grad_w);
      lambda += gy;
      bk[1] += 0.5 * h * gy;
      stage_adjoint(system, t + 0.5 * h, s.y[1], uk, wk, bk[1], scratch, scaled, gy, gu, grad_w);
      lambda += gy;
      bk[0] += 0.5 * h * gy;
      stage_adjoint(system, t, s.y[0], uk, wk, bk[0], scratch, scaled, gy, gu, grad_w);
      lambda += gy;
    }
    out.w.row(k) += grad_w.transpose();
    if (system.control_dim() > 0) out.u.row(k) = gu.transpose();
  }
  return out;
}

PenalizedGradient adjoint_gradient(const SwitchedSystem& system, const TimeGrid& grid,
                                   const ContinuousControlPath& u, const RelaxedControlPath& w,
                                   const BinaryControlPath& v_tilde, double rho) {
  if (rho < 0.0) throw ConfigError("adjoint_gradient: rho must be >= 0");
  if (!(u.grid() == grid) || !(w.grid() == grid) || !(v_tilde.grid() == grid)) {
    throw DimensionError("adjoint_gradient: grids differ");
  }
  return adjoint_gradient(system, grid, u.values(), w.values(),
                          penalty_weights(v_tilde, system.modes()), rho);
}

}  // namespace padm
