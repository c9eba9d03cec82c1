#include "padm/relaxed.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace padm {

void RelaxedSolveOptions::validate() const {
  if (!(stationarity_tol > 0.0) || max_iterations < 0 || !(initial_step > 0.0)) {
    throw ConfigError("RelaxedSolveOptions: tolerances and step must be positive");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0) || !(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("RelaxedSolveOptions: armijo_c and backtrack_factor must lie in (0,1)");
  }
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& row) {
  const Eigen::Index n = row.size();
  std::vector<double> sorted(row.data(), row.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += sorted[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) threshold = t;
  }
  return (row.array() - threshold).max(0.0).matrix();
}

namespace {

struct Iterate {
  Eigen::MatrixXd u;
  Eigen::MatrixXd w;
};

double dot(const Iterate& a, const Iterate& b) {
  return (a.u.array() * b.u.array()).sum() + (a.w.array() * b.w.array()).sum();
}

class Projector {
 public:
  explicit Projector(const ControlBounds& bounds) : bounds_(bounds) {}

  // P(x - step * g), with frozen blocks left at x.
  Iterate project_step(const Iterate& x, const Iterate& g, double step, bool move_u,
                       bool move_w) const {
    Iterate out = x;
    if (move_u) {
      for (int j = 0; j < x.u.cols(); ++j) {
        out.u.col(j) = (x.u.col(j) - step * g.u.col(j))
                           .cwiseMax(bounds_.lower[j])
                           .cwiseMin(bounds_.upper[j]);
      }
    }
    if (move_w) {
      for (int k = 0; k < x.w.rows(); ++k) {
        out.w.row(k) = project_simplex((x.w.row(k) - step * g.w.row(k)).transpose()).transpose();
      }
    }
    return out;
  }

 private:
  const ControlBounds& bounds_;
};

double max_abs_difference(const Iterate& a, const Iterate& b) {
  double m = 0.0;
  if (a.u.size() > 0) m = std::max(m, (a.u - b.u).cwiseAbs().maxCoeff());
  if (a.w.size() > 0) m = std::max(m, (a.w - b.w).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

RelaxedSolveResult solve_relaxed_poc(const SwitchedSystem& system, const TimeGrid& grid,
                                     const BinaryControlPath& v_tilde, double rho,
                                     const ContinuousControlPath& u0, const RelaxedControlPath& w0,
                                     const RelaxedSolveOptions& options) {
  options.validate();
  if (rho < 0.0) throw ConfigError("solve_relaxed_poc: rho must be >= 0");
  if (!(u0.grid() == grid) || !(w0.grid() == grid) || !(v_tilde.grid() == grid)) {
    throw DimensionError("solve_relaxed_poc: grids differ");
  }
  const ControlBounds& bounds = u0.bounds();
  const Eigen::MatrixXd weights = penalty_weights(v_tilde, system.modes());
  const bool move_u = options.optimize_u && system.control_dim() > 0;
  const bool move_w = options.optimize_w;
  const Projector projector(bounds);

  auto evaluate = [&](const Iterate& x, Iterate& g) {
    PenalizedGradient pg = adjoint_gradient(system, grid, x.u, x.w, weights, rho);
    g.u = move_u ? std::move(pg.u) : Eigen::MatrixXd::Zero(x.u.rows(), x.u.cols());
    g.w = move_w ? std::move(pg.w) : Eigen::MatrixXd::Zero(x.w.rows(), x.w.cols());
    return pg.value;
  };
  auto value_at = [&](const Iterate& x) {
    return penalized_objective(system, grid, x.u, x.w, weights, rho);
  };

  Iterate x{u0.values(), w0.values()};
  Iterate g;
  double f = evaluate(x, g);
  const double f0 = f;
  double step = options.initial_step;
  constexpr double kMinStep = 1e-12;
  constexpr double kMaxStep = 1e12;

  int iteration = 0;
  double stationarity = max_abs_difference(x, projector.project_step(x, g, 1.0, move_u, move_w));
  bool converged = stationarity <= options.stationarity_tol;

  while (!converged && iteration < options.max_iterations) {
    const Iterate trial = projector.project_step(x, g, step, move_u, move_w);
    Iterate d{trial.u - x.u, trial.w - x.w};
    const double slope = dot(g, d);
    if (!(slope < 0.0)) break;  // no descent available at floating-point resolution

    double lambda = 1.0;
    Iterate candidate;
    double f_candidate = std::numeric_limits<double>::infinity();
    bool accepted = false;
    while (lambda > 1e-16) {
      candidate.u = x.u + lambda * d.u;
      for (int j = 0; j < candidate.u.cols(); ++j) {
        candidate.u.col(j) =
            candidate.u.col(j).cwiseMax(bounds.lower[j]).cwiseMin(bounds.upper[j]);
      }
      candidate.w = x.w + lambda * d.w;
      f_candidate = value_at(candidate);
      if (f_candidate <= f + options.armijo_c * lambda * slope) {
        accepted = true;
        break;
      }
      lambda *= options.backtrack_factor;
    }
    if (!accepted) break;

    Iterate g_candidate;
    f_candidate = evaluate(candidate, g_candidate);
    Iterate s{candidate.u - x.u, candidate.w - x.w};
    Iterate y{g_candidate.u - g.u, g_candidate.w - g.w};
    const double sy = dot(s, y);
    step = sy > 0.0 ? std::clamp(dot(s, s) / sy, kMinStep, kMaxStep) : kMaxStep;

    x = std::move(candidate);
    g = std::move(g_candidate);
    f = f_candidate;
    ++iteration;
    stationarity = max_abs_difference(x, projector.project_step(x, g, 1.0, move_u, move_w));
    converged = stationarity <= options.stationarity_tol;
  }

  return RelaxedSolveResult{ContinuousControlPath(grid, std::move(x.u), bounds),
                            RelaxedControlPath(grid, std::move(x.w)),
                            f,
                            f0,
                            stationarity,
                            iteration,
                            converged};
}

}  // namespace padm
