#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "padm/benchmarks.hpp"
#include "padm/sim.hpp"

using namespace padm;

namespace {

// y' = -a_i (1 + t) y + b u, Phi = y(T) + y(T)^2; closed form for constant
// controls when b = 0.
class Decay final : public SwitchedSystem {
 public:
  explicit Decay(Integrator integrator, double b = 0.0)
      : modes_(enumerate_modes(1)), integrator_(integrator), b_(b) {}
  int state_dim() const override { return 1; }
  int control_dim() const override { return b_ != 0.0 ? 1 : 0; }
  const ModeTable& modes() const override { return modes_; }
  ControlBounds control_bounds() const override {
    const int n = control_dim();
    return {Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0)};
  }
  Eigen::VectorXd initial_state() const override { return Eigen::VectorXd::Constant(1, 1.0); }
  void rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
           Eigen::VectorXd& dy) const override {
    dy.resize(1);
    dy[0] = -rate(mode) * (1.0 + t) * y[0] + (u.size() ? b_ * u[0] * y[0] : 0.0);
  }
  void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                 Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const override {
    dfdy.resize(1, 1);
    dfdy(0, 0) = -rate(mode) * (1.0 + t) + (u.size() ? b_ * u[0] : 0.0);
    dfdu.setZero(1, control_dim());
    if (u.size()) dfdu(0, 0) = b_ * y[0];
  }
  double terminal_cost(const Eigen::VectorXd& y) const override { return y[0] + y[0] * y[0]; }
  Eigen::VectorXd terminal_gradient(const Eigen::VectorXd& y) const override {
    return Eigen::VectorXd::Constant(1, 1.0 + 2.0 * y[0]);
  }
  Integrator integrator() const override { return integrator_; }
  static double rate(int mode) { return mode == 0 ? 0.5 : 2.0; }

 private:
  ModeTable modes_;
  Integrator integrator_;
  double b_;
};

class Blowup final : public SwitchedSystem {
 public:
  Blowup() : modes_(enumerate_modes(1)) {}
  int state_dim() const override { return 1; }
  int control_dim() const override { return 0; }
  const ModeTable& modes() const override { return modes_; }
  Eigen::VectorXd initial_state() const override { return Eigen::VectorXd::Constant(1, 1.0); }
  void rhs(double, const Eigen::VectorXd& y, const Eigen::VectorXd&, int,
           Eigen::VectorXd& dy) const override {
    dy = Eigen::VectorXd::Constant(1, 1e3 * y[0] * y[0]);
  }
  void jacobians(double, const Eigen::VectorXd& y, const Eigen::VectorXd&, int,
                 Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const override {
    dfdy = Eigen::MatrixXd::Constant(1, 1, 2e3 * y[0]);
    dfdu.resize(1, 0);
  }
  double terminal_cost(const Eigen::VectorXd& y) const override { return y[0]; }
  Eigen::VectorXd terminal_gradient(const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Constant(1, 1.0);
  }

 private:
  ModeTable modes_;
};

double decay_exact(double w1, double T) {
  const double a = (1 - w1) * Decay::rate(0) + w1 * Decay::rate(1);
  const double y = std::exp(-a * (T + T * T / 2));
  return y + y * y;
}

double decay_value(const Decay& sys, int n, double w1) {
  TimeGrid g(0, 1, n);
  Eigen::MatrixXd w(n, 2);
  w.col(0).setConstant(1 - w1);
  w.col(1).setConstant(w1);
  return objective(sys, integrate(sys, g, ContinuousControlPath::midpoint(g, sys.control_bounds()),
                                  RelaxedControlPath(g, w)));
}

Eigen::MatrixXd random_simplex_rows(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  Eigen::MatrixXd w(n, m);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) w(k, i) = unit(rng);
    w.row(k) /= w.row(k).sum();
  }
  return w;
}

}  // namespace

TEST_CASE("fuller constant controls match the closed form") {
  const Problem p = build_fuller({0.05, 200});
  const auto u = ContinuousControlPath::midpoint(p.grid, p.system->control_bounds());
  for (int v = 0; v <= 1; ++v) {
    const auto w = RelaxedControlPath::one_hot(p.grid, 2, std::vector<int>(200, v));
    const double value = objective(*p.system, integrate(*p.system, p.grid, u, w));
    CHECK(std::abs(value - oracle::fuller_constant_objective(v)) < 1e-8);
  }
  CHECK(std::abs(oracle::fuller_constant_objective(0) - 1.3034333333333334) < 1e-15);
}

TEST_CASE("vertex controls reproduce a hand-rolled RK4 run of the selected mode") {
  const Problem p = build_fuller({0.05, 40});
  std::mt19937 rng(3);
  std::vector<int> modes(40);
  for (int& m : modes) m = static_cast<int>(rng() % 2);
  const auto u = ContinuousControlPath::midpoint(p.grid, p.system->control_bounds());
  const Trajectory tr =
      integrate(*p.system, p.grid, u, RelaxedControlPath::one_hot(p.grid, 2, modes));

  Eigen::VectorXd y = p.system->initial_state(), k1, k2, k3, k4;
  const Eigen::VectorXd none(0);
  const double h = p.grid.step();
  for (int k = 0; k < 40; ++k) {
    const double t = p.grid.node(k);
    p.system->rhs(t, y, none, modes[k], k1);
    p.system->rhs(t + h / 2, y + h / 2 * k1, none, modes[k], k2);
    p.system->rhs(t + h / 2, y + h / 2 * k2, none, modes[k], k3);
    p.system->rhs(t + h, y + h * k3, none, modes[k], k4);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    CHECK((tr.states.row(k + 1).transpose() - y).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("integrators converge at their nominal order") {
  const Decay rk4(Integrator::kRk4), euler(Integrator::kForwardEuler);
  const double exact = decay_exact(0.3, 1.0);
  const double e1 = std::abs(decay_value(rk4, 10, 0.3) - exact);
  const double e2 = std::abs(decay_value(rk4, 20, 0.3) - exact);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.05));
  const double f1 = std::abs(decay_value(euler, 100, 0.3) - exact);
  const double f2 = std::abs(decay_value(euler, 200, 0.3) - exact);
  CHECK(std::log2(f1 / f2) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("weighted penalty has the closed form of the penalty state") {
  const TimeGrid g(0, 2, 4);
  const ModeTable t = enumerate_modes(2);
  Eigen::MatrixXd w(4, 4);
  w << 1, 0, 0, 0,  //
      0.5, 0.5, 0, 0,  //
      0, 0, 0.25, 0.75,  //
      0.25, 0.25, 0.25, 0.25;
  BinaryMatrix vt(4, 2);
  vt << 1, 1, 0, 0, 1, 0, 0, 1;
  // distances per row: (2) ; (0*.5 + 1*.5) ; (0*.25 + 1*.75) ; (1+0+2+1)/4
  const double expected = 0.5 * (2 + 0.5 + 0.75 + 1.0);
  CHECK(weighted_penalty(RelaxedControlPath(g, w), BinaryControlPath(g, vt), t) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adjoint gradient matches central differences on fuller") {
  const Problem p = build_fuller({0.05, 50});
  const SwitchedSystem& sys = *p.system;
  std::mt19937 rng(11);
  const Eigen::MatrixXd weights = penalty_weights(
      BinaryControlPath::constant(p.grid, 1, 1), sys.modes());
  const Eigen::MatrixXd u(50, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd w = random_simplex_rows(rng, 50, 2);
    const double rho = 0.1 * trial;
    const PenalizedGradient g = adjoint_gradient(sys, p.grid, u, w, weights, rho);
    const Eigen::MatrixXd fd = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(sys, p.grid, u, x, weights, rho); },
        w, 1e-6);
    CHECK((g.w - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff() < 1e-5);
    CHECK(g.value == doctest::Approx(penalized_objective(sys, p.grid, u, w, weights, rho)));
  }
}

TEST_CASE("adjoint gradient with continuous controls for both integrators") {
  for (Integrator integ : {Integrator::kRk4, Integrator::kForwardEuler}) {
    const Decay sys(integ, 0.7);
    const TimeGrid g(0, 1, 12);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXd u(12, 1);
    for (int k = 0; k < 12; ++k) u(k, 0) = unit(rng);
    const Eigen::MatrixXd w = random_simplex_rows(rng, 12, 2);
    const Eigen::MatrixXd weights = penalty_weights(BinaryControlPath::constant(g, 1, 0), sys.modes());
    const PenalizedGradient grad = adjoint_gradient(sys, g, u, w, weights, 0.3);
    const Eigen::MatrixXd fdu = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(sys, g, x, w, weights, 0.3); }, u,
        1e-6);
    const Eigen::MatrixXd fdw = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(sys, g, u, x, weights, 0.3); }, w,
        1e-6);
    CHECK((grad.u - fdu).cwiseAbs().maxCoeff() / fdu.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((grad.w - fdw).cwiseAbs().maxCoeff() / fdw.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("non-finite states raise a divergence error naming the interval") {
  const Blowup sys;
  const TimeGrid g(0, 1, 10);
  const auto w = RelaxedControlPath::one_hot(g, 2, std::vector<int>(10, 0));
  const auto u = ContinuousControlPath::midpoint(g, sys.control_bounds());
  try {
    integrate(sys, g, u, w);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.interval() >= 0);
    CHECK(e.interval() < 10);
  }
}

TEST_CASE("mismatched grids are rejected") {
  const Problem p = build_fuller({0.05, 10});
  const TimeGrid other(0, 1, 11);
  CHECK_THROWS_AS(integrate(*p.system, p.grid, ContinuousControlPath::midpoint(other, {}),
                            RelaxedControlPath::uniform(p.grid, 2)),
                  DimensionError);
}
