#ifndef PADM_BENCHMARKS_HPP_
#define PADM_BENCHMARKS_HPP_

#include "padm/sim.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace padm {

/// A ready-to-solve instance.
struct Problem {
  std::shared_ptr<const SwitchedSystem> system;
  TimeGrid grid;
  CombinatorialSpec spec;
  std::string name;
};

// ---------------------------------------------------------------------------
// Fuller's problem with a minimum dwell time
// ---------------------------------------------------------------------------

struct FullerConfig {
  double tau_min = 0.05;
  int n_intervals = 200;

  void validate() const;
};

/// y1' = y2, y2' = 1 - 2v, y3' = y1^2 on [0, 1] with
/// Phi = y3 + (y1 - 1/100)^2 + y2^2 and y(0) = (1/100, 0, 0).
class FullerSystem final : public SwitchedSystem {
 public:
  FullerSystem();

  int state_dim() const override { return 3; }
  int control_dim() const override { return 0; }
  const ModeTable& modes() const override { return modes_; }
  Eigen::VectorXd initial_state() const override;
  void rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
           Eigen::VectorXd& dy) const override;
  void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                 Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const override;
  double terminal_cost(const Eigen::VectorXd& y) const override;
  Eigen::VectorXd terminal_gradient(const Eigen::VectorXd& y) const override;
  std::vector<std::string> state_names() const override { return {"y1", "y2", "y3"}; }

 private:
  ModeTable modes_;
};

/// Componentwise min dwell ceil(tau_min * n_intervals) on the unit horizon.
Problem build_fuller(const FullerConfig& config);

// ---------------------------------------------------------------------------
// Switched transmission-line network
// ---------------------------------------------------------------------------

struct TranslinesLine {
  std::string from;
  std::string to;
  double length = 1.0;
};

/// Piecewise-linear table of (t, value) knots, constant outside the range.
/// Repeated knot times encode jumps; the later knot wins at the jump.
struct DemandProfile {
  std::vector<std::pair<double, double>> knots;

  double operator()(double t) const;
};

struct TranslinesProducer {
  std::string node;
  double lower = 0.0;
  double upper = 2.0;
};

struct TranslinesConsumer {
  std::string node;
  DemandProfile demand;
};

struct TranslinesConfig {
  std::vector<TranslinesLine> lines;
  /// Characteristic speeds (forward > 0, backward < 0).
  double speed_forward = 1.0;
  double speed_backward = -1.0;
  /// Symmetric non-negative damping, row-major [b11, b12, b21, b22].
  std::vector<double> damping{0.1, 0.05, 0.05, 0.1};
  /// v-component c switches every line listed in switch_groups[c].
  std::vector<std::vector<int>> switch_groups;
  std::vector<TranslinesProducer> producers;
  std::vector<TranslinesConsumer> consumers;
  int volumes_per_line = 4;
  int n_time_steps = 104;
  double horizon = 26.0;
  double tau_min = 1.0;
  Representation representation = Representation::kComponentwise;

  void validate() const;

  /// Meshed subgrid: 14 lines, two switch groups, 4 volumes per line,
  /// 104 steps on [0, 26].
  static TranslinesConfig subgrid();
  /// Subgrid topology on 2 volumes per line and 52 steps.
  static TranslinesConfig coarse();
  /// Larger synthetic tree with three switch groups.
  static TranslinesConfig extended_tree();
  static TranslinesConfig preset(const std::string& name);
};

/**
 * Upwind finite volumes for xi_t + Lambda xi_x = -B xi on every line, coupled
 * at the nodes: the forward characteristic leaving a node carries the sum of
 * arriving forward waves and injected controls, split evenly across the
 * active outgoing lines; the backward characteristic is split the same way
 * across active incoming lines. Consumers absorb and receive the forward
 * outflow of their active incoming lines; the last state integrates
 * 1/2 sum_s (Q_s - C_s)^2. Switched-off lines are decoupled at both ends.
 */
class TranslinesSystem final : public SwitchedSystem {
 public:
  explicit TranslinesSystem(const TranslinesConfig& config);

  int state_dim() const override { return n_wave_ + 1; }
  int control_dim() const override { return static_cast<int>(config_.producers.size()); }
  const ModeTable& modes() const override { return modes_; }
  ControlBounds control_bounds() const override;
  Eigen::VectorXd initial_state() const override;
  void rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
           Eigen::VectorXd& dy) const override;
  void jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                 Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const override;
  void vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
           const Eigen::VectorXd& lambda, Eigen::VectorXd& gy, Eigen::VectorXd& gu) const override;
  double terminal_cost(const Eigen::VectorXd& y) const override { return y[n_wave_]; }
  Eigen::VectorXd terminal_gradient(const Eigen::VectorXd& y) const override;
  Integrator integrator() const override { return Integrator::kForwardEuler; }
  std::vector<std::string> state_names() const override;
  std::vector<std::string> control_names() const override;

  const TranslinesConfig& config() const { return config_; }
  /// Power delivered to each consumer, in config order.
  Eigen::VectorXd delivered(const Eigen::VectorXd& y, int mode) const;
  Eigen::VectorXd demands(double t) const;

 private:
  struct ModeOperator;

  TranslinesConfig config_;
  ModeTable modes_;
  int n_wave_;
  std::vector<std::shared_ptr<const ModeOperator>> operators_;
};

Problem build_translines(const TranslinesConfig& config);

}  // namespace padm

#endif  // PADM_BENCHMARKS_HPP_
