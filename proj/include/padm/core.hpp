#ifndef PADM_CORE_HPP_
#define PADM_CORE_HPP_

// Domain types shared by every solver: the time grid, control paths in their
// binary / relaxed / continuous forms, the mode table of partial outer
// convexification and the combinatorial constraint set (dwell times and
// switch budgets).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padm {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or grids of two operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds a hard size limit (mode enumeration, oracle grid size).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A control row cannot be expressed in the requested representation.
class RepresentationError : public Error {
 public:
  using Error::Error;
};

/// The combinatorial constraint set admits no control on the given grid.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters for a type or solver.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------

/// Uniform partition of [t_start, t_end] into n_intervals intervals.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, int n_intervals);

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  int n_intervals() const { return n_intervals_; }
  double step() const { return step_; }

  /// Node k = 0..n_intervals.
  double node(int k) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double t_start_;
  double t_end_;
  int n_intervals_;
  double step_;
};

/// Number of grid intervals covering a duration: ceil(duration / step),
/// robust against representation error in the quotient. Always >= 1.
int dwell_intervals(double duration, const TimeGrid& grid);

// ---------------------------------------------------------------------------
// ModeTable
// ---------------------------------------------------------------------------

inline constexpr int kMaxEnumeratedSwitches = 16;

/// Ordered list of distinct binary configurations r^i in {0,1}^M.
class ModeTable {
 public:
  /// Rows of `modes` are the configurations; validated for 0/1 entries and
  /// distinctness.
  ModeTable(int n_switches, BinaryMatrix modes);

  int n_switches() const { return n_switches_; }
  int n_modes() const { return static_cast<int>(modes_.rows()); }
  const BinaryMatrix& modes() const { return modes_; }
  int entry(int mode, int component) const { return modes_(mode, component); }

  /// Index of the configuration equal to `row`, if present.
  std::optional<int> find(const Eigen::Ref<const Eigen::RowVectorXi>& row) const;

  /// |r^mode - row|_1
  int distance(int mode, const Eigen::Ref<const Eigen::RowVectorXi>& row) const;

  /// |r^a - r^b|_1
  int distance(int mode_a, int mode_b) const;

 private:
  int n_switches_;
  BinaryMatrix modes_;
};

/// All 2^M configurations in lexicographic order (first component most
/// significant). Throws CapacityError unless 1 <= M <= 16.
ModeTable enumerate_modes(int n_switches);

// ---------------------------------------------------------------------------
// Control paths (piecewise constant on the grid intervals)
// ---------------------------------------------------------------------------

class BinaryControlPath {
 public:
  BinaryControlPath(TimeGrid grid, BinaryMatrix values);

  /// Path of `n_components` components, all entries `value`.
  static BinaryControlPath constant(const TimeGrid& grid, int n_components, int value = 0);

  const TimeGrid& grid() const { return grid_; }
  const BinaryMatrix& values() const { return values_; }
  int n_intervals() const { return static_cast<int>(values_.rows()); }
  int n_components() const { return static_cast<int>(values_.cols()); }
  int operator()(int interval, int component) const { return values_(interval, component); }

  bool operator==(const BinaryControlPath& other) const {
    return grid_ == other.grid_ && values_ == other.values_;
  }

 private:
  TimeGrid grid_;
  BinaryMatrix values_;
};

inline constexpr double kSimplexTolerance = 1e-12;

/// Convexified multipliers w: rows lie on the probability simplex (SOS1).
class RelaxedControlPath {
 public:
  RelaxedControlPath(TimeGrid grid, Eigen::MatrixXd values);

  static RelaxedControlPath uniform(const TimeGrid& grid, int n_modes);
  /// One-hot rows selecting `modes[k]` on interval k.
  static RelaxedControlPath one_hot(const TimeGrid& grid, int n_modes,
                                    const std::vector<int>& modes);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  int n_intervals() const { return static_cast<int>(values_.rows()); }
  int n_modes() const { return static_cast<int>(values_.cols()); }
  double operator()(int interval, int mode) const { return values_(interval, mode); }

  /// True when every entry is exactly 0 or 1.
  bool is_one_hot() const;
  /// Selected mode per interval; requires is_one_hot().
  std::vector<int> selected_modes() const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

/// Per-channel box [lower, upper] for the continuous controls.
struct ControlBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(lower.size()); }
};

class ContinuousControlPath {
 public:
  ContinuousControlPath(TimeGrid grid, Eigen::MatrixXd values, ControlBounds bounds);

  /// Every channel at the midpoint of its box.
  static ContinuousControlPath midpoint(const TimeGrid& grid, const ControlBounds& bounds);

  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const ControlBounds& bounds() const { return bounds_; }
  int n_intervals() const { return static_cast<int>(values_.rows()); }
  int n_channels() const { return static_cast<int>(values_.cols()); }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
  ControlBounds bounds_;
};

// ---------------------------------------------------------------------------
// Combinatorial constraint set
// ---------------------------------------------------------------------------

/// Discrete dwell-time and switch-budget rules for one switching sequence.
struct ComponentRule {
  int min_dwell = 1;                  ///< intervals between consecutive switches
  std::optional<int> max_dwell;       ///< longest interior run
  std::optional<int> max_switches;    ///< total switch budget
};

enum class Representation {
  kComponentwise,  ///< one rule per component of v
  kModewise,       ///< one rule on the sequence of selected configurations
};

class CombinatorialSpec {
 public:
  CombinatorialSpec(Representation representation, std::vector<ComponentRule> rules);

  static CombinatorialSpec componentwise(int n_components, const ComponentRule& rule);
  static CombinatorialSpec modewise(const ComponentRule& rule);

  Representation representation() const { return representation_; }
  const std::vector<ComponentRule>& rules() const { return rules_; }
  const ComponentRule& rule(int i) const { return rules_.at(i); }
  int n_rules() const { return static_cast<int>(rules_.size()); }

  /// Number of independent switching sequences these rules constrain on a
  /// control with `n_components` components; throws DimensionError when
  /// incompatible.
  void require_compatible(int n_components) const;

 private:
  Representation representation_;
  std::vector<ComponentRule> rules_;
};

enum class Rule { kMinDwell, kMaxDwell, kMaxSwitches };

std::string to_string(Rule rule);

struct Violation {
  int component;  ///< component index, or 0 for the mode sequence
  int interval;
  Rule rule;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// step * sum_k |v_k - v_tilde_k|_1, the exact integral of the L1 distance.
double penalty_term(const BinaryControlPath& v, const BinaryControlPath& v_tilde);

/// max over nodes t_k of || int_0^{t_k} (w - onehot) ds ||_inf.
double cia_deviation(const RelaxedControlPath& w, const RelaxedControlPath& onehot);

/// Switches of component `component` at nodes k with from < k <= to, i.e. on
/// the time window (t_from, t_to]. Windows are additive under partition.
int switch_count(const BinaryControlPath& v, int component, int from, int to);

FeasibilityReport check_feasible(const BinaryControlPath& v, const CombinatorialSpec& spec);

BinaryControlPath onehot_to_binary(const RelaxedControlPath& w, const ModeTable& modes);
RelaxedControlPath binary_to_onehot(const BinaryControlPath& v, const ModeTable& modes);

}  // namespace padm

#endif  // PADM_CORE_HPP_
