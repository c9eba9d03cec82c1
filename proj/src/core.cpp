#include "padm/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace padm {

TimeGrid::TimeGrid(double t_start, double t_end, int n_intervals)
    : t_start_(t_start), t_end_(t_end), n_intervals_(n_intervals), step_(0.0) {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
    throw ConfigError("TimeGrid: require finite t_end > t_start");
  }
  if (n_intervals < 1) {
    throw ConfigError("TimeGrid: n_intervals must be >= 1");
  }
  step_ = (t_end - t_start) / n_intervals;
}

double TimeGrid::node(int k) const {
  if (k < 0 || k > n_intervals_) {
    throw IndexError("TimeGrid::node: index out of range");
  }
  return t_start_ + k * step_;
}

int dwell_intervals(double duration, const TimeGrid& grid) {
  if (!(duration >= 0.0)) {
    throw ConfigError("dwell_intervals: duration must be non-negative");
  }
  const double ratio = duration / grid.step();
  // 0.05 / 0.005 evaluates to 10.000000000000002; snap near-integers.
  const double nearest = std::round(ratio);
  const double intervals = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)
                               ? nearest
                               : std::ceil(ratio);
  return std::max(1, static_cast<int>(intervals));
}

// ---------------------------------------------------------------------------

ModeTable::ModeTable(int n_switches, BinaryMatrix modes)
    : n_switches_(n_switches), modes_(std::move(modes)) {
  if (n_switches < 1) {
    throw ConfigError("ModeTable: need at least one switch component");
  }
  if (modes_.cols() != n_switches || modes_.rows() < 1) {
    throw DimensionError("ModeTable: each mode needs exactly M entries");
  }
  if ((modes_.array() != 0 && modes_.array() != 1).any()) {
    throw RepresentationError("ModeTable: entries must be 0 or 1");
  }
  std::set<std::vector<int>> seen;
  for (int i = 0; i < modes_.rows(); ++i) {
    std::vector<int> row(n_switches);
    for (int j = 0; j < n_switches; ++j) row[j] = modes_(i, j);
    if (!seen.insert(row).second) {
      throw RepresentationError("ModeTable: modes must be distinct");
    }
  }
}

std::optional<int> ModeTable::find(const Eigen::Ref<const Eigen::RowVectorXi>& row) const {
  if (row.size() != n_switches_) {
    throw DimensionError("ModeTable::find: row length differs from M");
  }
  for (int i = 0; i < n_modes(); ++i) {
    if (modes_.row(i) == row) return i;
  }
  return std::nullopt;
}

int ModeTable::distance(int mode, const Eigen::Ref<const Eigen::RowVectorXi>& row) const {
  return (modes_.row(mode) - row).cwiseAbs().sum();
}

int ModeTable::distance(int mode_a, int mode_b) const {
  return (modes_.row(mode_a) - modes_.row(mode_b)).cwiseAbs().sum();
}

ModeTable enumerate_modes(int n_switches) {
  if (n_switches < 1 || n_switches > kMaxEnumeratedSwitches) {
    throw CapacityError("enumerate_modes: M must lie in [1, 16], got " +
                        std::to_string(n_switches));
  }
  const int n_modes = 1 << n_switches;
  BinaryMatrix modes(n_modes, n_switches);
  for (int i = 0; i < n_modes; ++i) {
    for (int j = 0; j < n_switches; ++j) {
      modes(i, j) = (i >> (n_switches - 1 - j)) & 1;
    }
  }
  return ModeTable(n_switches, std::move(modes));
}

// ---------------------------------------------------------------------------

BinaryControlPath::BinaryControlPath(TimeGrid grid, BinaryMatrix values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.n_intervals()) {
    throw DimensionError("BinaryControlPath: row count must equal n_intervals");
  }
  if ((values_.array() != 0 && values_.array() != 1).any()) {
    throw RepresentationError("BinaryControlPath: entries must be 0 or 1");
  }
}

BinaryControlPath BinaryControlPath::constant(const TimeGrid& grid, int n_components, int value) {
  return BinaryControlPath(grid, BinaryMatrix::Constant(grid.n_intervals(), n_components, value));
}

RelaxedControlPath::RelaxedControlPath(TimeGrid grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.n_intervals() || values_.cols() < 1) {
    throw DimensionError("RelaxedControlPath: shape must be n_intervals x n_modes");
  }
  for (int k = 0; k < values_.rows(); ++k) {
    const auto row = values_.row(k);
    if (!row.allFinite() || row.minCoeff() < -kSimplexTolerance ||
        row.maxCoeff() > 1.0 + kSimplexTolerance ||
        std::abs(row.sum() - 1.0) > kSimplexTolerance) {
      std::ostringstream msg;
      msg << "RelaxedControlPath: row " << k << " violates SOS1";
      throw RepresentationError(msg.str());
    }
  }
}

RelaxedControlPath RelaxedControlPath::uniform(const TimeGrid& grid, int n_modes) {
  return RelaxedControlPath(
      grid, Eigen::MatrixXd::Constant(grid.n_intervals(), n_modes, 1.0 / n_modes));
}

RelaxedControlPath RelaxedControlPath::one_hot(const TimeGrid& grid, int n_modes,
                                               const std::vector<int>& modes) {
  if (static_cast<int>(modes.size()) != grid.n_intervals()) {
    throw DimensionError("RelaxedControlPath::one_hot: one mode per interval required");
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(grid.n_intervals(), n_modes);
  for (int k = 0; k < grid.n_intervals(); ++k) {
    if (modes[k] < 0 || modes[k] >= n_modes) {
      throw IndexError("RelaxedControlPath::one_hot: mode index out of range");
    }
    values(k, modes[k]) = 1.0;
  }
  return RelaxedControlPath(grid, std::move(values));
}

bool RelaxedControlPath::is_one_hot() const {
  for (int k = 0; k < values_.rows(); ++k) {
    int ones = 0;
    for (int i = 0; i < values_.cols(); ++i) {
      const double x = values_(k, i);
      if (x == 1.0) {
        ++ones;
      } else if (x != 0.0) {
        return false;
      }
    }
    if (ones != 1) return false;
  }
  return true;
}

std::vector<int> RelaxedControlPath::selected_modes() const {
  if (!is_one_hot()) {
    throw RepresentationError("selected_modes: path is not one-hot");
  }
  std::vector<int> out(values_.rows());
  for (int k = 0; k < values_.rows(); ++k) {
    values_.row(k).maxCoeff(&out[k]);
  }
  return out;
}

ContinuousControlPath::ContinuousControlPath(TimeGrid grid, Eigen::MatrixXd values,
                                             ControlBounds bounds)
    : grid_(grid), values_(std::move(values)), bounds_(std::move(bounds)) {
  if (bounds_.lower.size() != bounds_.upper.size()) {
    throw DimensionError("ControlBounds: lower/upper length mismatch");
  }
  if (values_.rows() != grid_.n_intervals() || values_.cols() != bounds_.size()) {
    throw DimensionError("ContinuousControlPath: shape must be n_intervals x m_u");
  }
  for (int j = 0; j < bounds_.size(); ++j) {
    if (!(bounds_.lower[j] <= bounds_.upper[j])) {
      throw ConfigError("ControlBounds: lower must not exceed upper");
    }
    for (int k = 0; k < values_.rows(); ++k) {
      const double x = values_(k, j);
      if (!(x >= bounds_.lower[j] && x <= bounds_.upper[j])) {
        throw ConfigError("ContinuousControlPath: value outside bounds");
      }
    }
  }
}

ContinuousControlPath ContinuousControlPath::midpoint(const TimeGrid& grid,
                                                      const ControlBounds& bounds) {
  Eigen::MatrixXd values(grid.n_intervals(), bounds.size());
  for (int j = 0; j < bounds.size(); ++j) {
    values.col(j).setConstant(0.5 * (bounds.lower[j] + bounds.upper[j]));
  }
  return ContinuousControlPath(grid, std::move(values), bounds);
}

// ---------------------------------------------------------------------------

CombinatorialSpec::CombinatorialSpec(Representation representation,
                                     std::vector<ComponentRule> rules)
    : representation_(representation), rules_(std::move(rules)) {
  if (rules_.empty()) {
    throw ConfigError("CombinatorialSpec: at least one rule required");
  }
  if (representation_ == Representation::kModewise && rules_.size() != 1) {
    throw ConfigError("CombinatorialSpec: modewise representation takes exactly one rule");
  }
  for (const ComponentRule& r : rules_) {
    if (r.min_dwell < 1) throw ConfigError("CombinatorialSpec: min dwell must be >= 1");
    if (r.max_dwell && *r.max_dwell < r.min_dwell) {
      throw ConfigError("CombinatorialSpec: max dwell must be >= min dwell");
    }
    if (r.max_switches && *r.max_switches < 0) {
      throw ConfigError("CombinatorialSpec: switch budget must be >= 0");
    }
  }
}

CombinatorialSpec CombinatorialSpec::componentwise(int n_components, const ComponentRule& rule) {
  if (n_components < 1) throw ConfigError("CombinatorialSpec: need >= 1 component");
  return CombinatorialSpec(Representation::kComponentwise,
                           std::vector<ComponentRule>(n_components, rule));
}

CombinatorialSpec CombinatorialSpec::modewise(const ComponentRule& rule) {
  return CombinatorialSpec(Representation::kModewise, {rule});
}

void CombinatorialSpec::require_compatible(int n_components) const {
  if (representation_ == Representation::kComponentwise && n_rules() != n_components) {
    throw DimensionError("CombinatorialSpec: componentwise rule count differs from M");
  }
}

std::string to_string(Rule rule) {
  switch (rule) {
    case Rule::kMinDwell: return "min_dwell";
    case Rule::kMaxDwell: return "max_dwell";
    case Rule::kMaxSwitches: return "max_switches";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": grids differ");
}

// Checks one switching sequence given by symbol equality between intervals.
template <typename SameSymbol>
void check_sequence(int n, const ComponentRule& rule, int component, SameSymbol same,
                    FeasibilityReport& report) {
  std::vector<int> switches;
  for (int k = 1; k < n; ++k) {
    if (!same(k - 1, k)) switches.push_back(k);
  }
  auto flag = [&](int interval, Rule r) {
    report.feasible = false;
    report.violations.push_back({component, interval, r});
  };
  for (std::size_t s = 1; s < switches.size(); ++s) {
    if (switches[s] - switches[s - 1] < rule.min_dwell) flag(switches[s], Rule::kMinDwell);
    // Interior run [switches[s-1], switches[s]); first and last runs exempt.
    if (rule.max_dwell && switches[s] - switches[s - 1] > *rule.max_dwell) {
      flag(switches[s - 1] + *rule.max_dwell, Rule::kMaxDwell);
    }
  }
  if (rule.max_switches && static_cast<int>(switches.size()) > *rule.max_switches) {
    flag(switches[*rule.max_switches], Rule::kMaxSwitches);
  }
}

}  // namespace

double penalty_term(const BinaryControlPath& v, const BinaryControlPath& v_tilde) {
  require_same_grid(v.grid(), v_tilde.grid(), "penalty_term");
  if (v.n_components() != v_tilde.n_components()) {
    throw DimensionError("penalty_term: component counts differ");
  }
  const long mismatches = (v.values() - v_tilde.values()).cwiseAbs().cast<long>().sum();
  return v.grid().step() * static_cast<double>(mismatches);
}

double cia_deviation(const RelaxedControlPath& w, const RelaxedControlPath& onehot) {
  require_same_grid(w.grid(), onehot.grid(), "cia_deviation");
  if (w.n_modes() != onehot.n_modes()) {
    throw DimensionError("cia_deviation: mode counts differ");
  }
  if (!onehot.is_one_hot()) {
    throw RepresentationError("cia_deviation: second argument must be one-hot");
  }
  const double h = w.grid().step();
  Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(w.n_modes());
  double worst = 0.0;
  for (int k = 0; k < w.n_intervals(); ++k) {
    running += h * (w.values().row(k) - onehot.values().row(k));
    worst = std::max(worst, running.cwiseAbs().maxCoeff());
  }
  return worst;
}

int switch_count(const BinaryControlPath& v, int component, int from, int to) {
  if (component < 0 || component >= v.n_components()) {
    throw IndexError("switch_count: component out of range");
  }
  if (from < 0 || from > to || to > v.n_intervals()) {
    throw IndexError("switch_count: require 0 <= from <= to <= n_intervals");
  }
  int count = 0;
  for (int k = std::max(from + 1, 1); k <= std::min(to, v.n_intervals() - 1); ++k) {
    if (v(k, component) != v(k - 1, component)) ++count;
  }
  return count;
}

FeasibilityReport check_feasible(const BinaryControlPath& v, const CombinatorialSpec& spec) {
  spec.require_compatible(v.n_components());
  FeasibilityReport report;
  const int n = v.n_intervals();
  const BinaryMatrix& x = v.values();
  if (spec.representation() == Representation::kComponentwise) {
    for (int i = 0; i < v.n_components(); ++i) {
      check_sequence(n, spec.rule(i), i, [&](int a, int b) { return x(a, i) == x(b, i); },
                     report);
    }
  } else {
    check_sequence(n, spec.rule(0), 0, [&](int a, int b) { return x.row(a) == x.row(b); },
                   report);
  }
  return report;
}

BinaryControlPath onehot_to_binary(const RelaxedControlPath& w, const ModeTable& modes) {
  if (w.n_modes() != modes.n_modes()) {
    throw DimensionError("onehot_to_binary: mode count differs from table");
  }
  const std::vector<int> selected = w.selected_modes();
  BinaryMatrix values(w.n_intervals(), modes.n_switches());
  for (int k = 0; k < w.n_intervals(); ++k) {
    values.row(k) = modes.modes().row(selected[k]);
  }
  return BinaryControlPath(w.grid(), std::move(values));
}

RelaxedControlPath binary_to_onehot(const BinaryControlPath& v, const ModeTable& modes) {
  if (v.n_components() != modes.n_switches()) {
    throw DimensionError("binary_to_onehot: component count differs from table");
  }
  std::vector<int> selected(v.n_intervals());
  for (int k = 0; k < v.n_intervals(); ++k) {
    const auto found = modes.find(v.values().row(k));
    if (!found) {
      throw RepresentationError("binary_to_onehot: row " + std::to_string(k) +
                                " is not in the mode table");
    }
    selected[k] = *found;
  }
  return RelaxedControlPath::one_hot(v.grid(), modes.n_modes(), selected);
}

}  // namespace padm
