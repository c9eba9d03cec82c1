#include "padm/rounding.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>

namespace padm {

RelaxedControlPath sum_up_rounding(const RelaxedControlPath& w) {
  const double h = w.grid().step();
  const int n_modes = w.n_modes();
  Eigen::RowVectorXd gap = Eigen::RowVectorXd::Zero(n_modes);
  std::vector<int> chosen(w.n_intervals());
  for (int k = 0; k < w.n_intervals(); ++k) {
    gap += h * w.values().row(k);
    int best = 0;
    for (int i = 1; i < n_modes; ++i) {
      if (gap[i] > gap[best]) best = i;
    }
    chosen[k] = best;
    gap[best] -= h;
  }
  return RelaxedControlPath::one_hot(w.grid(), n_modes, chosen);
}

// ---------------------------------------------------------------------------

namespace {

BinaryControlPath project_with_costs(const TimeGrid& grid, int n_components,
                                     const CombinatorialSpec& spec,
                                     const std::function<double(int, int, int)>& component_cost,
                                     const ModeTable* modes,
                                     const std::function<double(int, int)>& mode_cost) {
  const int n = grid.n_intervals();
  BinaryMatrix out(n, n_components);
  if (spec.representation() == Representation::kComponentwise) {
    spec.require_compatible(n_components);
    for (int c = 0; c < n_components; ++c) {
      Eigen::MatrixXd costs(n, 2);
      for (int k = 0; k < n; ++k) {
        costs(k, 0) = component_cost(k, c, 0);
        costs(k, 1) = component_cost(k, c, 1);
      }
      const DwellDpSolution sol = solve_dwell_dp(costs, DwellAutomaton(spec.rule(c), 2));
      for (int k = 0; k < n; ++k) out(k, c) = sol.symbols[k];
    }
  } else {
    Eigen::MatrixXd costs(n, modes->n_modes());
    for (int k = 0; k < n; ++k) {
      for (int s = 0; s < modes->n_modes(); ++s) costs(k, s) = mode_cost(k, s);
    }
    const DwellDpSolution sol =
        solve_dwell_dp(costs, DwellAutomaton(spec.rule(0), modes->n_modes()));
    for (int k = 0; k < n; ++k) out.row(k) = modes->modes().row(sol.symbols[k]);
  }
  return BinaryControlPath(grid, std::move(out));
}

}  // namespace

BinaryControlPath dwell_project(const BinaryControlPath& v, const CombinatorialSpec& spec) {
  const BinaryMatrix& x = v.values();
  auto component_cost = [&](int k, int c, int b) { return x(k, c) == b ? 0.0 : 1.0; };
  if (spec.representation() == Representation::kComponentwise) {
    return project_with_costs(v.grid(), v.n_components(), spec, component_cost, nullptr, {});
  }
  const ModeTable modes = enumerate_modes(v.n_components());
  auto mode_cost = [&](int k, int s) { return static_cast<double>(modes.distance(s, x.row(k))); };
  return project_with_costs(v.grid(), v.n_components(), spec, component_cost, &modes, mode_cost);
}

BinaryControlPath dwell_project(const RelaxedControlPath& w, const ModeTable& modes,
                                const CombinatorialSpec& spec) {
  if (w.n_modes() != modes.n_modes()) {
    throw DimensionError("dwell_project: mode count differs from table");
  }
  const Eigen::MatrixXd& x = w.values();
  auto component_cost = [&](int k, int c, int b) {
    double cost = 0.0;
    for (int i = 0; i < modes.n_modes(); ++i) {
      if (modes.entry(i, c) != b) cost += x(k, i);
    }
    return cost;
  };
  auto mode_cost = [&](int k, int s) {
    double cost = 0.0;
    for (int i = 0; i < modes.n_modes(); ++i) cost += x(k, i) * modes.distance(i, s);
    return cost;
  };
  return project_with_costs(w.grid(), modes.n_switches(), spec, component_cost, &modes, mode_cost);
}

// ---------------------------------------------------------------------------

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<long long>& key) const {
    std::size_t h = 1469598103934665603ull;
    for (long long x : key) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

class CiapSearch {
 public:
  CiapSearch(const RelaxedControlPath& w, const ModeTable& modes, const CombinatorialSpec& spec)
      : n_(w.n_intervals()),
        m_(w.n_modes()),
        h_(w.grid().step()),
        tracker_(spec, modes),
        prefix_(n_ + 1, m_) {
    prefix_.row(0).setZero();
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(m_);
    for (int k = 0; k < n_; ++k) {
      running += w.values().row(k);
      prefix_.row(k + 1) = h_ * running;
    }
  }

  // Deviation at node k (after k intervals) for the given mode counts.
  double deviation(int k, const int* counts) const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      worst = std::max(worst, std::abs(prefix_(k, i) - h_ * counts[i]));
    }
    return worst;
  }

  // Dwell-aware sum-up rounding; always feasible because staying is allowed.
  std::pair<std::vector<int>, double> greedy() const {
    std::vector<int> path(n_);
    std::vector<int> counts(m_, 0);
    std::vector<DwellState> state, next;
    double bound = 0.0;
    for (int k = 0; k < n_; ++k) {
      int best = -1;
      double best_gap = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const bool allowed = k == 0 ? true : tracker_.advance(state, i, next);
        if (!allowed) continue;
        const double gap = prefix_(k + 1, i) - h_ * counts[i];
        if (gap > best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      if (k == 0) {
        state = tracker_.start(best);
      } else {
        tracker_.advance(state, best, next);
        state.swap(next);
      }
      path[k] = best;
      ++counts[best];
      bound = std::max(bound, deviation(k + 1, counts.data()));
    }
    return {path, bound};
  }

  CiapResult run(const RelaxedControlPath& w, const CiapOptions& options) {
    auto [incumbent_path, incumbent] = greedy();
    bool proven = true;

    struct Entry {
      double bound;
      int depth;
      long long id;
    };
    auto worse = [](const Entry& a, const Entry& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      if (a.depth != b.depth) return a.depth < b.depth;
      return a.id > b.id;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
    std::unordered_map<std::vector<long long>, double, KeyHash> best_seen;
    const int n_seq = tracker_.n_sequences();

    auto key_of = [&](long long id) {
      std::vector<long long> key;
      key.reserve(2 + m_);
      key.push_back(depth_[id]);
      key.push_back(tracker_.joint_index(states_of(id)));
      for (int i = 0; i < m_; ++i) key.push_back(counts_[id * m_ + i]);
      return key;
    };
    auto push_child = [&](long long parent, int mode, const std::vector<DwellState>& state) {
      const int depth = parent < 0 ? 1 : depth_[parent] + 1;
      std::vector<int> counts(m_, 0);
      if (parent >= 0) {
        for (int i = 0; i < m_; ++i) counts[i] = counts_[parent * m_ + i];
      }
      ++counts[mode];
      const double parent_bound = parent < 0 ? 0.0 : bound_[parent];
      const double bound = std::max(parent_bound, deviation(depth, counts.data()));
      if (bound >= incumbent) return;
      const long long id = static_cast<long long>(parent_.size());
      parent_.push_back(parent);
      mode_.push_back(mode);
      depth_.push_back(depth);
      bound_.push_back(bound);
      counts_.insert(counts_.end(), counts.begin(), counts.end());
      states_.insert(states_.end(), state.begin(), state.end());
      auto [it, inserted] = best_seen.try_emplace(key_of(id), bound);
      if (!inserted) {
        if (it->second <= bound) return;  // dominated; the stored node stays in the arena unused
        it->second = bound;
      }
      open.push(Entry{bound, depth, id});
    };

    for (int mode = 0; mode < m_; ++mode) push_child(-1, mode, tracker_.start(mode));

    long long expanded = 0;
    std::vector<DwellState> next;
    long long winner = -1;
    while (!open.empty()) {
      const Entry top = open.top();
      open.pop();
      if (top.bound >= incumbent) break;
      if (best_seen.at(key_of(top.id)) < top.bound) continue;  // superseded
      if (top.depth == n_) {
        winner = top.id;
        incumbent = top.bound;
        break;
      }
      if (++expanded > options.node_budget) {
        proven = false;
        break;
      }
      const std::vector<DwellState> state = states_of(top.id);
      for (int mode = 0; mode < m_; ++mode) {
        if (tracker_.advance(state, mode, next)) push_child(top.id, mode, next);
      }
    }

    std::vector<int> path = incumbent_path;
    if (winner >= 0) {
      for (long long id = winner; id >= 0; id = parent_[id]) path[depth_[id] - 1] = mode_[id];
    }
    RelaxedControlPath result = RelaxedControlPath::one_hot(w.grid(), m_, path);
    const double dev = cia_deviation(w, result);
    (void)n_seq;
    return CiapResult{std::move(result), dev, expanded, proven};
  }

 private:
  std::vector<DwellState> states_of(long long id) const {
    const int n_seq = tracker_.n_sequences();
    return std::vector<DwellState>(states_.begin() + id * n_seq, states_.begin() + (id + 1) * n_seq);
  }

  int n_;
  int m_;
  double h_;
  ModeConstraintTracker tracker_;
  Eigen::MatrixXd prefix_;

  std::vector<long long> parent_;
  std::vector<int> mode_;
  std::vector<int> depth_;
  std::vector<double> bound_;
  std::vector<int> counts_;
  std::vector<DwellState> states_;
};

}  // namespace

CiapResult constrained_ciap(const RelaxedControlPath& w, const ModeTable& modes,
                            const CombinatorialSpec& spec, const CiapOptions& options) {
  if (w.n_modes() != modes.n_modes()) {
    throw DimensionError("constrained_ciap: mode count differs from table");
  }
  CiapSearch search(w, modes, spec);
  return search.run(w, options);
}

// ---------------------------------------------------------------------------

OracleResult global_oracle(const SwitchedSystem& system, const TimeGrid& grid,
                           const CombinatorialSpec& spec, const OracleOptions& options) {
  const int n = grid.n_intervals();
  if (n > options.max_intervals) {
    throw CapacityError("global_oracle: grid has " + std::to_string(n) +
                        " intervals, limit is " + std::to_string(options.max_intervals));
  }
  const ModeTable& modes = system.modes();
  const int m = modes.n_modes();
  const ModeConstraintTracker tracker(spec, modes);
  const ControlBounds bounds = system.control_bounds();
  const bool has_controls = system.control_dim() > 0;
  const ContinuousControlPath u_mid = ContinuousControlPath::midpoint(grid, bounds);
  const Eigen::VectorXd u_empty(0);

  std::vector<int> path(n);
  std::vector<int> best_path;
  Eigen::MatrixXd best_u = u_mid.values();
  double best_value = std::numeric_limits<double>::infinity();
  long long nodes = 0;
  long long leaves = 0;
  bool complete = true;

  std::vector<Eigen::VectorXd> y(n + 1);
  y[0] = system.initial_state();
  std::vector<std::vector<DwellState>> states(n + 1);
  const BinaryControlPath anchor = BinaryControlPath::constant(grid, modes.n_switches());

  auto evaluate_leaf = [&]() {
    ++leaves;
    double value;
    Eigen::MatrixXd u_values;
    if (!has_controls) {
      value = system.terminal_cost(y[n]);
    } else {
      RelaxedSolveOptions inner = options.inner;
      inner.optimize_w = false;
      const RelaxedSolveResult r = solve_relaxed_poc(
          system, grid, anchor, 0.0, u_mid, RelaxedControlPath::one_hot(grid, m, path), inner);
      value = r.value;
      u_values = r.u.values();
    }
    if (value < best_value) {
      best_value = value;
      best_path = path;
      if (has_controls) best_u = std::move(u_values);
    }
  };

  std::function<void(int)> descend = [&](int k) {
    if (!complete) return;
    if (k == n) {
      evaluate_leaf();
      return;
    }
    for (int mode = 0; mode < m; ++mode) {
      if (k == 0) {
        states[1] = tracker.start(mode);
      } else if (!tracker.advance(states[k], mode, states[k + 1])) {
        continue;
      }
      if (++nodes > options.node_cap) {
        complete = false;
        return;
      }
      path[k] = mode;
      if (!has_controls) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
        w[mode] = 1.0;
        y[k + 1] = advance_state(system, grid.node(k), grid.step(), y[k], u_empty, w);
      }
      descend(k + 1);
    }
  };
  descend(0);

  if (best_path.empty()) {
    throw InfeasibleError("global_oracle: no sequence evaluated before the node cap");
  }
  BinaryMatrix control(n, modes.n_switches());
  for (int k = 0; k < n; ++k) control.row(k) = modes.modes().row(best_path[k]);
  return OracleResult{BinaryControlPath(grid, std::move(control)),
                      ContinuousControlPath(grid, std::move(best_u), bounds),
                      best_value,
                      nodes,
                      leaves,
                      complete};
}

}  // namespace padm
