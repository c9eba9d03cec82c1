#include "padm/dwell.hpp"

#include <algorithm>
#include <limits>

namespace padm {

DwellAutomaton::DwellAutomaton(const ComponentRule& rule, int n_symbols)
    : rule_(rule), n_symbols_(n_symbols) {
  if (n_symbols < 1) throw ConfigError("DwellAutomaton: need at least one symbol");
  if (rule.min_dwell < 1) throw ConfigError("DwellAutomaton: min dwell must be >= 1");
  // Run lengths >= min_dwell are equivalent unless a max dwell must be
  // detected, which needs one value beyond the bound.
  run_cap_ = rule.max_dwell ? std::max(rule.min_dwell, *rule.max_dwell + 1) : rule.min_dwell;
  switch_cap_ = rule.max_switches ? *rule.max_switches : 0;
}

DwellState DwellAutomaton::state(int index) const {
  DwellState s;
  s.switches = index % (switch_cap_ + 1);
  index /= switch_cap_ + 1;
  s.run = index % (run_cap_ + 1);
  s.symbol = index / (run_cap_ + 1);
  return s;
}

std::optional<DwellState> DwellAutomaton::advance(const DwellState& s, int symbol) const {
  if (symbol == s.symbol) {
    DwellState next = s;
    if (!s.in_first_run()) next.run = std::min(s.run + 1, run_cap_);
    return next;
  }
  if (!s.in_first_run()) {
    if (s.run < rule_.min_dwell) return std::nullopt;
    if (rule_.max_dwell && s.run > *rule_.max_dwell) return std::nullopt;
  }
  int switches = s.switches;
  if (rule_.max_switches) {
    if (switches + 1 > *rule_.max_switches) return std::nullopt;
    ++switches;
  }
  return DwellState{symbol, 1, switches};
}

DwellDpSolution solve_dwell_dp(const Eigen::MatrixXd& costs, const DwellAutomaton& automaton) {
  const int n = static_cast<int>(costs.rows());
  const int n_symbols = automaton.n_symbols();
  if (costs.cols() != n_symbols) {
    throw DimensionError("solve_dwell_dp: cost columns differ from symbol count");
  }
  if (n < 1) throw DimensionError("solve_dwell_dp: need at least one interval");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  DwellDpTable table;
  table.n_intervals = n;
  table.n_states = automaton.n_states();
  table.cost_to_go.assign(static_cast<std::size_t>(n + 1) * table.n_states, 0.0);
  auto cell = [&](int k, int s) -> double& {
    return table.cost_to_go[static_cast<std::size_t>(k) * table.n_states + s];
  };

  // Backward sweep; entry (k, s) covers intervals k..n-1.
  for (int k = n - 1; k >= 1; --k) {
    for (int si = 0; si < table.n_states; ++si) {
      const DwellState s = automaton.state(si);
      double best = kInf;
      for (int b = 0; b < n_symbols; ++b) {
        const auto next = automaton.advance(s, b);
        if (!next) continue;
        best = std::min(best, costs(k, b) + cell(k + 1, automaton.index(*next)));
      }
      cell(k, si) = best;
    }
  }

  auto total_via = [&](int k, const std::optional<DwellState>& next, int b) {
    return next ? costs(k, b) + cell(k + 1, automaton.index(*next)) : kInf;
  };
  // Forward reconstruction among optimal continuations.
  auto pick = [&](int k, auto&& successor) {
    double best_total = kInf;
    for (int b = 0; b < n_symbols; ++b) best_total = std::min(best_total, total_via(k, successor(b), b));
    if (best_total == kInf) throw InfeasibleError("dwell projection: constraint set is empty");
    int chosen = -1;
    for (int b = 0; b < n_symbols; ++b) {
      if (total_via(k, successor(b), b) != best_total) continue;
      if (chosen < 0 || costs(k, b) < costs(k, chosen)) chosen = b;
    }
    return std::pair{chosen, best_total};
  };

  DwellDpSolution out;
  out.symbols.resize(n);
  auto [first, total] = pick(0, [&](int b) { return std::optional<DwellState>(automaton.start(b)); });
  out.symbols[0] = first;
  out.cost = total;
  DwellState s = automaton.start(first);
  for (int k = 1; k < n; ++k) {
    auto [b, unused] = pick(k, [&](int c) { return automaton.advance(s, c); });
    (void)unused;
    out.symbols[k] = b;
    s = *automaton.advance(s, b);
  }
  // Row 0 holds the optimal value of the whole problem.
  for (int si = 0; si < table.n_states; ++si) cell(0, si) = out.cost;
  out.table = std::move(table);
  return out;
}

// ---------------------------------------------------------------------------

ModeConstraintTracker::ModeConstraintTracker(const CombinatorialSpec& spec, const ModeTable& modes)
    : representation_(spec.representation()), modes_(modes) {
  if (representation_ == Representation::kModewise) {
    automata_.emplace_back(spec.rule(0), modes.n_modes());
  } else {
    spec.require_compatible(modes.n_switches());
    for (int c = 0; c < modes.n_switches(); ++c) automata_.emplace_back(spec.rule(c), 2);
  }
}

int ModeConstraintTracker::symbol(int sequence, int mode) const {
  return representation_ == Representation::kModewise ? mode : modes_.entry(mode, sequence);
}

long long ModeConstraintTracker::joint_index(const std::vector<DwellState>& states) const {
  long long index = 0;
  for (std::size_t i = 0; i < automata_.size(); ++i) {
    index = index * automata_[i].n_states() + automata_[i].index(states[i]);
  }
  return index;
}

std::vector<DwellState> ModeConstraintTracker::start(int mode) const {
  std::vector<DwellState> states;
  states.reserve(automata_.size());
  for (std::size_t i = 0; i < automata_.size(); ++i) {
    states.push_back(automata_[i].start(symbol(static_cast<int>(i), mode)));
  }
  return states;
}

bool ModeConstraintTracker::advance(const std::vector<DwellState>& current, int mode,
                                    std::vector<DwellState>& out) const {
  out.resize(automata_.size());
  for (std::size_t i = 0; i < automata_.size(); ++i) {
    const auto next = automata_[i].advance(current[i], symbol(static_cast<int>(i), mode));
    if (!next) return false;
    out[i] = *next;
  }
  return true;
}

}  // namespace padm
