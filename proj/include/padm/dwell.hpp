#ifndef PADM_DWELL_HPP_
#define PADM_DWELL_HPP_

#include "padm/core.hpp"

#include <optional>
#include <vector>

namespace padm {

/// Progress of one switching sequence through its ComponentRule.
struct DwellState {
  int symbol = 0;
  int run = 0;       ///< length of the current run, capped; 0 while no switch happened yet
  int switches = 0;  ///< tracked only when the rule has a switch budget

  bool in_first_run() const { return run == 0; }
  bool operator==(const DwellState&) const = default;
};

/**
 * Finite automaton accepting exactly the sequences that check_feasible
 * accepts for a single rule: consecutive switches at least min_dwell apart,
 * interior runs at most max_dwell long, at most max_switches switches. The
 * first and the last run are unconstrained.
 *
 * Staying on the current symbol is always allowed, so the accepted language
 * is never empty.
 */
class DwellAutomaton {
 public:
  DwellAutomaton(const ComponentRule& rule, int n_symbols);

  int n_symbols() const { return n_symbols_; }
  int n_states() const { return n_symbols_ * (run_cap_ + 1) * (switch_cap_ + 1); }

  int index(const DwellState& s) const {
    return (s.symbol * (run_cap_ + 1) + s.run) * (switch_cap_ + 1) + s.switches;
  }
  DwellState state(int index) const;

  DwellState start(int symbol) const { return DwellState{symbol, 0, 0}; }
  std::optional<DwellState> advance(const DwellState& s, int symbol) const;

 private:
  ComponentRule rule_;
  int n_symbols_;
  int run_cap_;
  int switch_cap_;
};

/// Cost-to-go table of the dwell-constrained assignment DP: entry (k, s) is
/// the least cost of intervals k..N-1 from automaton state s reached after
/// interval k-1.
struct DwellDpTable {
  int n_intervals = 0;
  int n_states = 0;
  std::vector<double> cost_to_go;  ///< (n_intervals + 1) x n_states, row-major

  double at(int k, int state) const { return cost_to_go[static_cast<std::size_t>(k) * n_states + state]; }
};

struct DwellDpSolution {
  std::vector<int> symbols;
  double cost;
  DwellDpTable table;
};

/**
 * Minimizes sum_k costs(k, s_k) over sequences accepted by the automaton.
 *
 * Ties between optimal sequences are broken forward in time: at every
 * interval the symbol with the smaller stage cost wins, then the lower
 * symbol index. Throws InfeasibleError when no sequence is accepted.
 */
DwellDpSolution solve_dwell_dp(const Eigen::MatrixXd& costs, const DwellAutomaton& automaton);

/// Automata for the switching sequences a spec constrains when controls are
/// drawn from `modes`: one automaton over mode indices (modewise), or one per
/// component over {0,1} (componentwise).
class ModeConstraintTracker {
 public:
  ModeConstraintTracker(const CombinatorialSpec& spec, const ModeTable& modes);

  int n_sequences() const { return static_cast<int>(automata_.size()); }

  /// Joint state index (mixed radix over the per-sequence states).
  long long joint_index(const std::vector<DwellState>& states) const;

  std::vector<DwellState> start(int mode) const;
  /// False when appending `mode` violates a rule; `out` receives the new state.
  bool advance(const std::vector<DwellState>& current, int mode,
               std::vector<DwellState>& out) const;

 private:
  int symbol(int sequence, int mode) const;

  Representation representation_;
  ModeTable modes_;
  std::vector<DwellAutomaton> automata_;
};

}  // namespace padm

#endif  // PADM_DWELL_HPP_
