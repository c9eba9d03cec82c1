#ifndef PADM_ROUNDING_HPP_
#define PADM_ROUNDING_HPP_

// Integer-side solvers: sum-up rounding, the exact L1 projection onto the
// dwell-constrained set, the dwell-constrained combinatorial integral
// approximation and an enumeration oracle for coarse grids.

#include "padm/dwell.hpp"
#include "padm/relaxed.hpp"
#include "padm/sim.hpp"

namespace padm {

/// SOS1 sum-up rounding; argmax ties go to the lowest mode index.
RelaxedControlPath sum_up_rounding(const RelaxedControlPath& w);

/// Exact minimizer of int |v - v_tilde|_1 over v_tilde in the constraint set.
/// Componentwise specs decompose into one DP per component; modewise specs
/// run a single DP over all 2^M configurations.
BinaryControlPath dwell_project(const BinaryControlPath& v, const CombinatorialSpec& spec);

/// Same projection for a relaxed direction: minimizes
/// int sum_i w_i |r^i - v_tilde|_1 over v_tilde in the constraint set.
BinaryControlPath dwell_project(const RelaxedControlPath& w, const ModeTable& modes,
                                const CombinatorialSpec& spec);

struct CiapOptions {
  long long node_budget = 20'000'000;
};

struct CiapResult {
  RelaxedControlPath w;  ///< one-hot
  double deviation;      ///< cia_deviation(input, w)
  long long nodes_explored;
  bool proven_optimal;
};

/// Minimizes the maximal running-integral deviation from w over one-hot
/// controls whose configurations satisfy the rules. Best-first branch and
/// bound over intervals; the running maximum of the prefix is an exact lower
/// bound, and prefixes reaching the same (constraint state, mode counts) are
/// merged since their futures coincide.
CiapResult constrained_ciap(const RelaxedControlPath& w, const ModeTable& modes,
                            const CombinatorialSpec& spec, const CiapOptions& options = {});

struct OracleOptions {
  long long node_cap = 10'000'000;
  int max_intervals = 32;
  RelaxedSolveOptions inner;  ///< used per leaf when the system has continuous controls
};

struct OracleResult {
  BinaryControlPath best_control;
  ContinuousControlPath best_u;
  double best_value;
  long long nodes_explored;
  long long leaves;
  bool proven_optimal;
};

/// Depth-first enumeration of every constraint-feasible mode sequence on a
/// coarse grid. Without continuous controls each sequence is simulated
/// incrementally along the tree; otherwise each leaf solves the continuous
/// subproblem with the sequence fixed.
OracleResult global_oracle(const SwitchedSystem& system, const TimeGrid& grid,
                           const CombinatorialSpec& spec, const OracleOptions& options = {});

}  // namespace padm

#endif  // PADM_ROUNDING_HPP_
