#ifndef PADM_ADM_HPP_
#define PADM_ADM_HPP_

// Penalty alternating direction method: an outer loop raising the penalty
// weight rho and an inner alternation between the relaxed (POC) direction and
// the exact combinatorial projection (MIP) direction. Also hosts the
// standalone comparison heuristics.

#include "padm/rounding.hpp"

#include <optional>
#include <string>
#include <vector>

namespace padm {

struct PenaltySchedule {
  double rho_initial = 1e-3;
  double increment_factor = 10.0;
  double rho_max = 1e6;

  void validate() const;
};

enum class AdmVariant {
  kSur,    ///< POC direction rounded by sum-up rounding
  kPlain,  ///< POC direction stays relaxed; only the MIP step binarizes
  kCiap,   ///< POC direction rounded by the dwell-constrained CIAP
};

std::string to_string(AdmVariant variant);

/// Which iterate the two inner break tests hand to the outer loop.
enum class BreakAssignment {
  /// First break keeps the fresh POC iterate with the old v_tilde; second
  /// break keeps the iterate from the start of the inner step.
  kAsPrinted,
  /// First break keeps the iterate from the start of the inner step; second
  /// break keeps the fully updated iterate.
  kTemplate,
};

struct AdmOptions {
  double epsilon = 1e-3;
  double penalty_stop_tol = 1e-4;
  int max_inner_iterations = 50;
  AdmVariant variant = AdmVariant::kSur;
  BreakAssignment break_assignment = BreakAssignment::kTemplate;
  int relaxed_max_iterations = 5000;
  CiapOptions ciap;

  void validate() const;
  /// Stationarity target for the relaxed solves: min(1e-6, epsilon / 10).
  double relaxed_tolerance() const;
};

/// Iterate of the alternation. `w` is the relaxed POC solution used for warm
/// starts; `v` is the POC-direction control (one-hot except in the plain
/// variant, where it equals w).
struct AdmPoint {
  ContinuousControlPath u;
  RelaxedControlPath w;
  RelaxedControlPath v;
  BinaryControlPath v_tilde;
};

struct AdmStart {
  std::optional<ContinuousControlPath> u;
  std::optional<RelaxedControlPath> w;
  std::optional<BinaryControlPath> v_tilde;
};

enum class BreakKind { kNone, kFirst, kSecond, kIterationLimit };

std::string to_string(BreakKind kind);

struct TraceEntry {
  int outer = 0;
  int inner = 0;
  double rho = 0.0;
  std::string step;       ///< "poc" or "mip"
  double psi_rho = 0.0;   ///< penalized objective after the step
  double psi = 0.0;       ///< unpenalized objective after the step
  double penalty = 0.0;   ///< int sum_i v_i |r^i - v_tilde|_1 after the step
  double psi_rho_before = 0.0;
  double psi_before = 0.0;
  BreakKind fired = BreakKind::kNone;
  bool relaxed_converged = true;
  /// On a break: Psi_rho of the iterate kept and of the other candidate.
  double kept_psi_rho = 0.0;
  double alternative_psi_rho = 0.0;
};

/// Directional optimality record of a final point.
struct PEpsCertificate {
  /// chi(v*, v_tilde*) - chi(v*, proj(v*)); exact DP makes this 0 at a
  /// fixed point.
  double mip_slack = 0.0;
  /// Psi_rho(x*) - Psi_rho(POC step from x*), including the rounding of
  /// the variant.
  double poc_slack = 0.0;
  /// Same difference for the relaxed solve alone, before rounding.
  double poc_relaxed_slack = 0.0;
  double epsilon = 0.0;
  bool inner_certified = false;  ///< last inner loop ended at a break test
  bool holds() const { return mip_slack <= 0.0 && poc_slack < epsilon && inner_certified; }
};

struct InnerResult {
  AdmPoint point;
  BreakKind reason = BreakKind::kNone;
  int iterations = 0;
  int relaxed_failures = 0;
};

struct AdmResult {
  ContinuousControlPath u_final;
  BinaryControlPath v_final;
  BinaryControlPath v_tilde_final;
  RelaxedControlPath w_final;
  double objective = 0.0;
  double penalty_value = 0.0;
  double rho_final = 0.0;
  bool feasible = false;
  PEpsCertificate certificate;
  std::vector<TraceEntry> trace;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int relaxed_failures = 0;
};

/// Default start: u at the box midpoint, uniform w, v_tilde constant at mode 0.
AdmPoint initial_point(const SwitchedSystem& system, const TimeGrid& grid,
                       const AdmStart& start, const AdmOptions& options,
                       const CombinatorialSpec& spec);

/// Psi_rho(u, v, v_tilde) for the POC-direction control v.
double penalized_value(const SwitchedSystem& system, const TimeGrid& grid, const AdmPoint& x,
                       double rho);

/// One pass of the inner alternation at fixed rho starting from `start`.
/// Trace entries are appended to `trace` with outer index `outer`.
InnerResult inner_alternation(const SwitchedSystem& system, const TimeGrid& grid,
                              const CombinatorialSpec& spec, double rho, const AdmOptions& options,
                              const AdmPoint& start, int outer, std::vector<TraceEntry>& trace);

PEpsCertificate certify(const SwitchedSystem& system, const TimeGrid& grid,
                        const CombinatorialSpec& spec, double rho, const AdmOptions& options,
                        const AdmPoint& x, bool inner_certified);

AdmResult adm_penalty(const SwitchedSystem& system, const TimeGrid& grid,
                      const CombinatorialSpec& spec, const PenaltySchedule& schedule,
                      const AdmOptions& options, const AdmStart& start = {});

// ---------------------------------------------------------------------------
// Comparison heuristics
// ---------------------------------------------------------------------------

struct HeuristicResult {
  ContinuousControlPath u;
  BinaryControlPath v;
  RelaxedControlPath w_relaxed;  ///< the POC solution it was derived from
  double objective = 0.0;
  double relaxed_value = 0.0;
  double deviation = 0.0;  ///< cia_deviation(w_relaxed, v)
  bool feasible = false;
  bool relaxed_converged = false;
  bool proven_optimal = true;  ///< CIAP only
};

/// Relaxed convexified problem with the combinatorial constraints dropped and
/// rho = 0. Returns the POC solution; its value is the lower bound.
RelaxedSolveResult poc_lower_bound(const SwitchedSystem& system, const TimeGrid& grid,
                                   const RelaxedSolveOptions& options = {});

HeuristicResult sur_heuristic(const SwitchedSystem& system, const TimeGrid& grid,
                              const CombinatorialSpec& spec, const RelaxedSolveOptions& options = {});

/// POC solution rounded by the dwell-constrained CIAP; the continuous
/// controls are kept from the POC solution.
HeuristicResult ciap_heuristic(const SwitchedSystem& system, const TimeGrid& grid,
                               const CombinatorialSpec& spec, const RelaxedSolveOptions& options = {},
                               const CiapOptions& ciap = {});

}  // namespace padm

#endif  // PADM_ADM_HPP_
