#include "padm/adm.hpp"

#include <algorithm>
#include <cmath>

namespace padm {

void PenaltySchedule::validate() const {
  if (!(rho_initial > 0.0) || !(rho_initial <= rho_max)) {
    throw ConfigError("PenaltySchedule: need 0 < rho_initial <= rho_max");
  }
  if (!(increment_factor > 1.0)) throw ConfigError("PenaltySchedule: increment_factor must be > 1");
}

void AdmOptions::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("AdmOptions: epsilon must be > 0");
  if (!(penalty_stop_tol > 0.0)) throw ConfigError("AdmOptions: penalty_stop_tol must be > 0");
  if (max_inner_iterations < 1) throw ConfigError("AdmOptions: max_inner_iterations must be >= 1");
}

double AdmOptions::relaxed_tolerance() const { return std::min(1e-6, epsilon / 10.0); }

std::string to_string(AdmVariant variant) {
  switch (variant) {
    case AdmVariant::kSur:
      return "adm-sur";
    case AdmVariant::kPlain:
      return "adm";
    case AdmVariant::kCiap:
      return "adm-ciap";
  }
  return "?";
}

std::string to_string(BreakKind kind) {
  switch (kind) {
    case BreakKind::kNone:
      return "none";
    case BreakKind::kFirst:
      return "first";
    case BreakKind::kSecond:
      return "second";
    case BreakKind::kIterationLimit:
      return "iteration-limit";
  }
  return "?";
}

namespace {

RelaxedControlPath round_argmax(const RelaxedControlPath& w) {
  std::vector<int> chosen(w.n_intervals());
  for (int k = 0; k < w.n_intervals(); ++k) {
    int best = 0;
    for (int i = 1; i < w.n_modes(); ++i) {
      if (w(k, i) > w(k, best)) best = i;
    }
    chosen[k] = best;
  }
  return RelaxedControlPath::one_hot(w.grid(), w.n_modes(), chosen);
}

RelaxedControlPath round_for_variant(const RelaxedControlPath& w, const SwitchedSystem& system,
                                     const CombinatorialSpec& spec, const AdmOptions& options) {
  switch (options.variant) {
    case AdmVariant::kSur:
      return sum_up_rounding(w);
    case AdmVariant::kPlain:
      return w;
    case AdmVariant::kCiap:
      return constrained_ciap(w, system.modes(), spec, options.ciap).w;
  }
  return w;
}

struct PocStep {
  AdmPoint point;
  double relaxed_value;
  bool converged;
};

PocStep poc_step(const SwitchedSystem& system, const TimeGrid& grid,
                 const CombinatorialSpec& spec, double rho, const AdmOptions& options,
                 const AdmPoint& x) {
  RelaxedSolveOptions relaxed;
  relaxed.stationarity_tol = options.relaxed_tolerance();
  relaxed.max_iterations = options.relaxed_max_iterations;
  RelaxedSolveResult r = solve_relaxed_poc(system, grid, x.v_tilde, rho, x.u, x.w, relaxed);
  RelaxedControlPath v = round_for_variant(r.w, system, spec, options);
  return PocStep{AdmPoint{std::move(r.u), std::move(r.w), std::move(v), x.v_tilde}, r.value,
                 r.converged};
}

BinaryControlPath mip_step(const SwitchedSystem& system, const CombinatorialSpec& spec,
                           const AdmPoint& x) {
  return dwell_project(x.v, system.modes(), spec);
}

double unpenalized(const SwitchedSystem& system, const TimeGrid& grid, const AdmPoint& x) {
  return penalized_value(system, grid, x, 0.0);
}

}  // namespace

AdmPoint initial_point(const SwitchedSystem& system, const TimeGrid& grid, const AdmStart& start,
                       const AdmOptions& options, const CombinatorialSpec& spec) {
  const ModeTable& modes = system.modes();
  ContinuousControlPath u =
      start.u ? *start.u : ContinuousControlPath::midpoint(grid, system.control_bounds());
  RelaxedControlPath w = start.w ? *start.w : RelaxedControlPath::uniform(grid, modes.n_modes());
  BinaryControlPath v_tilde = start.v_tilde
                                  ? *start.v_tilde
                                  : BinaryControlPath(grid, BinaryMatrix(modes.modes().row(0).replicate(
                                                                grid.n_intervals(), 1)));
  if (!(u.grid() == grid) || !(w.grid() == grid) || !(v_tilde.grid() == grid)) {
    throw DimensionError("initial_point: start point lives on a different grid");
  }
  if (!check_feasible(v_tilde, spec).feasible) {
    throw ConfigError("initial_point: starting v_tilde violates the combinatorial constraints");
  }
  RelaxedControlPath v = round_for_variant(w, system, spec, options);
  return AdmPoint{std::move(u), std::move(w), std::move(v), std::move(v_tilde)};
}

double penalized_value(const SwitchedSystem& system, const TimeGrid& grid, const AdmPoint& x,
                       double rho) {
  return penalized_objective(system, grid, x.u.values(), x.v.values(),
                             penalty_weights(x.v_tilde, system.modes()), rho);
}

InnerResult inner_alternation(const SwitchedSystem& system, const TimeGrid& grid,
                              const CombinatorialSpec& spec, double rho, const AdmOptions& options,
                              const AdmPoint& start, int outer, std::vector<TraceEntry>& trace) {
  const double half_eps = 0.5 * options.epsilon;
  const bool as_printed = options.break_assignment == BreakAssignment::kAsPrinted;
  InnerResult out{start, BreakKind::kIterationLimit, 0, 0};
  AdmPoint x = start;
  double f_x = penalized_value(system, grid, x, rho);
  double psi_x = unpenalized(system, grid, x);

  for (int l = 0; l < options.max_inner_iterations; ++l) {
    out.iterations = l + 1;

    // POC direction.
    PocStep poc = poc_step(system, grid, spec, rho, options, x);
    if (!poc.converged) ++out.relaxed_failures;
    AdmPoint y = std::move(poc.point);
    const double f_y = penalized_value(system, grid, y, rho);
    const double psi_y = unpenalized(system, grid, y);
    TraceEntry e;
    e.outer = outer;
    e.inner = l;
    e.rho = rho;
    e.step = "poc";
    e.psi_rho = f_y;
    e.psi = psi_y;
    e.penalty = weighted_penalty(y.v, y.v_tilde, system.modes());
    e.psi_rho_before = f_x;
    e.psi_before = psi_x;
    e.relaxed_converged = poc.converged;
    if (f_y >= f_x - half_eps) {
      e.fired = BreakKind::kFirst;
      e.kept_psi_rho = as_printed ? f_y : f_x;
      e.alternative_psi_rho = as_printed ? f_x : f_y;
      trace.push_back(e);
      out.point = as_printed ? std::move(y) : std::move(x);
      out.reason = BreakKind::kFirst;
      return out;
    }
    trace.push_back(e);

    // MIP direction.
    AdmPoint z = y;
    z.v_tilde = mip_step(system, spec, y);
    const double f_z = penalized_value(system, grid, z, rho);
    TraceEntry m;
    m.outer = outer;
    m.inner = l;
    m.rho = rho;
    m.step = "mip";
    m.psi_rho = f_z;
    m.psi = psi_y;
    m.penalty = weighted_penalty(z.v, z.v_tilde, system.modes());
    m.psi_rho_before = f_y;
    m.psi_before = psi_y;
    if (f_z >= f_y - half_eps) {
      m.fired = BreakKind::kSecond;
      m.kept_psi_rho = as_printed ? f_x : f_z;
      m.alternative_psi_rho = as_printed ? f_z : f_x;
      trace.push_back(m);
      out.point = as_printed ? std::move(x) : std::move(z);
      out.reason = BreakKind::kSecond;
      return out;
    }
    trace.push_back(m);
    x = std::move(z);
    f_x = f_z;
    psi_x = psi_y;
  }
  out.point = std::move(x);
  return out;
}

PEpsCertificate certify(const SwitchedSystem& system, const TimeGrid& grid,
                        const CombinatorialSpec& spec, double rho, const AdmOptions& options,
                        const AdmPoint& x, bool inner_certified) {
  PEpsCertificate c;
  c.epsilon = options.epsilon;
  c.inner_certified = inner_certified;
  const ModeTable& modes = system.modes();
  const BinaryControlPath projected = mip_step(system, spec, x);
  c.mip_slack = weighted_penalty(x.v, x.v_tilde, modes) - weighted_penalty(x.v, projected, modes);

  const double f_x = penalized_value(system, grid, x, rho);
  const PocStep poc = poc_step(system, grid, spec, rho, options, x);
  c.poc_slack = f_x - penalized_value(system, grid, poc.point, rho);
  AdmPoint relaxed_start = x;
  relaxed_start.v = x.w;
  c.poc_relaxed_slack = penalized_value(system, grid, relaxed_start, rho) - poc.relaxed_value;
  return c;
}

AdmResult adm_penalty(const SwitchedSystem& system, const TimeGrid& grid,
                      const CombinatorialSpec& spec, const PenaltySchedule& schedule,
                      const AdmOptions& options, const AdmStart& start) {
  schedule.validate();
  options.validate();
  const ModeTable& modes = system.modes();
  AdmResult result{ContinuousControlPath::midpoint(grid, system.control_bounds()),
                   BinaryControlPath::constant(grid, modes.n_switches()),
                   BinaryControlPath::constant(grid, modes.n_switches()),
                   RelaxedControlPath::uniform(grid, modes.n_modes()),
                   0.0, 0.0, 0.0, false, {}, {}, 0, 0, 0};

  AdmPoint x = initial_point(system, grid, start, options, spec);
  double rho = 0.0;
  bool certified = false;
  for (int k = 1;; ++k) {
    InnerResult inner = inner_alternation(system, grid, spec, rho, options, x, k, result.trace);
    result.outer_iterations = k;
    result.inner_iterations += inner.iterations;
    result.relaxed_failures += inner.relaxed_failures;
    x = std::move(inner.point);
    certified = inner.reason == BreakKind::kFirst || inner.reason == BreakKind::kSecond;
    result.rho_final = rho;
    if (weighted_penalty(x.v, x.v_tilde, modes) < options.penalty_stop_tol) break;
    const double next = k == 1 ? schedule.rho_initial : rho * schedule.increment_factor;
    if (next > schedule.rho_max * (1.0 + 1e-12)) break;
    rho = next;
  }

  const RelaxedControlPath v_onehot = x.v.is_one_hot() ? x.v : round_argmax(x.v);
  result.v_final = onehot_to_binary(v_onehot, modes);
  result.v_tilde_final = x.v_tilde;
  result.u_final = x.u;
  result.w_final = x.w;
  result.objective = objective(system, integrate(system, grid, x.u, v_onehot));
  result.penalty_value = penalty_term(result.v_final, x.v_tilde);
  const BinaryControlPath reprojected = dwell_project(v_onehot, modes, spec);
  result.feasible = check_feasible(result.v_final, spec).feasible &&
                    penalty_term(result.v_final, reprojected) == 0.0;
  result.certificate = certify(system, grid, spec, result.rho_final, options, x, certified);
  return result;
}

// ---------------------------------------------------------------------------

RelaxedSolveResult poc_lower_bound(const SwitchedSystem& system, const TimeGrid& grid,
                                   const RelaxedSolveOptions& options) {
  const ModeTable& modes = system.modes();
  return solve_relaxed_poc(system, grid, BinaryControlPath::constant(grid, modes.n_switches()), 0.0,
                           ContinuousControlPath::midpoint(grid, system.control_bounds()),
                           RelaxedControlPath::uniform(grid, modes.n_modes()), options);
}

namespace {

HeuristicResult finish_heuristic(const SwitchedSystem& system, const TimeGrid& grid,
                                 const CombinatorialSpec& spec, const RelaxedSolveResult& poc,
                                 const RelaxedControlPath& rounded) {
  const BinaryControlPath v = onehot_to_binary(rounded, system.modes());
  HeuristicResult h{poc.u, v, poc.w};
  h.objective = objective(system, integrate(system, grid, poc.u, rounded));
  h.relaxed_value = poc.value;
  h.deviation = cia_deviation(poc.w, rounded);
  h.feasible = check_feasible(v, spec).feasible;
  h.relaxed_converged = poc.converged;
  return h;
}

}  // namespace

HeuristicResult sur_heuristic(const SwitchedSystem& system, const TimeGrid& grid,
                              const CombinatorialSpec& spec, const RelaxedSolveOptions& options) {
  const RelaxedSolveResult poc = poc_lower_bound(system, grid, options);
  return finish_heuristic(system, grid, spec, poc, sum_up_rounding(poc.w));
}

HeuristicResult ciap_heuristic(const SwitchedSystem& system, const TimeGrid& grid,
                               const CombinatorialSpec& spec, const RelaxedSolveOptions& options,
                               const CiapOptions& ciap) {
  const RelaxedSolveResult poc = poc_lower_bound(system, grid, options);
  const CiapResult rounded = constrained_ciap(poc.w, system.modes(), spec, ciap);
  HeuristicResult h = finish_heuristic(system, grid, spec, poc, rounded.w);
  h.proven_optimal = rounded.proven_optimal;
  return h;
}

}  // namespace padm
