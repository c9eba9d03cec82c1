#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "padm/run.hpp"

namespace padm {

namespace {

const std::set<std::string> kProblems{"fuller", "translines", "custom-file"};
const std::set<std::string> kMethods{"poc", "sur", "ciap", "adm", "adm-sur", "adm-ciap", "oracle"};
const std::set<std::string> kSweepParameters{"tau_min",          "n_intervals", "epsilon",
                                             "rho_initial",      "rho_max",     "seed",
                                             "increment_factor"};

}  // namespace

void RunConfig::validate() const {
  if (!kProblems.count(problem)) throw ConfigError("unknown problem '" + problem + "'");
  if (!kMethods.count(method)) throw ConfigError("unknown method '" + method + "'");
  if (problem == "custom-file" && problem_file.empty()) {
    throw ConfigError("problem custom-file needs problem_file");
  }
  if (tau_min && !(*tau_min > 0.0)) throw ConfigError("tau_min must be > 0");
  if (n_intervals && *n_intervals < 1) throw ConfigError("n_intervals must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  PenaltySchedule{rho_initial, increment_factor, rho_max}.validate();
  if (break_assignment != "as-printed" && break_assignment != "template") {
    throw ConfigError("break_assignment must be as-printed or template");
  }
}

Problem build_problem(const RunConfig& config) {
  if (config.problem == "fuller") {
    FullerConfig fc;
    fc.tau_min = config.tau_min.value_or(0.05);
    fc.n_intervals = config.n_intervals.value_or(100);
    return build_fuller(fc);
  }
  TranslinesConfig tc = config.problem == "translines"
                            ? TranslinesConfig::preset(config.scenario)
                            : load_translines_config(config.problem_file);
  if (config.tau_min) tc.tau_min = *config.tau_min;
  if (config.n_intervals) tc.n_time_steps = *config.n_intervals;
  return build_translines(tc);
}

namespace {

std::vector<int> switch_counts(const BinaryControlPath& v) {
  std::vector<int> counts;
  for (int c = 0; c < v.n_components(); ++c) counts.push_back(switch_count(v, c, 0, v.n_intervals()));
  return counts;
}

AdmVariant variant_of(const std::string& method) {
  if (method == "adm") return AdmVariant::kPlain;
  if (method == "adm-ciap") return AdmVariant::kCiap;
  return AdmVariant::kSur;
}

void fill_binary(RunRecord& r, const Problem& p, const ContinuousControlPath& u,
                 const BinaryControlPath& v) {
  r.u = u;
  r.v = v;
  r.switch_counts = switch_counts(v);
  r.trajectory = integrate(*p.system, p.grid, u, binary_to_onehot(v, p.system->modes()));
}

void solve(const RunConfig& config, const Problem& p, RunRecord& r) {
  const SwitchedSystem& sys = *p.system;
  const std::string& m = config.method;
  if (m == "poc") {
    const RelaxedSolveResult poc = poc_lower_bound(sys, p.grid);
    r.objective = poc.value;
    r.lower_bound = poc.value;
    r.feasible = false;
    r.u = poc.u;
    r.w = poc.w;
    r.trajectory = integrate(sys, p.grid, poc.u, poc.w);
    if (!poc.converged) r.message = "relaxed solve stopped before stationarity";
  } else if (m == "sur" || m == "ciap") {
    const HeuristicResult h =
        m == "sur" ? sur_heuristic(sys, p.grid, p.spec) : ciap_heuristic(sys, p.grid, p.spec);
    r.objective = h.objective;
    r.lower_bound = h.relaxed_value;
    r.feasible = h.feasible;
    if (m == "ciap") r.proven_optimal = h.proven_optimal;
    fill_binary(r, p, h.u, h.v);
    if (m == "ciap" && !h.feasible) r.status = "infeasible";
  } else if (m == "oracle") {
    const OracleResult o = global_oracle(sys, p.grid, p.spec);
    r.objective = o.best_value;
    r.proven_optimal = o.proven_optimal;
    r.nodes_explored = o.nodes_explored;
    r.feasible = check_feasible(o.best_control, p.spec).feasible;
    fill_binary(r, p, o.best_u, o.best_control);
    if (!r.feasible) r.status = "infeasible";
  } else {
    const PenaltySchedule schedule{config.rho_initial, config.increment_factor, config.rho_max};
    AdmOptions options;
    options.epsilon = config.epsilon;
    options.variant = variant_of(m);
    options.break_assignment = config.break_assignment == "template" ? BreakAssignment::kTemplate
                                                                     : BreakAssignment::kAsPrinted;
    const AdmResult a = adm_penalty(sys, p.grid, p.spec, schedule, options);
    r.objective = a.objective;
    r.penalty_value = a.penalty_value;
    r.feasible = a.feasible;
    r.rho_final = a.rho_final;
    r.certificate = a.certificate;
    r.outer_iterations = a.outer_iterations;
    r.inner_iterations = a.inner_iterations;
    r.lower_bound = poc_lower_bound(sys, p.grid).value;
    r.trace = a.trace;
    fill_binary(r, p, a.u_final, a.v_final);
    if (!a.feasible) r.status = "infeasible";
  }
}

}  // namespace

RunRecord execute(const RunConfig& config) {
  config.validate();
  const Problem p = build_problem(config);
  if (config.method == "oracle" && p.grid.n_intervals() > 32) {
    throw ConfigError("method oracle needs n_intervals <= 32, got " +
                      std::to_string(p.grid.n_intervals()));
  }
  RunRecord r;
  r.config = config;
  r.n_intervals = p.grid.n_intervals();
  r.min_dwell = p.spec.rule(0).min_dwell;
  const auto start = std::chrono::steady_clock::now();
  try {
    solve(config, p, r);
  } catch (const ConfigError&) {
    throw;
  } catch (const InfeasibleError& e) {
    r.status = "infeasible";
    r.message = e.what();
  } catch (const Error& e) {
    r.status = "error";
    r.message = e.what();
  }
  r.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int exit_code(const RunRecord& record) {
  if (record.status == "ok") return kExitOk;
  if (record.status == "infeasible") return kExitInfeasible;
  return kExitInternal;
}

// ---------------------------------------------------------------------------

namespace {

RunConfig cell_config(const SweepConfig& s, double value, const std::string& label) {
  RunConfig c = s.base;
  std::ostringstream v;
  v.precision(17);
  v << value;
  set_config_field(c, s.parameter, v.str());
  const auto at = label.find('@');
  c.method = label.substr(0, at);
  if (at != std::string::npos) {
    std::stringstream overrides(label.substr(at + 1));
    std::string item;
    while (std::getline(overrides, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("method label '" + label + "': expected key=value");
      set_config_field(c, item.substr(0, eq), item.substr(eq + 1));
    }
  }
  return c;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& s, const std::string& dir) {
  if (!kSweepParameters.count(s.parameter)) {
    throw ConfigError("sweep parameter '" + s.parameter + "' is not a numeric field");
  }
  std::filesystem::create_directories(dir);
  SweepResult result;
  for (std::size_t row = 0; row < s.values.size(); ++row) {
    for (std::size_t col = 0; col < s.methods.size(); ++col) {
      SweepCell cell{s.values[row], s.methods[col], std::nullopt, ""};
      const std::string cell_dir =
          (std::filesystem::path(dir) / ("cell_" + std::to_string(row) + "_" + std::to_string(col)))
              .string();
      try {
        RunConfig c = cell_config(s, s.values[row], s.methods[col]);
        c.output_path = cell_dir;
        RunRecord r = execute(c);
        write_artifacts(r, cell_dir);
        if (r.status != "ok") cell.reason = r.status + ": " + r.message;
        cell.record = std::move(r);
      } catch (const Error& e) {
        cell.reason = std::string("config: ") + e.what();
      }
      result.cells.push_back(std::move(cell));
    }
  }

  const std::filesystem::path base(dir);
  std::ofstream table(base / "sweep.csv");
  std::ofstream notes(base / "sweep_notes.csv");
  std::ofstream records(base / "sweep_records.csv");
  table << s.parameter;
  for (const auto& m : s.methods) table << "," << m;
  table << "\n";
  notes << s.parameter << ",method,reason\n";
  records << s.parameter << ",method,status,objective,penalty_value,feasible,rho_final\n";
  for (std::size_t row = 0; row < s.values.size(); ++row) {
    table << format_decimal(s.values[row]);
    for (std::size_t col = 0; col < s.methods.size(); ++col) {
      const SweepCell& cell = result.cells[row * s.methods.size() + col];
      const bool ok = cell.record && cell.record->status == "ok";
      table << "," << (ok ? format_decimal(cell.record->objective) : "NA");
      if (!ok) {
        std::string reason = cell.reason;
        for (char& ch : reason) {
          if (ch == ',' || ch == '\n') ch = ';';
        }
        notes << format_decimal(cell.value) << "," << cell.method << "," << reason << "\n";
      }
      if (cell.record) {
        const RunRecord& r = *cell.record;
        records << format_decimal(cell.value) << "," << cell.method << "," << r.status << ","
                << format_decimal(r.objective) << "," << format_decimal(r.penalty_value) << ","
                << (r.feasible ? "true" : "false") << ","
                << (r.rho_final ? format_decimal(*r.rho_final) : "NA") << "\n";
      }
    }
    table << "\n";
  }
  result.table_path = (base / "sweep.csv").string();
  return result;
}

}  // namespace padm
