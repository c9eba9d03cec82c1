#ifndef PADM_RUN_HPP_
#define PADM_RUN_HPP_

// Batch front end: run configurations, result records and their artifacts,
// parameter sweeps.

#include "padm/adm.hpp"
#include "padm/benchmarks.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace padm {

struct RunConfig {
  std::string problem = "fuller";  ///< fuller | translines | custom-file
  std::string scenario = "subgrid";
  std::string problem_file;        ///< translines network file for custom-file
  std::string method = "adm-sur";  ///< poc | sur | ciap | adm | adm-sur | adm-ciap | oracle
  std::optional<double> tau_min;   ///< problem default when absent
  std::optional<int> n_intervals;  ///< problem default when absent
  double epsilon = 1e-3;
  double rho_initial = 1e-3;
  double increment_factor = 10.0;
  double rho_max = 1e6;
  std::string break_assignment = "template";  ///< as-printed | template
  std::uint64_t seed = 0;
  std::string output_path;  ///< directory; empty selects the default

  void validate() const;
};

/// Problem instance described by the problem fields of a config.
Problem build_problem(const RunConfig& config);

struct RunRecord {
  RunConfig config;
  std::string status = "ok";  ///< ok | infeasible | error
  std::string message;
  double objective = 0.0;
  double penalty_value = 0.0;
  bool feasible = false;
  std::vector<int> switch_counts;
  std::optional<double> rho_final;
  int n_intervals = 0;  ///< effective grid size
  int min_dwell = 1;
  std::optional<double> lower_bound;
  std::optional<bool> proven_optimal;
  std::optional<PEpsCertificate> certificate;
  std::optional<int> outer_iterations;
  std::optional<int> inner_iterations;
  std::optional<long long> nodes_explored;
  double wall_time_seconds = 0.0;

  // Artifacts (written next to the record, not serialized in it).
  std::optional<ContinuousControlPath> u;
  std::optional<BinaryControlPath> v;
  std::optional<RelaxedControlPath> w;  ///< relaxed methods only
  std::optional<Trajectory> trajectory;
  std::vector<TraceEntry> trace;
};

/// Exit status of a run: 0 ok, 2 config error, 3 infeasible, 4 internal.
enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitInfeasible = 3, kExitInternal = 4 };

/// Executes one configuration. Throws ConfigError for invalid configs;
/// solver infeasibility is reported in the record.
RunRecord execute(const RunConfig& config);

int exit_code(const RunRecord& record);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Fixed-point notation with 12 significant digits, trailing zeros dropped.
std::string format_decimal(double value);

RunConfig load_run_config(const std::string& path);
/// Applies the keys of a JSON object text on top of `base`.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});
std::string run_config_json(const RunConfig& config);
/// Sets one field from its textual value; throws ConfigError for unknown
/// keys and malformed values.
void set_config_field(RunConfig& config, const std::string& key, const std::string& value);

TranslinesConfig load_translines_config(const std::string& path);

/// Result object with keys in fixed order; `include_wall_time` false drops
/// the only non-deterministic field.
std::string record_json(const RunRecord& record, bool include_wall_time = true);

struct ArtifactPaths {
  std::string result;
  std::string control;
  std::string states;
  std::string trace;
};

/// Output directory of a config: output_path, else $PADM_OUTPUT_DIR, else ".".
std::string output_directory(const RunConfig& config);

/// Writes result.json, control.csv, states.csv and trace.csv into `dir`.
ArtifactPaths write_artifacts(const RunRecord& record, const std::string& dir);

struct RoundTrip {
  bool feasible;
  double objective;
  bool matches;  ///< same feasible flag and objective within 1e-10
};

/// Reloads the control CSV written for a record and re-evaluates it.
RoundTrip check_round_trip(const std::string& result_json_path);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepConfig {
  RunConfig base;
  std::string parameter;  ///< a numeric RunConfig field
  std::vector<double> values;
  /// Method labels; "name@key=value,..." overrides fields for that column
  /// (N is shorthand for n_intervals).
  std::vector<std::string> methods;
};

SweepConfig load_sweep_config(const std::string& path);
SweepConfig parse_sweep_config(const std::string& json_text);

struct SweepCell {
  double value;
  std::string method;
  std::optional<RunRecord> record;
  std::string reason;  ///< why the cell is NA
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< row-major: values x methods
  std::string table_path;
};

/// Runs every cell sequentially into <dir>/cell_<row>_<col>/ and writes
/// sweep.csv (objectives, NA for failed cells), sweep_notes.csv (NA reasons)
/// and sweep_records.csv (penalty, feasibility, rho per cell).
SweepResult run_sweep(const SweepConfig& config, const std::string& dir);

}  // namespace padm

#endif  // PADM_RUN_HPP_
