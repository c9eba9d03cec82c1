// Command-line front end: padm run | sweep | check.

#include <CLI11.hpp>

#include <iostream>

#include "padm/run.hpp"

namespace {

struct RunFlags {
  std::string config_file;
  std::string problem, scenario, problem_file, method, break_assignment, out;
  std::optional<double> tau_min, eps, rho_initial, rho_factor, rho_max;
  std::optional<int> n_intervals;
  std::optional<std::uint64_t> seed;
};

padm::RunConfig resolve(const RunFlags& f) {
  padm::RunConfig c = f.config_file.empty() ? padm::RunConfig{} : padm::load_run_config(f.config_file);
  if (!f.problem.empty()) c.problem = f.problem;
  if (!f.scenario.empty()) c.scenario = f.scenario;
  if (!f.problem_file.empty()) c.problem_file = f.problem_file;
  if (!f.method.empty()) c.method = f.method;
  if (!f.break_assignment.empty()) c.break_assignment = f.break_assignment;
  if (!f.out.empty()) c.output_path = f.out;
  if (f.tau_min) c.tau_min = *f.tau_min;
  if (f.n_intervals) c.n_intervals = *f.n_intervals;
  if (f.eps) c.epsilon = *f.eps;
  if (f.rho_initial) c.rho_initial = *f.rho_initial;
  if (f.rho_factor) c.increment_factor = *f.rho_factor;
  if (f.rho_max) c.rho_max = *f.rho_max;
  if (f.seed) c.seed = *f.seed;
  return c;
}

int run_command(const RunFlags& flags) {
  const padm::RunConfig config = resolve(flags);
  const padm::RunRecord record = padm::execute(config);
  const padm::ArtifactPaths paths = padm::write_artifacts(record, padm::output_directory(config));
  std::cout << config.method << " " << record.status << " objective=" << record.objective
            << " penalty=" << record.penalty_value << " feasible=" << (record.feasible ? 1 : 0)
            << " -> " << paths.result << "\n";
  return padm::exit_code(record);
}

int sweep_command(const std::string& file, const std::string& out) {
  const padm::SweepConfig config = padm::load_sweep_config(file);
  const std::string dir = out.empty() ? padm::output_directory(config.base) : out;
  const padm::SweepResult result = padm::run_sweep(config, dir);
  std::cout << result.table_path << "\n";
  return padm::kExitOk;
}

int check_command(const std::string& result_path) {
  const padm::RoundTrip rt = padm::check_round_trip(result_path);
  std::cout << "feasible=" << (rt.feasible ? 1 : 0) << " objective=" << padm::format_decimal(rt.objective)
            << (rt.matches ? " matches" : " MISMATCH") << "\n";
  return rt.matches ? padm::kExitOk : padm::kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalty alternating direction method for mixed-integer optimal control"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "solve one configuration");
  run->add_option("--config", flags.config_file, "JSON run configuration");
  run->add_option("--problem", flags.problem, "fuller | translines | custom-file");
  run->add_option("--scenario", flags.scenario, "translines preset: subgrid | coarse | extended_tree");
  run->add_option("--problem-file", flags.problem_file, "translines network JSON for custom-file");
  run->add_option("--method", flags.method, "poc | sur | ciap | adm | adm-sur | adm-ciap | oracle");
  run->add_option("--tau-min", flags.tau_min, "minimum dwell time");
  run->add_option("--n-intervals", flags.n_intervals, "control intervals / time steps");
  run->add_option("--eps", flags.eps, "inner-loop epsilon");
  run->add_option("--rho-initial", flags.rho_initial, "first positive penalty weight");
  run->add_option("--rho-factor", flags.rho_factor, "penalty increment factor");
  run->add_option("--rho-max", flags.rho_max, "largest penalty weight");
  run->add_option("--break-assignment", flags.break_assignment, "as-printed | template");
  run->add_option("--seed", flags.seed, "seed recorded with the run");
  run->add_option("--out", flags.out, "output directory (default $PADM_OUTPUT_DIR or .)");

  std::string sweep_file, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter x method table");
  sweep->add_option("config", sweep_file, "JSON sweep configuration")->required();
  sweep->add_option("--out", sweep_out, "output directory");

  std::string check_file;
  CLI::App* check = app.add_subcommand("check", "re-evaluate the stored control of a result");
  check->add_option("result", check_file, "result.json written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return padm::kExitConfig;
  }

  try {
    if (*run) return run_command(flags);
    if (*sweep) return sweep_command(sweep_file, sweep_out);
    return check_command(check_file);
  } catch (const padm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return padm::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return padm::kExitInternal;
  }
}
