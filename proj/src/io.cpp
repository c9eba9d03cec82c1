#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "padm/run.hpp"

namespace padm {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_decimal(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
  const int decimals = std::clamp(11 - exponent, 0, 340);
  std::vector<char> buf(400);
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  std::string out(buf.data());
  if (out.find('.') != std::string::npos) {
    out.erase(out.find_last_not_of('0') + 1);
    if (out.back() == '.') out.pop_back();
  }
  return out;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ConfigError("field " + key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v)) throw ConfigError("field " + key + ": expected an integer, got " + text);
  return static_cast<long long>(v);
}

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "null";
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ConfigError("expected a scalar value, got " + v.dump());
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void set_config_field(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "problem") {
    c.problem = value;
  } else if (key == "scenario") {
    c.scenario = value;
  } else if (key == "problem_file") {
    c.problem_file = value;
  } else if (key == "method") {
    c.method = value;
  } else if (key == "tau_min") {
    c.tau_min = value == "null" ? std::nullopt : std::optional<double>(parse_double(key, value));
  } else if (key == "n_intervals" || key == "N") {
    c.n_intervals = value == "null"
                        ? std::nullopt
                        : std::optional<int>(static_cast<int>(parse_integer(key, value)));
  } else if (key == "epsilon" || key == "eps") {
    c.epsilon = parse_double(key, value);
  } else if (key == "rho_initial") {
    c.rho_initial = parse_double(key, value);
  } else if (key == "increment_factor" || key == "rho_factor") {
    c.increment_factor = parse_double(key, value);
  } else if (key == "rho_max") {
    c.rho_max = parse_double(key, value);
  } else if (key == "break_assignment") {
    c.break_assignment = value;
  } else if (key == "seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw ConfigError("field seed: must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "output_path" || key == "out") {
    c.output_path = value;
  } else {
    throw ConfigError("unknown config field '" + key + "'");
  }
}

RunConfig parse_run_config(const std::string& json_text, RunConfig base) {
  const Json j = parse_json(json_text, "run config");
  if (!j.is_object()) throw ConfigError("run config: expected a JSON object");
  for (const auto& [key, value] : j.items()) set_config_field(base, key, json_scalar_text(value));
  return base;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

namespace {

Json config_to_json(const RunConfig& c) {
  Json j;
  j["problem"] = c.problem;
  j["scenario"] = c.scenario;
  j["problem_file"] = c.problem_file;
  j["method"] = c.method;
  j["tau_min"] = optional_json(c.tau_min);
  j["n_intervals"] = optional_json(c.n_intervals);
  j["epsilon"] = c.epsilon;
  j["rho_initial"] = c.rho_initial;
  j["increment_factor"] = c.increment_factor;
  j["rho_max"] = c.rho_max;
  j["break_assignment"] = c.break_assignment;
  j["seed"] = c.seed;
  j["output_path"] = c.output_path;
  return j;
}

}  // namespace

std::string run_config_json(const RunConfig& config) { return config_to_json(config).dump(2); }

TranslinesConfig load_translines_config(const std::string& path) {
  const Json j = parse_json(read_file(path), "network file " + path);
  TranslinesConfig c;
  try {
    for (const auto& line : j.at("lines")) {
      c.lines.push_back({line.at("from").get<std::string>(), line.at("to").get<std::string>(),
                         line.value("length", 1.0)});
    }
    c.speed_forward = j.value("speed_forward", c.speed_forward);
    c.speed_backward = j.value("speed_backward", c.speed_backward);
    if (j.contains("damping")) c.damping = j.at("damping").get<std::vector<double>>();
    c.switch_groups = j.at("switch_groups").get<std::vector<std::vector<int>>>();
    for (const auto& p : j.at("producers")) {
      c.producers.push_back({p.at("node").get<std::string>(), p.value("lower", 0.0),
                             p.value("upper", 2.0)});
    }
    for (const auto& s : j.at("consumers")) {
      TranslinesConsumer consumer{s.at("node").get<std::string>(), {}};
      for (const auto& knot : s.at("demand")) {
        consumer.demand.knots.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
      }
      c.consumers.push_back(std::move(consumer));
    }
    c.volumes_per_line = j.value("volumes_per_line", c.volumes_per_line);
    c.n_time_steps = j.value("n_time_steps", c.n_time_steps);
    c.horizon = j.value("horizon", c.horizon);
    c.tau_min = j.value("tau_min", c.tau_min);
    const std::string rep = j.value("representation", std::string("componentwise"));
    if (rep == "componentwise") {
      c.representation = Representation::kComponentwise;
    } else if (rep == "modewise") {
      c.representation = Representation::kModewise;
    } else {
      throw ConfigError("representation must be componentwise or modewise");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("network file " + path + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string record_json(const RunRecord& r, bool include_wall_time) {
  Json j;
  j["config"] = config_to_json(r.config);
  j["status"] = r.status;
  j["message"] = r.message;
  j["objective"] = r.objective;
  j["penalty_value"] = r.penalty_value;
  j["feasible"] = r.feasible;
  j["switch_counts"] = r.switch_counts;
  j["rho_final"] = optional_json(r.rho_final);
  j["n_intervals"] = r.n_intervals;
  j["min_dwell"] = r.min_dwell;
  j["lower_bound"] = optional_json(r.lower_bound);
  j["proven_optimal"] = optional_json(r.proven_optimal);
  if (r.certificate) {
    Json c;
    c["mip_slack"] = r.certificate->mip_slack;
    c["poc_slack"] = r.certificate->poc_slack;
    c["poc_relaxed_slack"] = r.certificate->poc_relaxed_slack;
    c["epsilon"] = r.certificate->epsilon;
    c["inner_certified"] = r.certificate->inner_certified;
    c["holds"] = r.certificate->holds();
    j["certificate"] = c;
  } else {
    j["certificate"] = nullptr;
  }
  j["outer_iterations"] = optional_json(r.outer_iterations);
  j["inner_iterations"] = optional_json(r.inner_iterations);
  j["nodes_explored"] = optional_json(r.nodes_explored);
  if (include_wall_time) j["wall_time_seconds"] = r.wall_time_seconds;
  Json a;
  a["control"] = "control.csv";
  a["states"] = "states.csv";
  a["trace"] = "trace.csv";
  j["artifacts"] = a;
  return j.dump(2);
}

std::string output_directory(const RunConfig& config) {
  if (!config.output_path.empty()) return config.output_path;
  if (const char* env = std::getenv("PADM_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ',';
    s += parts[i];
  }
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  Csv csv;
  std::string line;
  if (std::getline(in, line)) csv.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) csv.rows.push_back(split(line));
  }
  return csv;
}

}  // namespace

ArtifactPaths write_artifacts(const RunRecord& r, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  ArtifactPaths paths{(base / "result.json").string(), (base / "control.csv").string(),
                      (base / "states.csv").string(), (base / "trace.csv").string()};
  write_text(paths.result, record_json(r) + "\n");

  std::ostringstream control;
  std::vector<std::string> header{"t"};
  const TimeGrid* grid = nullptr;
  if (r.v) {
    grid = &r.v->grid();
    for (int c = 0; c < r.v->n_components(); ++c) header.push_back("v" + std::to_string(c + 1));
  } else if (r.w) {
    grid = &r.w->grid();
    for (int i = 0; i < r.w->n_modes(); ++i) header.push_back("w" + std::to_string(i + 1));
  }
  std::vector<std::string> u_names;
  if (r.u && r.u->n_channels() > 0) {
    const Problem p = build_problem(r.config);
    u_names = p.system->control_names();
    header.insert(header.end(), u_names.begin(), u_names.end());
  }
  control << join(header) << "\n";
  if (grid) {
    for (int k = 0; k < grid->n_intervals(); ++k) {
      std::vector<std::string> row{format_decimal(grid->node(k))};
      if (r.v) {
        for (int c = 0; c < r.v->n_components(); ++c) row.push_back(std::to_string((*r.v)(k, c)));
      } else {
        for (int i = 0; i < r.w->n_modes(); ++i) row.push_back(format_decimal((*r.w)(k, i)));
      }
      for (std::size_t q = 0; q < u_names.size(); ++q) {
        row.push_back(format_decimal(r.u->values()(k, static_cast<int>(q))));
      }
      control << join(row) << "\n";
    }
  }
  write_text(paths.control, control.str());

  std::ostringstream states;
  if (r.trajectory) {
    const Problem p = build_problem(r.config);
    std::vector<std::string> names{"t"};
    const auto state_names = p.system->state_names();
    names.insert(names.end(), state_names.begin(), state_names.end());
    states << join(names) << "\n";
    for (int k = 0; k <= r.trajectory->grid.n_intervals(); ++k) {
      std::vector<std::string> row{format_decimal(r.trajectory->grid.node(k))};
      for (int i = 0; i < r.trajectory->states.cols(); ++i) {
        row.push_back(format_decimal(r.trajectory->states(k, i)));
      }
      states << join(row) << "\n";
    }
  } else {
    states << "t\n";
  }
  write_text(paths.states, states.str());

  std::ostringstream trace;
  trace << "outer,inner,rho,step,psi_rho,psi,penalty,psi_rho_before,psi_before,fired,"
           "relaxed_converged,kept_psi_rho,alternative_psi_rho\n";
  for (const TraceEntry& e : r.trace) {
    trace << join({std::to_string(e.outer), std::to_string(e.inner), format_decimal(e.rho), e.step,
                   format_decimal(e.psi_rho), format_decimal(e.psi), format_decimal(e.penalty),
                   format_decimal(e.psi_rho_before), format_decimal(e.psi_before),
                   to_string(e.fired), e.relaxed_converged ? "1" : "0",
                   format_decimal(e.kept_psi_rho), format_decimal(e.alternative_psi_rho)})
          << "\n";
  }
  write_text(paths.trace, trace.str());
  return paths;
}

RoundTrip check_round_trip(const std::string& result_json_path) {
  const Json j = parse_json(read_file(result_json_path), result_json_path);
  const RunConfig config = parse_run_config(j.at("config").dump());
  const Problem p = build_problem(config);
  const fs::path dir = fs::path(result_json_path).parent_path();
  const Csv csv = read_csv((dir / j.at("artifacts").at("control").get<std::string>()).string());
  const ModeTable& modes = p.system->modes();
  const int n = p.grid.n_intervals();
  if (static_cast<int>(csv.rows.size()) != n) throw DimensionError("control CSV row count differs");

  std::vector<int> v_cols, w_cols, u_cols;
  const auto u_names = p.system->control_names();
  for (std::size_t c = 1; c < csv.header.size(); ++c) {
    const std::string& h = csv.header[c];
    if (std::find(u_names.begin(), u_names.end(), h) != u_names.end()) {
      u_cols.push_back(static_cast<int>(c));
    } else if (h[0] == 'v') {
      v_cols.push_back(static_cast<int>(c));
    } else if (h[0] == 'w') {
      w_cols.push_back(static_cast<int>(c));
    }
  }
  const ControlBounds bounds = p.system->control_bounds();
  Eigen::MatrixXd u(n, bounds.size());
  if (static_cast<int>(u_cols.size()) != bounds.size()) {
    throw DimensionError("control CSV lacks continuous control columns");
  }
  for (int k = 0; k < n; ++k) {
    for (std::size_t q = 0; q < u_cols.size(); ++q) {
      u(k, static_cast<int>(q)) = parse_double("u", csv.rows[k][u_cols[q]]);
    }
  }
  const ContinuousControlPath u_path(p.grid, u, bounds);

  RoundTrip rt{false, 0.0, false};
  if (!v_cols.empty()) {
    BinaryMatrix v(n, static_cast<int>(v_cols.size()));
    for (int k = 0; k < n; ++k) {
      for (std::size_t c = 0; c < v_cols.size(); ++c) {
        v(k, static_cast<int>(c)) = static_cast<int>(parse_integer("v", csv.rows[k][v_cols[c]]));
      }
    }
    const BinaryControlPath path(p.grid, v);
    rt.feasible = check_feasible(path, p.spec).feasible;
    rt.objective =
        objective(*p.system, integrate(*p.system, p.grid, u_path, binary_to_onehot(path, modes)));
  } else {
    Eigen::MatrixXd w(n, static_cast<int>(w_cols.size()));
    for (int k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < w_cols.size(); ++i) {
        w(k, static_cast<int>(i)) = parse_double("w", csv.rows[k][w_cols[i]]);
      }
      w.row(k) /= w.row(k).sum();  // undo the rounding of the printed digits
    }
    rt.feasible = false;
    rt.objective = objective(*p.system, integrate(*p.system, p.grid, u_path,
                                                  RelaxedControlPath(p.grid, w)));
  }
  rt.matches = rt.feasible == j.at("feasible").get<bool>() &&
               std::abs(rt.objective - j.at("objective").get<double>()) <= 1e-10;
  return rt;
}

// ---------------------------------------------------------------------------

SweepConfig parse_sweep_config(const std::string& json_text) {
  const Json j = parse_json(json_text, "sweep config");
  SweepConfig s;
  try {
    if (j.contains("template")) s.base = parse_run_config(j.at("template").dump());
    s.parameter = j.at("parameter").get<std::string>();
    s.values = j.value("values", std::vector<double>{});
    s.methods = j.at("methods").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep config: ") + e.what());
  }
  if (s.methods.empty()) throw ConfigError("sweep config: no methods");
  if (s.values.size() * s.methods.size() > 100) {
    throw ConfigError("sweep config: more than 100 cells");
  }
  RunConfig probe = s.base;
  set_config_field(probe, s.parameter, "1");  // rejects unknown parameters early
  return s;
}

SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(read_file(path)); }

}  // namespace padm
