#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "padm/run.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kScratch = fs::path(PADM_TEST_SCRATCH) / "cli";

int cli(const std::string& args) {
  const std::string cmd = std::string(PADM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh(const std::string& name) {
  const fs::path dir = kScratch / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json without_volatile(const fs::path& result) {
  Json j = Json::parse(slurp(result));
  j.erase("wall_time_seconds");
  j["config"].erase("output_path");
  return j;
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("exit codes") {
  const fs::path dir = fresh("codes");
  CHECK(cli("run --problem fuller --method sur --n-intervals 40 --out " + (dir / "ok").string()) == 0);
  CHECK(cli("run --method bogus --out " + (dir / "bad").string()) == 2);
  CHECK(cli("run --problem nowhere --out " + (dir / "bad").string()) == 2);
  CHECK(cli("run --method oracle --n-intervals 40 --out " + (dir / "bad").string()) == 2);
  CHECK(cli("run --tau-min -1 --out " + (dir / "bad").string()) == 2);
  CHECK(cli("run --frobnicate") == 2);
  CHECK(cli("") == 2);
  CHECK(cli("sweep " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("result records keep a fixed key order") {
  const fs::path dir = fresh("keys");
  REQUIRE(cli("run --problem fuller --method adm-sur --n-intervals 30 --out " + dir.string()) == 0);
  const Json j = Json::parse(slurp(dir / "result.json"));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected{
      "config",        "status",          "message",         "objective",         "penalty_value",
      "feasible",      "switch_counts",   "rho_final",       "n_intervals",       "min_dwell",
      "lower_bound",   "proven_optimal",  "certificate",     "outer_iterations",  "inner_iterations",
      "nodes_explored", "wall_time_seconds", "artifacts"};
  CHECK(keys == expected);
  CHECK(j["feasible"] == true);
  CHECK(j["certificate"]["holds"] == true);
  for (const char* f : {"control.csv", "states.csv", "trace.csv"}) CHECK(fs::exists(dir / f));
  const auto trace = lines(dir / "trace.csv");
  REQUIRE(trace.size() > 1);
  CHECK(trace[0].find("psi_rho") != std::string::npos);
}

TEST_CASE("runs are deterministic apart from wall time") {
  const fs::path a = fresh("det_a"), b = fresh("det_b");
  const std::string args = "run --problem translines --scenario coarse --method adm --out ";
  REQUIRE(cli(args + a.string()) == 0);
  REQUIRE(cli(args + b.string()) == 0);
  CHECK(without_volatile(a / "result.json") == without_volatile(b / "result.json"));
  CHECK(slurp(a / "control.csv") == slurp(b / "control.csv"));
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
}

TEST_CASE("stored controls round trip through the check command") {
  const fs::path dir = fresh("roundtrip");
  for (const char* method : {"sur", "ciap", "adm"}) {
    const fs::path sub = dir / method;
    REQUIRE(cli(std::string("run --problem translines --scenario coarse --method ") + method + " --out " +
                 sub.string()) == 0);
    CHECK(cli("check " + (sub / "result.json").string()) == 0);
    const padm::RoundTrip rt = padm::check_round_trip((sub / "result.json").string());
    CHECK(rt.matches);
  }
}

TEST_CASE("config files and flags compose") {
  const fs::path dir = fresh("config");
  std::ofstream(dir / "run.json") << R"({"problem": "fuller", "method": "ciap", "n_intervals": 24, "tau_min": 0.25})";
  REQUIRE(cli("run --config " + (dir / "run.json").string() + " --n-intervals 20 --out " + dir.string()) == 0);
  const Json j = Json::parse(slurp(dir / "result.json"));
  CHECK(j["config"]["method"] == "ciap");
  CHECK(j["n_intervals"] == 20);
  CHECK(j["min_dwell"] == 5);
  std::ofstream(dir / "bad.json") << R"({"problem": "fuller", "mystery": 3})";
  CHECK(cli("run --config " + (dir / "bad.json").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("output directory falls back to the environment") {
  const fs::path dir = fresh("env");
  const std::string cmd = "PADM_OUTPUT_DIR=" + dir.string() + " " + PADM_CLI +
                          " run --problem fuller --method poc --n-intervals 10 >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "result.json"));
}

TEST_CASE("sweeps write one table cell per run and NA for failures") {
  const fs::path dir = fresh("sweep");
  std::ofstream(dir / "sweep.json") << R"({
    "template": {"problem": "fuller", "tau_min": 0.1},
    "parameter": "n_intervals",
    "values": [20, 40],
    "methods": ["ciap", "oracle"]
  })";
  REQUIRE(cli("sweep " + (dir / "sweep.json").string() + " --out " + (dir / "out").string()) == 0);
  const auto table = lines(dir / "out" / "sweep.csv");
  REQUIRE(table.size() == 3);
  CHECK(table[0] == "n_intervals,ciap,oracle");
  CHECK(table[1].rfind("20,", 0) == 0);
  CHECK(table[1].find("NA") == std::string::npos);
  CHECK(table[2].rfind("40,", 0) == 0);
  CHECK(table[2].substr(table[2].size() - 3) == ",NA");
  const auto notes = lines(dir / "out" / "sweep_notes.csv");
  REQUIRE(notes.size() == 2);
  CHECK(notes[1].find("oracle") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "cell_0_1" / "result.json"));

  std::ofstream(dir / "empty.json") << R"({"parameter": "tau_min", "values": [], "methods": ["sur", "adm"]})";
  REQUIRE(cli("sweep " + (dir / "empty.json").string() + " --out " + (dir / "empty").string()) == 0);
  const auto header_only = lines(dir / "empty" / "sweep.csv");
  REQUIRE(header_only.size() == 1);
  CHECK(header_only[0] == "tau_min,sur,adm");

  std::ofstream(dir / "override.json") << R"({
    "template": {"problem": "fuller", "n_intervals": 60},
    "parameter": "tau_min",
    "values": [0.1, 0.15],
    "methods": ["ciap", "oracle@N=12"]
  })";
  REQUIRE(cli("sweep " + (dir / "override.json").string() + " --out " + (dir / "override").string()) == 0);
  const auto overridden = lines(dir / "override" / "sweep.csv");
  REQUIRE(overridden.size() == 3);
  CHECK(overridden[0] == "tau_min,ciap,oracle@N=12");
  CHECK(overridden[1].find("NA") == std::string::npos);
  CHECK(overridden[2].find("NA") == std::string::npos);
  const Json cell = Json::parse(slurp(dir / "override" / "cell_1_1" / "result.json"));
  CHECK(cell["n_intervals"] == 12);
  CHECK(cell["proven_optimal"] == true);

  std::ofstream(dir / "unknown.json") << R"({"parameter": "nonsense", "values": [1], "methods": ["sur"]})";
  CHECK(cli("sweep " + (dir / "unknown.json").string() + " --out " + (dir / "x").string()) == 2);
}

TEST_CASE("number formatting") {
  CHECK(padm::format_decimal(1.0) == "1");
  CHECK(padm::format_decimal(0.1) == "0.1");
  CHECK(padm::format_decimal(1.3034333333333334) == "1.30343333333");
}
