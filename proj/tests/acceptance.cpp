// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Wall-clock limits are part of each criterion.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "padm/run.hpp"

using namespace padm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += "; over time limit";
  }
  if (!o.pass) ++g_failures;
  std::printf("C%-2d %s  %s | %s | %.1fs (limit %.0fs)\n", id, o.pass ? "PASS" : "FAIL", title,
              o.detail.c_str(), secs, limit_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Eigen::MatrixXd random_simplex(std::mt19937& rng, int n, int m, double floor = 0.0) {
  std::uniform_real_distribution<double> unit(floor, 1.0);
  Eigen::MatrixXd w(n, m);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) w(k, i) = unit(rng);
    w.row(k) /= w.row(k).sum();
  }
  return w;
}

std::vector<std::vector<double>> rows(const Eigen::MatrixXd& w) {
  std::vector<std::vector<double>> out(w.rows(), std::vector<double>(w.cols()));
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    for (Eigen::Index i = 0; i < w.cols(); ++i) out[k][i] = w(k, i);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome closed_form() {
  const Problem p = build_fuller({0.05, 200});
  const auto u = ContinuousControlPath::midpoint(p.grid, p.system->control_bounds());
  const auto w = RelaxedControlPath::one_hot(p.grid, 2, std::vector<int>(200, 0));
  const double value = objective(*p.system, integrate(*p.system, p.grid, u, w));
  const double err = std::abs(value - 1.3034333333333334);
  return {err < 1e-8, "objective " + fmt("%.12f", value) + ", error " + fmt("%.1e", err)};
}

Outcome gradient_suite() {
  std::mt19937 rng(2718);
  double worst_fuller = 0.0, worst_lines = 0.0;
  auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = b.cwiseAbs().maxCoeff();
    return scale > 0 ? (a - b).cwiseAbs().maxCoeff() / scale : (a - b).cwiseAbs().maxCoeff();
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_vt = [&](const TimeGrid& g, int comps) {
    BinaryMatrix m(g.n_intervals(), comps);
    for (int k = 0; k < m.rows(); ++k) {
      for (int c = 0; c < comps; ++c) m(k, c) = static_cast<int>(rng() % 2);
    }
    return BinaryControlPath(g, m);
  };

  const Problem f = build_fuller({0.05, 50});
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd w = random_simplex(rng, 50, 2, 0.01);
    const Eigen::MatrixXd u(50, 0);
    const Eigen::MatrixXd weights = penalty_weights(random_vt(f.grid, 1), f.system->modes());
    const double rho = unit(rng);
    const PenalizedGradient g = adjoint_gradient(*f.system, f.grid, u, w, weights, rho);
    const Eigen::MatrixXd fd = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(*f.system, f.grid, u, x, weights, rho); }, w,
        1e-6);
    worst_fuller = std::max(worst_fuller, rel(g.w, fd));
  }

  const Problem t = build_translines(TranslinesConfig::coarse());
  const int n = t.grid.n_intervals();
  const ControlBounds box = t.system->control_bounds();
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd w = random_simplex(rng, n, 4, 0.01);
    Eigen::MatrixXd u(n, box.size());
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < box.size(); ++j) u(k, j) = box.lower[j] + (box.upper[j] - box.lower[j]) * unit(rng);
    }
    const Eigen::MatrixXd weights = penalty_weights(random_vt(t.grid, 2), t.system->modes());
    const double rho = unit(rng);
    const PenalizedGradient g = adjoint_gradient(*t.system, t.grid, u, w, weights, rho);
    const Eigen::MatrixXd fdu = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(*t.system, t.grid, x, w, weights, rho); }, u,
        1e-6);
    const Eigen::MatrixXd fdw = oracle::central_differences(
        [&](const Eigen::MatrixXd& x) { return penalized_objective(*t.system, t.grid, u, x, weights, rho); }, w,
        1e-6);
    worst_lines = std::max({worst_lines, rel(g.u, fdu), rel(g.w, fdw)});
  }
  return {worst_fuller <= 1e-5 && worst_lines <= 1e-5,
          "max relative error fuller " + fmt("%.1e", worst_fuller) + ", translines(coarse) " +
              fmt("%.1e", worst_lines) + " over 20 points each"};
}

// Single component: every input against min Hamming distance to the
// enumerated feasible set.
bool dp_single(long long& checked) {
  for (int n = 1; n <= 12; ++n) {
    const TimeGrid g(0, 1, n);
    for (int d = 1; d <= 3; ++d) {
      std::vector<unsigned> feasible;
      oracle::for_each_sequence(n, 2, [&](const oracle::Seq& s) {
        if (!oracle::feasible(s, d)) return;
        unsigned mask = 0;
        for (int k = 0; k < n; ++k) mask |= static_cast<unsigned>(s[k]) << k;
        feasible.push_back(mask);
      });
      ComponentRule r;
      r.min_dwell = d;
      const CombinatorialSpec spec = CombinatorialSpec::componentwise(1, r);
      BinaryMatrix m(n, 1);
      for (unsigned input = 0; input < (1u << n); ++input) {
        int best = n + 1;
        for (unsigned f : feasible) best = std::min(best, std::popcount(f ^ input));
        for (int k = 0; k < n; ++k) m(k, 0) = (input >> k) & 1u;
        const BinaryControlPath v(g, m);
        const BinaryControlPath p = dwell_project(v, spec);
        if (!check_feasible(p, spec).feasible || (p.values() - m).cwiseAbs().sum() != best) return false;
        ++checked;
      }
    }
  }
  return true;
}

// Two components. Modes are numbered with the first component as the high
// bit, so the L1 distance between configurations is the popcount of the XOR
// of their 2-bit codes and a whole sequence packs into 2N bits.
struct PairCase {
  int n;
  int d;
  std::vector<std::uint32_t> feasible_modewise;  // packed joint sequences
  std::vector<int> single_best;                  // per 1-component input mask
};

std::uint32_t pack(const oracle::Seq& modes) {
  std::uint32_t x = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) x |= static_cast<std::uint32_t>(modes[k]) << (2 * k);
  return x;
}

bool dp_pair_input(const PairCase& c, std::uint32_t input, bool modewise_oracle, const CombinatorialSpec& cw,
                   const CombinatorialSpec& mw, const TimeGrid& g) {
  BinaryMatrix m(c.n, 2);
  unsigned c0 = 0, c1 = 0;
  for (int k = 0; k < c.n; ++k) {
    const int mode = (input >> (2 * k)) & 3u;
    m(k, 0) = mode >> 1;
    m(k, 1) = mode & 1;
    c0 |= static_cast<unsigned>(m(k, 0)) << k;
    c1 |= static_cast<unsigned>(m(k, 1)) << k;
  }
  const BinaryControlPath v(g, m);
  // componentwise: the feasible set is a product, so the exhaustive minimum
  // is the sum of the exhaustive per-component minima
  const BinaryControlPath pc = dwell_project(v, cw);
  if (!check_feasible(pc, cw).feasible) return false;
  if ((pc.values() - m).cwiseAbs().sum() != c.single_best[c0] + c.single_best[c1]) return false;
  if (modewise_oracle) {
    int best = 2 * c.n + 1;
    for (std::uint32_t f : c.feasible_modewise) best = std::min(best, std::popcount(f ^ input));
    const BinaryControlPath pm = dwell_project(v, mw);
    if (!check_feasible(pm, mw).feasible || (pm.values() - m).cwiseAbs().sum() != best) return false;
  }
  return true;
}

Outcome dp_sweep() {
  long long single = 0, pair_all = 0, pair_modewise_all = 0, pair_sampled = 0;
  if (!dp_single(single)) return {false, "single-component mismatch"};
  std::mt19937 rng(99);
  constexpr int kAllComponentwise = 10;  // every pair input up to this N
  constexpr int kAllModewise = 7;        // every pair input with the joint oracle up to this N
  for (int n = 1; n <= 12; ++n) {
    const TimeGrid g(0, 1, n);
    for (int d = 1; d <= 3; ++d) {
      ComponentRule r;
      r.min_dwell = d;
      const CombinatorialSpec cw = CombinatorialSpec::componentwise(2, r);
      const CombinatorialSpec mw = CombinatorialSpec::modewise(r);
      PairCase c{n, d, {}, std::vector<int>(1u << n, n + 1)};
      std::vector<unsigned> single_feasible;
      oracle::for_each_sequence(n, 2, [&](const oracle::Seq& s) {
        if (!oracle::feasible(s, d)) return;
        unsigned mask = 0;
        for (int k = 0; k < n; ++k) mask |= static_cast<unsigned>(s[k]) << k;
        single_feasible.push_back(mask);
      });
      for (unsigned input = 0; input < (1u << n); ++input) {
        for (unsigned f : single_feasible) c.single_best[input] = std::min(c.single_best[input], std::popcount(f ^ input));
      }
      // d = 1 admits every sequence; enumerating 4^12 of them is pointless
      // since the input itself is then the unique zero-cost projection
      const bool joint_oracle = n <= 9 || d > 1;
      if (joint_oracle) {
        oracle::for_each_sequence(n, 4, [&](const oracle::Seq& s) {
          if (oracle::feasible(s, d)) c.feasible_modewise.push_back(pack(s));
        });
      }
      const std::uint64_t total = 1ull << (2 * n);
      if (n <= kAllComponentwise) {
        for (std::uint64_t input = 0; input < total; ++input) {
          const bool mw_check = n <= kAllModewise;
          if (!dp_pair_input(c, static_cast<std::uint32_t>(input), mw_check, cw, mw, g)) {
            return {false, "pair mismatch at N=" + std::to_string(n) + " d=" + std::to_string(d)};
          }
          ++pair_all;
          pair_modewise_all += mw_check;
        }
      }
      if (n > kAllModewise) {
        // sampled inputs against the full joint enumeration
        const int samples = c.feasible_modewise.size() > 2'000'000 ? 40 : 200;
        for (int s = 0; s < samples; ++s) {
          const auto input = static_cast<std::uint32_t>(rng() & (total - 1));
          bool ok;
          if (joint_oracle) {
            ok = dp_pair_input(c, input, true, cw, mw, g);
          } else {
            ok = dp_pair_input(c, input, false, cw, mw, g);
            BinaryMatrix m(n, 2);
            for (int k = 0; k < n; ++k) {
              m(k, 0) = (input >> (2 * k + 1)) & 1u;
              m(k, 1) = (input >> (2 * k)) & 1u;
            }
            ok = ok && dwell_project(BinaryControlPath(g, m), mw).values() == m;
          }
          if (!ok) return {false, "sampled pair mismatch at N=" + std::to_string(n) + " d=" + std::to_string(d)};
          ++pair_sampled;
        }
      }
    }
  }
  return {true, "M=1: all " + std::to_string(single) + " inputs N<=12; M=2 componentwise: all inputs N<=" +
                    std::to_string(kAllComponentwise) + " (" + std::to_string(pair_all) +
                    "); M=2 modewise: all inputs N<=" + std::to_string(kAllModewise) + " (" +
                    std::to_string(pair_modewise_all) + "); N up to 12 beyond that: " +
                    std::to_string(pair_sampled) + " sampled inputs vs full enumeration of the feasible set"};
}

Outcome bnb_sweep() {
  std::mt19937 rng(4242);
  const ModeTable modes = enumerate_modes(1);
  int proven = 0, equal = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int d = 1 + static_cast<int>(rng() % 3);
    const TimeGrid g(0, 1, n);
    const Eigen::MatrixXd w = random_simplex(rng, n, 2);
    ComponentRule r;
    r.min_dwell = d;
    const CiapResult res = constrained_ciap(RelaxedControlPath(g, w), modes, CombinatorialSpec::modewise(r));
    const double ref = oracle::min_deviation(rows(w), g.step(), d);
    const double diff = std::abs(res.deviation - ref);
    worst = std::max(worst, diff);
    proven += res.proven_optimal;
    equal += diff <= 1e-12 && oracle::feasible(res.w.selected_modes(), d);
  }
  return {proven == 200 && equal == 200, std::to_string(equal) + "/200 equal to enumeration (max |diff| " +
                                             fmt("%.1e", worst) + "), " + std::to_string(proven) +
                                             "/200 proven optimal"};
}

Outcome sur_bound() {
  std::mt19937 rng(31337);
  double worst_ratio = 0.0;
  int ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 200);
    const int m = 2 + static_cast<int>(rng() % 3);
    const TimeGrid g(0, 1, n);
    const Eigen::MatrixXd w = random_simplex(rng, n, m);
    const RelaxedControlPath v = sum_up_rounding(RelaxedControlPath(g, w));
    const double dev = cia_deviation(RelaxedControlPath(g, w), v);
    const double ref = oracle::deviation(rows(w), v.selected_modes(), g.step());
    const double bound = (m - 1) * g.step();
    worst_ratio = std::max(worst_ratio, dev / bound);
    ok += v.is_one_hot() && dev <= bound + 1e-12 && std::abs(dev - ref) <= 1e-12;
  }
  return {ok == 1000, std::to_string(ok) + "/1000 within bound, max deviation/bound " + fmt("%.3f", worst_ratio)};
}

RunRecord run(RunConfig c) { return execute(c); }

RunConfig fuller_config(const std::string& method, double tau, int n) {
  RunConfig c;
  c.problem = "fuller";
  c.method = method;
  c.tau_min = tau;
  c.n_intervals = n;
  return c;
}

std::vector<std::pair<std::string, RunRecord>> g_fuller_adm;  // criterion 6 runs, reused by 8

Outcome fuller_end_to_end() {
  bool pass = true;
  std::ostringstream os;
  for (double tau : {0.02, 0.05, 0.10}) {
    os << "tau=" << tau << ":";
    for (const char* method : {"adm", "adm-sur"}) {
      const RunRecord r = run(fuller_config(method, tau, 100));
      const bool ok = r.status == "ok" && r.feasible && r.penalty_value < 1e-4 && r.lower_bound &&
                      r.objective >= *r.lower_bound - 1e-6;
      pass = pass && ok;
      os << " " << method << "=" << fmt("%.4e", r.objective) << (ok ? "" : "(BAD)");
      g_fuller_adm.emplace_back(std::string(method) + "@" + fmt("%.2f", tau), r);
    }
    const RunRecord sur = run(fuller_config("sur", tau, 100));
    pass = pass && !sur.feasible;
    os << " sur feasible=" << (sur.feasible ? "true(BAD)" : "false") << "; ";
  }
  return {pass, os.str()};
}

Outcome oracle_sandwich() {
  bool pass = true;
  std::ostringstream os;
  for (double tau : {0.10, 0.15}) {
    const RunRecord o = run(fuller_config("oracle", tau, 20));
    pass = pass && o.proven_optimal.value_or(false);
    os << "tau=" << tau << " (d=" << o.min_dwell << ") oracle=" << fmt("%.6e", o.objective)
       << (o.proven_optimal.value_or(false) ? "" : "(unproven)") << " gaps:";
    for (const char* method : {"ciap", "adm", "adm-sur"}) {
      const RunRecord r = run(fuller_config(method, tau, 20));
      const double gap = r.objective - o.objective;
      const bool ok = r.feasible && gap >= -1e-12;
      pass = pass && ok;
      os << " " << method << "=" << fmt("%+.3e", gap) << (ok ? "" : "(BAD)");
    }
    os << "; ";
  }
  return {pass, os.str()};
}

Outcome certificates() {
  if (g_fuller_adm.empty()) return {false, "criterion 6 produced no runs"};
  bool pass = true;
  double worst_poc = -std::numeric_limits<double>::infinity(), worst_mip = 0.0;
  for (const auto& [label, r] : g_fuller_adm) {
    if (!r.certificate) {
      pass = false;
      continue;
    }
    worst_mip = std::max(worst_mip, r.certificate->mip_slack);
    worst_poc = std::max(worst_poc, r.certificate->poc_slack);
    pass = pass && r.certificate->mip_slack == 0.0 && r.certificate->poc_slack < 1e-3;
  }
  return {pass, std::to_string(g_fuller_adm.size()) + " runs: max MIP slack " + fmt("%.1e", worst_mip) +
                    ", max POC slack " + fmt("%.2e", worst_poc)};
}

Outcome translines_small() {
  RunConfig base;
  base.problem = "translines";
  base.scenario = "subgrid";
  base.tau_min = 1.0;
  const Problem p = build_problem(base);
  std::ostringstream os;
  bool pass = true;
  double poc = 0.0, best_feasible = std::numeric_limits<double>::infinity();
  for (const char* method : {"poc", "sur", "ciap", "adm", "adm-sur"}) {
    RunConfig c = base;
    c.method = method;
    const RunRecord r = run(c);
    const std::string m = method;
    if (m == "poc") {
      poc = r.objective;
      os << "poc=" << fmt("%.5f", r.objective);
      continue;
    }
    const bool feasible = r.v && check_feasible(*r.v, p.spec).feasible;
    if (feasible) best_feasible = std::min(best_feasible, r.objective);
    const bool ok = m == "sur" ? !feasible : feasible;
    pass = pass && ok;
    os << " " << m << "=" << fmt("%.5f", r.objective) << (feasible ? "" : "(infeasible)") << (ok ? "" : "(BAD)");
  }
  pass = pass && poc <= best_feasible;
  os << "; poc <= best feasible " << fmt("%.5f", best_feasible);
  return {pass, os.str()};
}

Outcome rho_factor_sweep() {
  // The emitted table mirrors the increment-factor study: plain ADM against
  // ADM with CIAP rounding. ADM-SUR runs the same rows in a side sweep.
  SweepConfig s;
  s.base.problem = "translines";
  s.base.scenario = "coarse";
  s.parameter = "increment_factor";
  s.values = {10.0, std::sqrt(10.0)};
  s.methods = {"adm", "adm-ciap"};
  const std::filesystem::path root = std::filesystem::path(PADM_TEST_SCRATCH) / "acceptance_sweep";
  std::filesystem::remove_all(root);
  const SweepResult a = run_sweep(s, (root / "a").string());
  const SweepResult b = run_sweep(s, (root / "b").string());
  SweepConfig side = s;
  side.methods = {"adm-sur"};
  const SweepResult c = run_sweep(side, (root / "sur").string());
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string table = slurp(a.table_path);
  const bool deterministic = table == slurp(b.table_path);
  bool pass = deterministic && a.cells.size() == 4 && c.cells.size() == 2;
  std::map<std::string, std::pair<double, double>> spread;
  std::vector<SweepCell> cells = a.cells;
  cells.insert(cells.end(), c.cells.begin(), c.cells.end());
  for (const SweepCell& cell : cells) {
    const bool ok = cell.record && cell.record->status == "ok" && cell.record->penalty_value < 1e-4 &&
                    cell.record->feasible;
    pass = pass && ok;
    if (!cell.record) continue;
    auto [it, fresh] = spread.try_emplace(cell.method, cell.record->objective, cell.record->objective);
    it->second.first = std::min(it->second.first, cell.record->objective);
    it->second.second = std::max(it->second.second, cell.record->objective);
  }
  std::string flat = table;
  for (char& ch : flat) {
    if (ch == '\n') ch = ';';
  }
  std::string detail = "table [" + flat + "] deterministic=" + (deterministic ? "yes" : "no") + "; spread";
  for (const auto& [method, range] : spread) detail += " " + method + " " + fmt("%.2e", range.second - range.first);
  return {pass, detail + " (adm-sur from side sweep)"};
}

}  // namespace

int main() {
  criterion(1, "closed-form fuller v=0, N=200", 1, closed_form);
  criterion(2, "adjoint vs central differences", 30, gradient_suite);
  criterion(3, "dwell projection vs enumeration", 60, dp_sweep);
  criterion(4, "constrained CIAP vs enumeration", 60, bnb_sweep);
  criterion(5, "sum-up rounding deviation bound", 10, sur_bound);
  criterion(6, "ADM end-to-end on fuller N=100", 120, fuller_end_to_end);
  criterion(7, "oracle sandwich on fuller N=20", 60, oracle_sandwich);
  criterion(8, "p-eps certificate of criterion 6 runs", 1, certificates);
  criterion(9, "translines subgrid ordering", 120, translines_small);
  criterion(10, "rho increment factor sweep", 120, rho_factor_sweep);
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
