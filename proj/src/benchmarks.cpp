#include "padm/benchmarks.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace padm {

// ---------------------------------------------------------------------------
// Fuller
// ---------------------------------------------------------------------------

void FullerConfig::validate() const {
  if (!(tau_min > 0.0 && tau_min <= 0.5)) throw ConfigError("fuller: tau_min must lie in (0, 0.5]");
  if (n_intervals < 1) throw ConfigError("fuller: n_intervals must be >= 1");
}

FullerSystem::FullerSystem() : modes_(enumerate_modes(1)) {}

Eigen::VectorXd FullerSystem::initial_state() const { return Eigen::Vector3d(0.01, 0.0, 0.0); }

void FullerSystem::rhs(double, const Eigen::VectorXd& y, const Eigen::VectorXd&, int mode,
                       Eigen::VectorXd& dy) const {
  dy.resize(3);
  dy[0] = y[1];
  dy[1] = 1.0 - 2.0 * modes_.entry(mode, 0);
  dy[2] = y[0] * y[0];
}

void FullerSystem::jacobians(double, const Eigen::VectorXd& y, const Eigen::VectorXd&, int,
                             Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const {
  dfdy.setZero(3, 3);
  dfdy(0, 1) = 1.0;
  dfdy(2, 0) = 2.0 * y[0];
  dfdu.resize(3, 0);
}

double FullerSystem::terminal_cost(const Eigen::VectorXd& y) const {
  const double e = y[0] - 0.01;
  return y[2] + e * e + y[1] * y[1];
}

Eigen::VectorXd FullerSystem::terminal_gradient(const Eigen::VectorXd& y) const {
  return Eigen::Vector3d(2.0 * (y[0] - 0.01), 2.0 * y[1], 1.0);
}

Problem build_fuller(const FullerConfig& config) {
  config.validate();
  TimeGrid grid(0.0, 1.0, config.n_intervals);
  ComponentRule rule;
  rule.min_dwell = dwell_intervals(config.tau_min, grid);
  return Problem{std::make_shared<FullerSystem>(), grid, CombinatorialSpec::componentwise(1, rule),
                 "fuller"};
}

// ---------------------------------------------------------------------------
// Transmission lines: configuration
// ---------------------------------------------------------------------------

double DemandProfile::operator()(double t) const {
  if (knots.empty()) return 0.0;
  if (t < knots.front().first) return knots.front().second;
  std::size_t i = 0;
  while (i + 1 < knots.size() && knots[i + 1].first <= t) ++i;
  if (i + 1 == knots.size()) return knots[i].second;
  const auto [t0, v0] = knots[i];
  const auto [t1, v1] = knots[i + 1];
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

void TranslinesConfig::validate() const {
  if (lines.empty()) throw ConfigError("translines: no lines");
  if (!(speed_forward > 0.0) || !(speed_backward < 0.0)) {
    throw ConfigError("translines: need speed_forward > 0 > speed_backward");
  }
  if (damping.size() != 4) throw ConfigError("translines: damping needs 4 entries");
  if (damping[1] != damping[2]) throw ConfigError("translines: damping must be symmetric");
  for (double b : damping) {
    if (!(b >= 0.0)) throw ConfigError("translines: damping entries must be non-negative");
  }
  if (volumes_per_line < 1 || n_time_steps < 1 || !(horizon > 0.0) || !(tau_min > 0.0)) {
    throw ConfigError("translines: volumes, steps, horizon and tau_min must be positive");
  }
  if (switch_groups.empty()) throw ConfigError("translines: need at least one switch group");
  for (const auto& group : switch_groups) {
    if (group.empty()) throw ConfigError("translines: empty switch group");
    for (int l : group) {
      if (l < 0 || l >= static_cast<int>(lines.size())) {
        throw ConfigError("translines: switch group refers to missing line " + std::to_string(l));
      }
    }
  }
  std::set<std::string> sources;
  for (const auto& line : lines) {
    if (!(line.length > 0.0)) throw ConfigError("translines: line lengths must be positive");
    sources.insert(line.from);
  }
  for (const auto& p : producers) {
    if (!(p.lower <= p.upper)) throw ConfigError("translines: producer bounds reversed at " + p.node);
  }
  for (const auto& c : consumers) {
    if (sources.count(c.node)) {
      throw ConfigError("translines: consumer " + c.node + " has outgoing lines");
    }
    for (std::size_t i = 1; i < c.demand.knots.size(); ++i) {
      if (c.demand.knots[i].first < c.demand.knots[i - 1].first) {
        throw ConfigError("translines: demand knots of " + c.node + " are not sorted");
      }
    }
  }
  const double dt = horizon / n_time_steps;
  const double speed = std::max(speed_forward, -speed_backward);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const double dx = lines[l].length / volumes_per_line;
    if (speed * dt / dx > 1.0 + 1e-12) {
      throw ConfigError("translines: CFL violated on line " + std::to_string(l) + " (" +
                        lines[l].from + "->" + lines[l].to + "), Courant number " +
                        std::to_string(speed * dt / dx));
    }
  }
}

namespace {

DemandProfile steps(std::vector<std::pair<double, double>> levels) {
  // levels: (start time, value) of consecutive constant pieces
  DemandProfile p;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) p.knots.emplace_back(levels[i].first, levels[i - 1].second);
    p.knots.push_back(levels[i]);
  }
  return p;
}

}  // namespace

TranslinesConfig TranslinesConfig::subgrid() {
  TranslinesConfig c;
  c.lines = {
      {"gen1", "top1"},    {"gen2", "bottom1"}, {"top1", "c3"},      {"top1", "sub1"},
      {"bottom1", "sub3"}, {"bottom1", "c1"},   {"sub1", "sub2"},    {"sub3", "sub2"},
      {"bottom1", "bottom2"}, {"sub2", "mid1"}, {"bottom2", "mid1"}, {"mid1", "c4"},
      {"mid1", "c5"},      {"bottom2", "c2"},
  };
  c.switch_groups = {{3, 4, 9}, {10}};
  c.producers = {{"gen1", 0.0, 2.0}, {"gen2", 0.0, 2.0}};
  c.consumers = {
      {"c1", steps({{0.0, 0.0}, {3.0, 0.3}, {15.0, 0.2}})},
      {"c2", steps({{0.0, 0.0}, {4.0, 0.2}, {12.0, 0.35}})},
      {"c3", steps({{0.0, 0.0}, {3.0, 0.5}, {10.0, 0.25}, {18.0, 0.45}})},
      {"c4", steps({{0.0, 0.0}, {6.0, 0.2}, {14.0, 0.3}})},
      {"c5", steps({{0.0, 0.0}, {6.0, 0.15}, {20.0, 0.3}})},
  };
  return c;
}

TranslinesConfig TranslinesConfig::coarse() {
  TranslinesConfig c = subgrid();
  c.volumes_per_line = 2;
  c.n_time_steps = 52;
  return c;
}

TranslinesConfig TranslinesConfig::extended_tree() {
  TranslinesConfig c;
  c.lines = {
      {"gen", "hub"}, {"hub", "a"},   {"hub", "b"},   {"hub", "c"},   {"a", "ca1"},
      {"a", "ca2"},   {"b", "cb1"},   {"b", "d"},     {"c", "cc1"},   {"c", "d"},
      {"d", "cd1"},   {"d", "cd2"},
  };
  c.switch_groups = {{1}, {2, 7}, {3, 9}};
  c.producers = {{"gen", 0.0, 3.0}};
  c.consumers = {
      {"ca1", steps({{0.0, 0.0}, {3.0, 0.3}})},
      {"ca2", steps({{0.0, 0.0}, {3.0, 0.2}, {15.0, 0.4}})},
      {"cb1", steps({{0.0, 0.0}, {4.0, 0.3}})},
      {"cc1", steps({{0.0, 0.0}, {4.0, 0.25}, {12.0, 0.1}})},
      {"cd1", steps({{0.0, 0.0}, {6.0, 0.2}})},
      {"cd2", steps({{0.0, 0.0}, {6.0, 0.1}, {18.0, 0.3}})},
  };
  return c;
}

TranslinesConfig TranslinesConfig::preset(const std::string& name) {
  if (name == "subgrid") return subgrid();
  if (name == "coarse") return coarse();
  if (name == "extended_tree") return extended_tree();
  throw ConfigError("translines: unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// Transmission lines: system
// ---------------------------------------------------------------------------

struct TranslinesSystem::ModeOperator {
  Eigen::SparseMatrix<double> a;          // wave dynamics
  Eigen::SparseMatrix<double> injection;  // producers -> wave states
  Eigen::SparseMatrix<double> delivery;   // wave states -> consumers
};

namespace {

struct Topology {
  std::map<std::string, std::vector<int>> outgoing;
  std::map<std::string, std::vector<int>> incoming;
};

}  // namespace

TranslinesSystem::TranslinesSystem(const TranslinesConfig& config)
    : config_(config), modes_(enumerate_modes(static_cast<int>(config.switch_groups.size()))) {
  config_.validate();
  const int n_lines = static_cast<int>(config_.lines.size());
  const int nv = config_.volumes_per_line;
  n_wave_ = 2 * nv * n_lines;

  Topology topo;
  for (int l = 0; l < n_lines; ++l) {
    topo.outgoing[config_.lines[l].from].push_back(l);
    topo.incoming[config_.lines[l].to].push_back(l);
  }
  auto plus = [nv](int line, int cell) { return 2 * (line * nv + cell); };
  auto minus = [nv](int line, int cell) { return 2 * (line * nv + cell) + 1; };
  const double b11 = config_.damping[0], b12 = config_.damping[1], b22 = config_.damping[3];
  const int n_u = control_dim();
  const int n_c = static_cast<int>(config_.consumers.size());

  for (int mode = 0; mode < modes_.n_modes(); ++mode) {
    std::vector<bool> active(n_lines, true);
    for (int g = 0; g < modes_.n_switches(); ++g) {
      if (modes_.entry(mode, g) == 1) continue;
      for (int l : config_.switch_groups[g]) active[l] = false;
    }
    auto count_active = [&](const std::vector<int>& ls) {
      return static_cast<int>(std::count_if(ls.begin(), ls.end(), [&](int l) { return active[l]; }));
    };

    std::vector<Eigen::Triplet<double>> ta, tu, tc;
    for (int l = 0; l < n_lines; ++l) {
      const double dx = config_.lines[l].length / nv;
      const double ap = config_.speed_forward / dx;
      const double am = -config_.speed_backward / dx;
      for (int j = 0; j < nv; ++j) {
        const int p = plus(l, j), m = minus(l, j);
        ta.emplace_back(p, p, -ap - b11);
        ta.emplace_back(p, m, -b12);
        ta.emplace_back(m, p, -b12);
        ta.emplace_back(m, m, -am - b22);
        if (j > 0) ta.emplace_back(p, plus(l, j - 1), ap);
        if (j + 1 < nv) ta.emplace_back(m, minus(l, j + 1), am);
      }
      if (!active[l]) continue;
      // Forward inflow at the tail node.
      const std::string& a = config_.lines[l].from;
      const double share_out = 1.0 / count_active(topo.outgoing[a]);
      for (int k : topo.incoming[a]) {
        if (active[k]) ta.emplace_back(plus(l, 0), plus(k, nv - 1), ap * share_out);
      }
      for (int q = 0; q < n_u; ++q) {
        if (config_.producers[q].node == a) tu.emplace_back(plus(l, 0), q, ap * share_out);
      }
      // Backward inflow at the head node.
      const std::string& b = config_.lines[l].to;
      const double share_in = 1.0 / count_active(topo.incoming[b]);
      for (int r : topo.outgoing[b]) {
        if (active[r]) ta.emplace_back(minus(l, nv - 1), minus(r, 0), am * share_in);
      }
    }
    for (int s = 0; s < n_c; ++s) {
      for (int l : topo.incoming[config_.consumers[s].node]) {
        if (active[l]) tc.emplace_back(s, plus(l, nv - 1), 1.0);
      }
    }
    auto op = std::make_shared<ModeOperator>();
    op->a.resize(n_wave_, n_wave_);
    op->a.setFromTriplets(ta.begin(), ta.end());
    op->injection.resize(n_wave_, n_u);
    op->injection.setFromTriplets(tu.begin(), tu.end());
    op->delivery.resize(n_c, n_wave_);
    op->delivery.setFromTriplets(tc.begin(), tc.end());
    operators_.push_back(std::move(op));
  }
}

ControlBounds TranslinesSystem::control_bounds() const {
  const int n = control_dim();
  ControlBounds b{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int q = 0; q < n; ++q) {
    b.lower[q] = config_.producers[q].lower;
    b.upper[q] = config_.producers[q].upper;
  }
  return b;
}

Eigen::VectorXd TranslinesSystem::initial_state() const { return Eigen::VectorXd::Zero(n_wave_ + 1); }

Eigen::VectorXd TranslinesSystem::demands(double t) const {
  Eigen::VectorXd q(config_.consumers.size());
  for (std::size_t s = 0; s < config_.consumers.size(); ++s) q[s] = config_.consumers[s].demand(t);
  return q;
}

Eigen::VectorXd TranslinesSystem::delivered(const Eigen::VectorXd& y, int mode) const {
  return operators_[mode]->delivery * y.head(n_wave_);
}

void TranslinesSystem::rhs(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& u, int mode,
                           Eigen::VectorXd& dy) const {
  const ModeOperator& op = *operators_[mode];
  dy.resize(n_wave_ + 1);
  dy.head(n_wave_) = op.a * y.head(n_wave_);
  if (u.size() > 0) dy.head(n_wave_) += op.injection * u;
  const Eigen::VectorXd gap = demands(t) - op.delivery * y.head(n_wave_);
  dy[n_wave_] = 0.5 * gap.squaredNorm();
}

void TranslinesSystem::jacobians(double t, const Eigen::VectorXd& y, const Eigen::VectorXd&,
                                 int mode, Eigen::MatrixXd& dfdy, Eigen::MatrixXd& dfdu) const {
  const ModeOperator& op = *operators_[mode];
  dfdy.setZero(n_wave_ + 1, n_wave_ + 1);
  dfdy.topLeftCorner(n_wave_, n_wave_) = Eigen::MatrixXd(op.a);
  const Eigen::VectorXd gap = demands(t) - op.delivery * y.head(n_wave_);
  dfdy.row(n_wave_).head(n_wave_) = -(op.delivery.transpose() * gap).transpose();
  dfdu.setZero(n_wave_ + 1, control_dim());
  dfdu.topRows(n_wave_) = Eigen::MatrixXd(op.injection);
}

void TranslinesSystem::vjp(double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, int mode,
                           const Eigen::VectorXd& lambda, Eigen::VectorXd& gy,
                           Eigen::VectorXd& gu) const {
  const ModeOperator& op = *operators_[mode];
  const Eigen::VectorXd gap = demands(t) - op.delivery * y.head(n_wave_);
  gy.head(n_wave_) += op.a.transpose() * lambda.head(n_wave_);
  gy.head(n_wave_) -= lambda[n_wave_] * (op.delivery.transpose() * gap);
  if (gu.size() > 0) gu += op.injection.transpose() * lambda.head(n_wave_);
}

Eigen::VectorXd TranslinesSystem::terminal_gradient(const Eigen::VectorXd&) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_wave_ + 1);
  g[n_wave_] = 1.0;
  return g;
}

std::vector<std::string> TranslinesSystem::state_names() const {
  std::vector<std::string> names;
  for (const auto& line : config_.lines) {
    for (int j = 0; j < config_.volumes_per_line; ++j) {
      const std::string base = line.from + "-" + line.to + "_";
      names.push_back(base + "p" + std::to_string(j));
      names.push_back(base + "m" + std::to_string(j));
    }
  }
  names.push_back("cost");
  return names;
}

std::vector<std::string> TranslinesSystem::control_names() const {
  std::vector<std::string> names;
  for (const auto& p : config_.producers) names.push_back("u_" + p.node);
  return names;
}

Problem build_translines(const TranslinesConfig& config) {
  auto system = std::make_shared<TranslinesSystem>(config);
  TimeGrid grid(0.0, config.horizon, config.n_time_steps);
  ComponentRule rule;
  rule.min_dwell = dwell_intervals(config.tau_min, grid);
  const int m = static_cast<int>(config.switch_groups.size());
  CombinatorialSpec spec = config.representation == Representation::kComponentwise
                               ? CombinatorialSpec::componentwise(m, rule)
                               : CombinatorialSpec::modewise(rule);
  return Problem{std::move(system), grid, std::move(spec), "translines"};
}

}  // namespace padm
