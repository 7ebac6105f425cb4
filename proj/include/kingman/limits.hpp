//
// Copyright 2026 The kingman-condensation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Limit laws pi_i of the subsequences p_{kn+i}, and checks of simulated
// trajectories against them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kingman/error.hpp"
#include "kingman/measure.hpp"
#include "kingman/model.hpp"
#include "kingman/recursion.hpp"
#include "kingman/spectral.hpp"

namespace kingman {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline Check make_check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::abs(value) <= tolerance};
}

struct CondensationReport {
  CriticalSolution critical;
  std::vector<Measure> pis;           // pi_i, atom at eta0 included
  std::vector<double> atom_masses;    // alpha U_0 / U_i
  std::vector<double> wbars;          // int x pi_i(dx)
  std::vector<double> z;              // (1 - beta_[i+1]) / wbar_i
  double zbar = 0.0;                  // geometric mean of z
  double zbar_check = 0.0;            // zbar * eta0
  double eta0 = 0.0;
  std::vector<Check> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

// Body of pi_i:
//   sum_j U_[i-j]/U_i (z_c x)^j beta_[i-j] q_[i-j](dx) / (1 - (z_c x)^k).
inline std::vector<Atom> limit_body(const EnvironmentCycle& cycle, const CriticalSolution& sol,
                                    std::size_t i) {
  const std::size_t k = cycle.size();
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t src = residue(static_cast<long long>(i) - static_cast<long long>(j), k);
    const Environment& env = cycle[src];
    const double ratio = sol.U(static_cast<Eigen::Index>(src)) / sol.U(static_cast<Eigen::Index>(i));
    for (const Atom& a : env.q.atoms()) {
      const double t = sol.z_c * a.location;
      if (!detail::inside_domain(t)) throw NumericError("limit law hits the pole z_c x = 1");
      atoms.push_back({a.location, ratio * std::pow(t, static_cast<int>(j)) * env.beta * a.mass /
                                       detail::one_minus_power(t, k)});
    }
  }
  return atoms;
}

inline CondensationReport limit_laws(const ModelInstance& model) {
  const EnvironmentCycle& cycle = model.cycle();
  const std::size_t k = cycle.size();
  CondensationReport rep;
  rep.critical = find_zc(model);
  rep.eta0 = model.eta0();
  const CriticalSolution& sol = rep.critical;

  double log_prod_z = 0.0;
  double worst_mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Atom> atoms = limit_body(cycle, sol, i);
    const double atom = sol.alpha * sol.U(0) / sol.U(static_cast<Eigen::Index>(i));
    if (atom > 0.0) atoms.push_back({model.eta0(), atom});
    Measure pi = detail::MeasureAccess::make(std::move(atoms), MeasureKind::probability);
    worst_mass = std::max(worst_mass, std::abs(pi.total_mass() - 1.0));
    const double w = moment(pi, 1);
    const double zi = (1.0 - cycle[residue(static_cast<long long>(i) + 1, k)].beta) / w;
    log_prod_z += std::log(zi);
    rep.pis.push_back(std::move(pi));
    rep.atom_masses.push_back(atom);
    rep.wbars.push_back(w);
    rep.z.push_back(zi);
  }
  rep.zbar = std::exp(log_prod_z / static_cast<double>(k));
  rep.zbar_check = rep.zbar * model.eta0();

  rep.checks.push_back(make_check("normalization", worst_mass, 1e-10));
  rep.checks.push_back(make_check("fixed_point_equation", sol.residual, 1e-10));
  rep.checks.push_back(make_check("zbar_equals_zc", (rep.zbar - sol.z_c) / sol.z_c, 1e-9));
  rep.checks.push_back({"zbar_eta0_at_most_one", rep.zbar_check - 1.0, 1e-12,
                        rep.zbar_check <= 1.0 + 1e-12});
  const bool saturated = std::abs(rep.zbar_check - 1.0) <= 1e-9;
  const bool atom_regime = sol.regime != Regime::non_condensation;
  rep.checks.push_back({"saturation_iff_condensation", saturated ? 1.0 : 0.0, 0.0,
                        saturated == atom_regime});
  return rep;
}

// Mass of the limit family moved by one generation: step(pi_i, env_[i+1])
// against pi_[i+1], body in TV and atom at eta0 separately.
struct FixedPointGap {
  double body_tv = 0.0;
  double atom = 0.0;
};

inline FixedPointGap fixed_point_gap(const ModelInstance& model, const CondensationReport& rep) {
  const std::size_t k = model.k();
  const double eta0 = model.eta0();
  const Interval below{0.0, std::max(0.0, eta0 - 1e-9)};
  FixedPointGap g;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t next = residue(static_cast<long long>(i) + 1, k);
    const Measure moved = step(rep.pis[i], model.cycle()[next]).p;
    g.body_tv = std::max(g.body_tv, tv_distance(moved, rep.pis[next], below));
    g.atom = std::max(g.atom, std::abs(moved.mass_at(eta0) - rep.pis[next].mass_at(eta0)));
  }
  return g;
}

// Default TV window: closed intervals below eta0 when an atom forms, the
// whole support otherwise.
inline Interval default_window(const ModelInstance& model, Regime regime) {
  if (regime == Regime::condensation) return {0.0, model.eta0() * (1.0 - std::ldexp(1.0, -10))};
  return {0.0, model.eta0()};
}

struct GapSample {
  std::size_t n = 0;
  std::size_t residue = 0;
  std::vector<double> tv;  // one per window
  double atom_gap = 0.0;   // |p_n({eta0}) - pi_i({eta0})|
};

struct ResidueSummary {
  std::size_t residue = 0;
  std::vector<double> final_tv;
  std::vector<bool> monotone_tail;
  double final_atom_gap = 0.0;
  double simulated_wbar = 0.0;
  double predicted_wbar = 0.0;
};

struct ConvergenceReport {
  CondensationReport limits;
  std::vector<Interval> windows;
  std::size_t horizon = 0;
  std::vector<GapSample> samples;
  std::vector<ResidueSummary> residues;
  std::optional<std::size_t> converged_at;

  double max_final_tv() const {
    double m = 0.0;
    for (const auto& r : residues)
      for (double v : r.final_tv) m = std::max(m, v);
    return m;
  }
  double max_final_atom_gap() const {
    double m = 0.0;
    for (const auto& r : residues) m = std::max(m, r.final_atom_gap);
    return m;
  }
};

// Iterates to `horizon` and records, at every generation, the TV gap to the
// limit of its residue class on each window. An empty window list selects
// the default window.
inline ConvergenceReport verify_convergence(const ModelInstance& model, std::size_t horizon,
                                            std::vector<Interval> windows = {},
                                            std::size_t tail_periods = 10) {
  const std::size_t k = model.k();
  if (horizon % k != 0) throw ModelError("horizon must be a multiple of k");
  ConvergenceReport rep;
  rep.limits = limit_laws(model);
  if (windows.empty()) windows.push_back(default_window(model, rep.limits.critical.regime));
  for (const Interval& w : windows) {
    if (!w.well_formed()) throw ModelError("malformed window");
  }
  rep.windows = windows;
  rep.horizon = horizon;
  const double eta0 = model.eta0();

  IterateOptions opts;
  opts.geometric_snapshots = false;
  opts.observer = [&](std::size_t n, const Measure& p) {
    GapSample s;
    s.n = n;
    s.residue = n % k;
    const Measure& pi = rep.limits.pis[s.residue];
    for (const Interval& w : rep.windows) s.tv.push_back(tv_distance(p, pi, w));
    s.atom_gap = std::abs(p.mass_at(eta0) - pi.mass_at(eta0));
    rep.samples.push_back(std::move(s));
  };
  const Trajectory traj = iterate(model, horizon, opts);
  rep.converged_at = traj.converged_at();

  const std::size_t first_tail = horizon + 1 > tail_periods * k ? horizon + 1 - tail_periods * k : 0;
  for (std::size_t i = 0; i < k; ++i) {
    ResidueSummary r;
    r.residue = i;
    r.predicted_wbar = rep.limits.wbars[i];
    const GapSample* last = nullptr;
    std::vector<bool> mono(rep.windows.size(), true);
    for (std::size_t n = first_tail; n <= horizon; ++n) {
      const GapSample& s = rep.samples[n];
      if (s.residue != i) continue;
      if (last != nullptr) {
        for (std::size_t w = 0; w < rep.windows.size(); ++w) {
          if (s.tv[w] > last->tv[w] * (1.0 + 1e-12) + 1e-15) mono[w] = false;
        }
      }
      last = &s;
    }
    if (last == nullptr) {
      // Horizon shorter than one period after this residue.
      for (std::size_t n = 0; n <= horizon; ++n)
        if (rep.samples[n].residue == i) last = &rep.samples[n];
    }
    if (last != nullptr) {
      r.final_tv = last->tv;
      r.final_atom_gap = last->atom_gap;
      r.simulated_wbar = traj.w(last->n);
    }
    r.monotone_tail = mono;
    rep.residues.push_back(std::move(r));
  }
  return rep;
}

// Periodic selection experiment. Nothing is guaranteed to converge: the limit
// family is the conjectured one and gaps are only reported.
struct ConjectureReport {
  std::string label = "conjectural, no convergence guarantee";
  double x0 = 0.0;
  double s_at_x0 = 0.0;
  CriticalSolution critical;
  std::vector<Measure> pis;
  std::size_t horizon = 0;
  std::vector<double> final_tv;        // whole [0,1], atom at x0 excluded
  std::vector<double> final_atom_gap;  // at x0
  std::vector<double> simulated_mass_at_x0;
};

namespace detail {

inline double selection_mean(const SelectionCycle& s, double x) {
  double log_s = 0.0;
  for (const SelectionMap& f : s) {
    const double v = f(x);
    if (v == 0.0) return 0.0;
    log_s += std::log(v);
  }
  return std::exp(log_s / static_cast<double>(s.size()));
}

// prod_{l = from}^{from + count - 1} s_[l](x); empty product is 1.
inline double selection_run(const SelectionCycle& s, long long from, std::size_t count, double x,
                            long long stride = 1) {
  double p = 1.0;
  for (std::size_t c = 0; c < count; ++c) {
    p *= s[residue(from + stride * static_cast<long long>(c), s.size())](x);
  }
  return p;
}

}  // namespace detail

inline ConjectureReport conjecture_experiment(const ModelInstance& model, const SelectionCycle& s,
                                              std::size_t horizon) {
  const EnvironmentCycle& cycle = model.cycle();
  const std::size_t k = cycle.size();
  if (s.size() != k) throw ModelError("selection cycle length must equal k");

  // Unique maximizer of the geometric mean selection on supp(p0).
  double best = -1.0;
  double x0 = 0.0;
  std::size_t ties = 0;
  for (const Atom& a : model.p0().atoms()) {
    const double v = detail::selection_mean(s, a.location);
    if (v > best * (1.0 + 1e-12) || best < 0.0) {
      best = v;
      x0 = a.location;
      ties = 1;
    } else if (v >= best * (1.0 - 1e-12)) {
      ++ties;
    }
  }
  if (ties != 1 || !(best > 0.0)) throw ModelError("conjecture hypotheses unmet");
  for (const Environment& env : cycle.envs()) {
    for (const Atom& a : env.q.atoms()) {
      if (detail::selection_mean(s, a.location) >= best) throw ModelError("conjecture hypotheses unmet");
    }
  }

  ConjectureReport rep;
  rep.x0 = x0;
  rep.s_at_x0 = best;
  rep.horizon = horizon;

  auto build = [&](double z) {
    Matrix a(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t r = residue(static_cast<long long>(i) - static_cast<long long>(j), k);
        const Environment& env = cycle[j];
        double sum = 0.0;
        for (const Atom& q : env.q.atoms()) {
          const double t = z * detail::selection_mean(s, q.location);
          if (!detail::inside_domain(t)) {
            sum = kInfinity;
            break;
          }
          sum += q.mass * std::pow(z, static_cast<int>(r)) *
                 detail::selection_run(s, static_cast<long long>(j) + 1, r, q.location) /
                 detail::one_minus_power(t, k);
        }
        a(i, j) = env.beta * sum;
      }
    }
    return a;
  };
  rep.critical = solve_critical(build, 1.0 / best);
  const CriticalSolution& sol = rep.critical;

  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Atom> atoms;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t src = residue(static_cast<long long>(i) - static_cast<long long>(j), k);
      const Environment& env = cycle[src];
      const double ratio = sol.U(static_cast<Eigen::Index>(src)) / sol.U(static_cast<Eigen::Index>(i));
      for (const Atom& q : env.q.atoms()) {
        const double t = sol.z_c * detail::selection_mean(s, q.location);
        if (!detail::inside_domain(t)) throw NumericError("limit law hits the pole");
        const double run = detail::selection_run(s, static_cast<long long>(i), j, q.location, -1);
        atoms.push_back({q.location, ratio * std::pow(sol.z_c, static_cast<int>(j)) * run * env.beta *
                                         q.mass / detail::one_minus_power(t, k)});
      }
    }
    const double atom = sol.alpha * sol.U(0) / sol.U(static_cast<Eigen::Index>(i));
    if (atom > 0.0) atoms.push_back({x0, atom});
    rep.pis.push_back(detail::MeasureAccess::make(std::move(atoms), MeasureKind::probability));
  }

  // Simulate; keep the last generation of each residue.
  std::vector<Measure> last(k);
  Measure p = model.p0();
  if (horizon < k) throw ModelError("horizon must cover one period");
  for (std::size_t n = 0; n < horizon; ++n) {
    const auto next = static_cast<long long>(n + 1);
    p = step_selective(p, cycle.at_generation(next), s[residue(next, k)]).p;
    if (n + 1 + k > horizon) last[(n + 1) % k] = p;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double gap_atom = std::abs(last[i].mass_at(x0) - rep.pis[i].mass_at(x0));
    const double tv_all = tv_distance(last[i], rep.pis[i], {0.0, 1.0});
    rep.final_tv.push_back(std::max(0.0, tv_all - gap_atom));
    rep.final_atom_gap.push_back(gap_atom);
    rep.simulated_mass_at_x0.push_back(last[i].mass_at(x0));
  }
  return rep;
}

}  // namespace kingman
