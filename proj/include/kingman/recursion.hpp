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

// The periodic mutation-selection recursion
//
//   p_{n+1}(dx) = beta_[n+1] q_[n+1](dx) + (1 - beta_[n+1]) x p_n(dx) / w_n,
//   w_n = int x p_n(dx),
//
// its trajectories, the split of p_n into mutant-descended and
// p0-descended parts, and the variant with periodic selection maps.

#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kingman/error.hpp"
#include "kingman/measure.hpp"
#include "kingman/model.hpp"

namespace kingman {

struct StepResult {
  Measure p;
  double w = 0.0;  // mean fitness of the input measure
};

// One generation under `env`.
inline StepResult step(const Measure& p, const Environment& env) {
  const double w = moment(p, 1);
  if (!(w > 0.0)) throw NumericError("degenerate selection");
  const double keep = (1.0 - env.beta) / w;
  std::vector<Atom> biased;
  biased.reserve(p.size());
  for (const Atom& a : p.atoms()) {
    if (a.location > 0.0) biased.push_back({a.location, keep * a.location * a.mass});
  }
  auto atoms = detail::combine(env.q.atoms(), env.beta, biased, 1.0);
  return {detail::MeasureAccess::make(std::move(atoms), MeasureKind::probability, true), w};
}

// A non-negative selection function on [0,1].
class SelectionMap {
 public:
  SelectionMap(std::string name, std::function<double(double)> f, bool identity = false)
      : name_(std::move(name)), f_(std::move(f)), identity_(identity) {}

  static SelectionMap identity() {
    return SelectionMap("identity", [](double x) { return x; }, true);
  }
  static SelectionMap power(double exponent) {
    if (!(exponent > 0.0)) throw ModelError("selection exponent must be positive");
    return SelectionMap("power(" + std::to_string(exponent) + ")",
                        [exponent](double x) { return std::pow(x, exponent); }, exponent == 1.0);
  }
  static SelectionMap constant(double value) {
    if (!(value > 0.0)) throw ModelError("constant selection must be positive");
    return SelectionMap("constant(" + std::to_string(value) + ")",
                        [value](double) { return value; });
  }

  double operator()(double x) const {
    const double v = f_(x);
    if (!(v >= 0.0) || !std::isfinite(v)) throw NumericError("selection value must be finite and >= 0");
    return v;
  }
  const std::string& name() const noexcept { return name_; }
  bool is_identity() const noexcept { return identity_; }

 private:
  std::string name_;
  std::function<double(double)> f_;
  bool identity_ = false;
};

using SelectionCycle = std::vector<SelectionMap>;

// One generation with selection through s instead of the identity:
//   beta q + (1 - beta) s(x) p(dx) / int s dp.
inline StepResult step_selective(const Measure& p, const Environment& env, const SelectionMap& s) {
  double w = 0.0;
  std::vector<Atom> biased;
  biased.reserve(p.size());
  for (const Atom& a : p.atoms()) {
    const double v = s(a.location);
    w += v * a.mass;
    if (v > 0.0) biased.push_back({a.location, v * a.mass});
  }
  if (!(w > 0.0)) throw NumericError("selection annihilates support");
  auto atoms = detail::combine(env.q.atoms(), env.beta, biased, (1.0 - env.beta) / w);
  return {detail::MeasureAccess::make(std::move(atoms), MeasureKind::probability, true), w};
}

struct TrajectoryStep {
  std::size_t n = 0;
  std::size_t residue = 0;
  double w = 0.0;      // mean of p_n
  double W = 1.0;      // prod_{j<n} w_j (may underflow; prefer log_W)
  double log_W = 0.0;
  double mass_at_eta0 = 0.0;
};

struct IterateOptions {
  // Number of trailing generations whose measures are kept; 0 means 2k.
  std::size_t tail_snapshots = 0;
  // Also keep p_0, p_1, p_2, p_4, p_8, ...
  bool geometric_snapshots = true;
  // Called on every generation p_n, n = 0..n_steps.
  std::function<void(std::size_t, const Measure&)> observer;
  double convergence_tolerance = 1e-12;
  std::size_t convergence_periods = 10;
};

class Trajectory {
 public:
  const std::vector<TrajectoryStep>& steps() const noexcept { return steps_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t horizon() const noexcept { return steps_.empty() ? 0 : steps_.size() - 1; }
  double w(std::size_t n) const { return steps_.at(n).w; }

  // Stored measure at generation n, or nullptr when it was not kept.
  const Measure* snapshot(std::size_t n) const {
    auto it = snapshots_.find(n);
    return it == snapshots_.end() ? nullptr : &it->second;
  }
  const std::map<std::size_t, Measure>& snapshots() const noexcept { return snapshots_; }
  const Measure& last() const { return snapshots_.rbegin()->second; }

  // Last observed mean for each residue class, indexed by residue.
  std::vector<double> tail_means() const {
    std::vector<double> out(k_, 0.0);
    for (std::size_t n = steps_.size() - std::min(steps_.size(), k_); n < steps_.size(); ++n) {
      out[steps_[n].residue] = steps_[n].w;
    }
    return out;
  }

  // Generation at which the tail detector fired: every residue moved by
  // less than the tolerance for the configured number of whole periods.
  std::optional<std::size_t> converged_at() const noexcept { return converged_at_; }

 private:
  friend Trajectory iterate(const ModelInstance&, std::size_t, const IterateOptions&);
  std::size_t k_ = 1;
  std::vector<TrajectoryStep> steps_;
  std::map<std::size_t, Measure> snapshots_;
  std::optional<std::size_t> converged_at_;
};

// Runs the recursion from p_0 for n_steps generations.
inline Trajectory iterate(const ModelInstance& model, std::size_t n_steps,
                          const IterateOptions& options = {}) {
  const std::size_t k = model.k();
  const std::size_t tail = options.tail_snapshots == 0 ? 2 * k : options.tail_snapshots;
  const double eta0 = model.eta0();

  Trajectory traj;
  traj.k_ = k;
  traj.steps_.reserve(n_steps + 1);

  std::deque<std::pair<std::size_t, Measure>> recent;
  std::size_t next_geometric = 1;
  std::size_t quiet_periods = 0;
  double period_drift = 0.0;

  Measure p = model.p0();
  double log_W = 0.0;
  double W = 1.0;
  for (std::size_t n = 0;; ++n) {
    TrajectoryStep rec;
    rec.n = n;
    rec.residue = n % k;
    rec.w = moment(p, 1);
    rec.W = W;
    rec.log_W = log_W;
    rec.mass_at_eta0 = p.mass_at(eta0);
    traj.steps_.push_back(rec);
    if (options.observer) options.observer(n, p);

    if (n == 0 || (options.geometric_snapshots && n == next_geometric)) {
      traj.snapshots_.emplace(n, p);
      if (n == next_geometric) next_geometric *= 2;
    }

    if (n >= k) {
      period_drift = std::max(period_drift, std::abs(rec.w - traj.steps_[n - k].w));
      if (rec.residue == k - 1) {
        quiet_periods = period_drift < options.convergence_tolerance ? quiet_periods + 1 : 0;
        period_drift = 0.0;
        if (!traj.converged_at_ && quiet_periods >= options.convergence_periods) {
          traj.converged_at_ = n;
        }
      }
    }

    if (n + tail >= n_steps) recent.emplace_back(n, p);
    if (n == n_steps) break;

    StepResult next = step(p, model.cycle().at_generation(static_cast<long long>(n + 1)));
    log_W += std::log(next.w);
    W *= next.w;
    p = std::move(next.p);
  }
  for (auto& [n, m] : recent) traj.snapshots_.insert_or_assign(n, std::move(m));
  return traj;
}

struct Decomposition {
  Measure a;  // mutant-descended part
  Measure b;  // part descended from p_0
};

// Splits p_n into the contribution of mutants born at generations 1..n and
// the size-biased remainder of p_0. Requires n >= 1.
inline Decomposition decompose(const ModelInstance& model, std::size_t n) {
  if (n < 1) throw ModelError("decomposition needs n >= 1");
  IterateOptions opts;
  opts.geometric_snapshots = false;
  opts.tail_snapshots = 1;
  const Trajectory traj = iterate(model, n - 1, opts);
  const auto& cycle = model.cycle();
  const auto nn = static_cast<long long>(n);

  std::vector<Atom> a_atoms;
  // factor = prod_{i<l} (1 - beta_[n-i]) / w_{n-i-1}
  double factor = 1.0;
  for (std::size_t l = 0; l < n; ++l) {
    const auto ll = static_cast<long long>(l);
    const Environment& env = cycle.at_generation(nn - ll);
    for (const Atom& x : env.q.atoms()) {
      a_atoms.push_back({x.location, env.beta * x.mass * std::pow(x.location, static_cast<int>(l)) * factor});
    }
    factor *= (1.0 - env.beta) / traj.w(n - l - 1);
  }
  std::vector<Atom> b_atoms;
  for (const Atom& x : model.p0().atoms()) {
    b_atoms.push_back({x.location, x.mass * std::pow(x.location, static_cast<int>(n)) * factor});
  }
  return {detail::MeasureAccess::make(std::move(a_atoms), MeasureKind::sub_probability),
          detail::MeasureAccess::make(std::move(b_atoms), MeasureKind::sub_probability)};
}

}  // namespace kingman
