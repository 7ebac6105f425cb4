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

// Finite atomic measures on [0,1].
//
// Every fitness law handled by the library (initial law, mutant laws, limit
// laws) is a finite list of atoms. Integrals against such measures are exact
// finite sums, so the only approximation in the whole pipeline is the
// optional midpoint discretization of a density at load time.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kingman/error.hpp"

namespace kingman {

// Locations closer than this are the same atom.
inline constexpr double kLocationTolerance = 1e-12;
// Atoms lighter than this are dropped by the canonical form.
inline constexpr double kMassFloor = 1e-15;
// Slack allowed on total mass when validating user supplied measures.
inline constexpr double kMassTolerance = 1e-9;

struct Atom {
  double location = 0.0;
  double mass = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class MeasureKind { probability, sub_probability };

// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const noexcept {
    return x >= lo - kLocationTolerance && x <= hi + kLocationTolerance;
  }
  bool well_formed() const noexcept { return lo <= hi && lo >= 0.0 && hi <= 1.0 + kLocationTolerance; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

class Measure;

namespace detail {

inline bool same_location(double a, double b) noexcept {
  return std::abs(a - b) <= kLocationTolerance;
}

// Sorts, merges near-coincident locations and drops atoms under the floor.
inline void canonicalize(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!out.empty() && same_location(out.back().location, a.location)) {
      out.back().mass += a.mass;
    } else {
      out.push_back(a);
    }
  }
  std::erase_if(out, [](const Atom& a) { return !(a.mass >= kMassFloor); });
  atoms = std::move(out);
}

// Linear combination ca * a + cb * b of two sorted atom lists.
inline std::vector<Atom> combine(std::span<const Atom> a, double ca, std::span<const Atom> b,
                                 double cb) {
  std::vector<Atom> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].location < b[j].location &&
                          !same_location(a[i].location, b[j].location))) {
      out.push_back({a[i].location, ca * a[i].mass});
      ++i;
    } else if (i == a.size() || !same_location(a[i].location, b[j].location)) {
      out.push_back({b[j].location, cb * b[j].mass});
      ++j;
    } else {
      out.push_back({a[i].location, ca * a[i].mass + cb * b[j].mass});
      ++i;
      ++j;
    }
  }
  return out;
}

struct MeasureAccess;
struct TrustedTag {};

}  // namespace detail

// A finite atomic (sub-)probability measure with strictly increasing
// locations in [0,1] and positive masses.
class Measure {
 public:
  // Empty sub-probability measure.
  Measure() = default;

  // Validates and canonicalizes. Throws ModelError on locations outside
  // [0,1], non-positive masses, or a total mass inconsistent with `kind`.
  Measure(std::vector<Atom> atoms, MeasureKind kind) : kind_(kind) {
    for (Atom& a : atoms) {
      if (!std::isfinite(a.location) || a.location < -kLocationTolerance ||
          a.location > 1.0 + kLocationTolerance) {
        throw ModelError("atom location " + std::to_string(a.location) + " outside [0,1]");
      }
      if (!std::isfinite(a.mass) || a.mass <= 0.0) {
        throw ModelError("atom mass must be positive and finite");
      }
      a.location = std::clamp(a.location, 0.0, 1.0);
    }
    detail::canonicalize(atoms);
    atoms_ = std::move(atoms);
    const double total = total_mass();
    if (kind_ == MeasureKind::probability && std::abs(total - 1.0) > kMassTolerance) {
      throw ModelError("probability measure has total mass " + std::to_string(total));
    }
    if (kind_ == MeasureKind::sub_probability && total > 1.0 + kMassTolerance) {
      throw ModelError("sub-probability measure has total mass " + std::to_string(total));
    }
  }

  static Measure dirac(double x) { return Measure({{x, 1.0}}, MeasureKind::probability); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  MeasureKind kind() const noexcept { return kind_; }
  bool empty() const noexcept { return atoms_.empty(); }
  std::size_t size() const noexcept { return atoms_.size(); }

  double total_mass() const noexcept {
    return std::accumulate(atoms_.begin(), atoms_.end(), 0.0,
                           [](double s, const Atom& a) { return s + a.mass; });
  }

  // Mass carried at x (zero when x is not an atom).
  double mass_at(double x) const noexcept {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x - kLocationTolerance,
                               [](const Atom& a, double v) { return a.location < v; });
    if (it != atoms_.end() && detail::same_location(it->location, x)) return it->mass;
    return 0.0;
  }

  // Same measure rescaled to total mass one.
  Measure normalized() const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  friend struct detail::MeasureAccess;
  Measure(detail::TrustedTag, std::vector<Atom> atoms, MeasureKind kind)
      : atoms_(std::move(atoms)), kind_(kind) {}

  std::vector<Atom> atoms_;
  MeasureKind kind_ = MeasureKind::sub_probability;
};

namespace detail {

// Builds measures from computed atom lists without the input validation.
// Library operations use it on values that satisfy the invariants by
// construction.
struct MeasureAccess {
  static Measure make(std::vector<Atom> atoms, MeasureKind kind, bool renormalize = false) {
    canonicalize(atoms);
    if (renormalize && !atoms.empty()) {
      double total = 0.0;
      for (const Atom& a : atoms) total += a.mass;
      for (Atom& a : atoms) a.mass /= total;
    }
    return Measure(TrustedTag{}, std::move(atoms), kind);
  }
};

}  // namespace detail

inline Measure Measure::normalized() const {
  const double total = total_mass();
  if (!(total > 0.0)) throw NumericError("cannot normalize a null measure");
  return detail::MeasureAccess::make(atoms_, MeasureKind::probability, true);
}

// Largest atom location.
inline double support_max(const Measure& m) {
  if (m.empty()) throw ModelError("empty support");
  return m.atoms().back().location;
}

// Integral of x^n.
inline double moment(const Measure& m, int n) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += a.mass * std::pow(a.location, n);
  return s;
}

inline double mass_in(const Measure& m, const Interval& window) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) {
    if (window.contains(a.location)) s += a.mass;
  }
  return s;
}

// c * m, as a sub-probability measure.
inline Measure scaled(const Measure& m, double c) {
  std::vector<Atom> atoms = m.atoms();
  for (Atom& a : atoms) a.mass *= c;
  return detail::MeasureAccess::make(std::move(atoms), MeasureKind::sub_probability);
}

inline Measure add(const Measure& a, const Measure& b) {
  auto atoms = detail::combine(a.atoms(), 1.0, b.atoms(), 1.0);
  const double total = std::accumulate(atoms.begin(), atoms.end(), 0.0,
                                       [](double s, const Atom& x) { return s + x.mass; });
  const MeasureKind kind = std::abs(total - 1.0) <= kMassTolerance ? MeasureKind::probability
                                                                   : MeasureKind::sub_probability;
  return detail::MeasureAccess::make(std::move(atoms), kind);
}

inline Measure restrict_to(const Measure& m, const Interval& window) {
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms()) {
    if (window.contains(a.location)) atoms.push_back(a);
  }
  return detail::MeasureAccess::make(std::move(atoms), MeasureKind::sub_probability);
}

struct SizeBiased {
  Measure measure;
  double mean = 0.0;
};

// x m(dx) / w with w the mean of m.
inline SizeBiased size_bias(const Measure& m) {
  const double w = moment(m, 1);
  if (!(w > 0.0)) throw NumericError("degenerate selection");
  std::vector<Atom> atoms;
  atoms.reserve(m.size());
  for (const Atom& a : m.atoms()) {
    if (a.location > 0.0) atoms.push_back({a.location, a.location * a.mass / w});
  }
  return {detail::MeasureAccess::make(std::move(atoms), MeasureKind::probability, true), w};
}

// Collapses all mass at locations >= threshold onto a single atom at the
// threshold. Total mass is preserved.
inline Measure truncate(const Measure& m, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ModelError("truncation threshold must lie in (0,1]");
  }
  std::vector<Atom> atoms;
  double collapsed = 0.0;
  for (const Atom& a : m.atoms()) {
    if (a.location >= threshold - kLocationTolerance) {
      collapsed += a.mass;
    } else {
      atoms.push_back(a);
    }
  }
  if (collapsed > 0.0) atoms.push_back({threshold, collapsed});
  return detail::MeasureAccess::make(std::move(atoms), m.kind());
}

// Sum of |a - b| mass differences over the atoms inside `window`.
// Range is [0, 2] for a pair of sub-probability measures.
inline double tv_distance(const Measure& a, const Measure& b, const Interval& window) {
  const auto& xa = a.atoms();
  const auto& xb = b.atoms();
  std::size_t i = 0;
  std::size_t j = 0;
  double s = 0.0;
  while (i < xa.size() || j < xb.size()) {
    double location;
    double diff;
    if (j == xb.size() ||
        (i < xa.size() && xa[i].location < xb[j].location &&
         !detail::same_location(xa[i].location, xb[j].location))) {
      location = xa[i].location;
      diff = xa[i].mass;
      ++i;
    } else if (i == xa.size() || !detail::same_location(xa[i].location, xb[j].location)) {
      location = xb[j].location;
      diff = xb[j].mass;
      ++j;
    } else {
      location = xa[i].location;
      diff = std::abs(xa[i].mass - xb[j].mass);
      ++i;
      ++j;
    }
    if (window.contains(location)) s += diff;
  }
  return s;
}

// a <=_{eta^-} b: at every atom below eta, a carries at most the mass of b.
// `slack` absorbs floating point noise when comparing computed iterates.
inline bool leq_eta(const Measure& a, const Measure& b, double eta, double slack = 0.0) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ModelError("order level must lie in (0,1]");
  const double below = eta - kLocationTolerance;
  for (const Atom& x : a.atoms()) {
    if (x.location >= below) break;
    if (x.mass > b.mass_at(x.location) + slack) return false;
  }
  return true;
}

// Midpoint rule on `cells` equal cells of `support`, normalized to a
// probability measure. Cells where the density vanishes carry no atom.
inline Measure discretize_density(const std::function<double(double)>& density,
                                  const Interval& support, int cells) {
  if (cells < 1) throw ModelError("grid needs at least one cell");
  if (!support.well_formed() || !(support.hi > support.lo)) {
    throw ModelError("grid support must be a non-degenerate interval of [0,1]");
  }
  const double h = (support.hi - support.lo) / cells;
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(cells));
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double x = support.lo + (c + 0.5) * h;
    const double f = density(x);
    if (!std::isfinite(f) || f < 0.0) throw ModelError("density must be finite and non-negative");
    if (f > 0.0) {
      atoms.push_back({x, f * h});
      total += f * h;
    }
  }
  if (!(total > 0.0)) throw ModelError("density integrates to zero on the grid");
  for (Atom& a : atoms) a.mass /= total;
  return Measure(std::move(atoms), MeasureKind::probability);
}

}  // namespace kingman
