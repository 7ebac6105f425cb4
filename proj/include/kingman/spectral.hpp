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

// Moment matrices A(z) and the condensation criteria built on them.
//
// Entry (i, j) of A(z) is the residue-(i - j) part of the moment generating
// function of beta_j q_j:
//
//   A(z)_{ij} = int (zx)^[i-j] / (1 - (zx)^k) beta_j q_j(dx).
//
// Its Perron root rho(A(z)) is continuous and increasing in z. Comparing
// rho(A(1/eta0)) with 1 decides whether an atom forms at eta0; the sign of
// det(I - A(z)) (and, for k = 2, of Gamma_2) carries the same information.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kingman/error.hpp"
#include "kingman/linalg.hpp"
#include "kingman/measure.hpp"
#include "kingman/model.hpp"

namespace kingman {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// |zx - 1| below this is treated as the pole zx = 1.
inline constexpr double kPoleTolerance = 1e-12;

namespace detail {

// 1 - t^k written as (1 - t)(1 + t + ... + t^{k-1}) to keep accuracy near t = 1.
inline double one_minus_power(double t, std::size_t k) {
  double s = 0.0;
  double p = 1.0;
  for (std::size_t l = 0; l < k; ++l) {
    s += p;
    p *= t;
  }
  return (1.0 - t) * s;
}

// Classifies t = z x: returns false at the pole, throws beyond it.
inline bool inside_domain(double t) {
  if (t > 1.0 + kPoleTolerance) throw NumericError("z outside domain");
  return std::abs(t - 1.0) > kPoleTolerance;
}

}  // namespace detail

// Residue-i moment generating function of beta q:
//   sum_{n = i mod k} z^n int x^n beta q(dx) = int (zx)^i/(1-(zx)^k) beta q(dx).
// Returns +inf at the pole zx = 1.
inline double mu(const Environment& env, std::size_t i, double z, std::size_t k) {
  if (z < 0.0) throw NumericError("z must be non-negative");
  if (i >= k) throw ModelError("residue out of range");
  double s = 0.0;
  for (const Atom& a : env.q.atoms()) {
    const double t = z * a.location;
    if (!detail::inside_domain(t)) return kInfinity;
    s += a.mass * std::pow(t, static_cast<int>(i)) / detail::one_minus_power(t, k);
  }
  return env.beta * s;
}

// Single-environment generating function int beta q(dx) / (1 - zx).
inline double rho_single(const Environment& env, double z) {
  if (z < 0.0) throw NumericError("z must be non-negative");
  double s = 0.0;
  for (const Atom& a : env.q.atoms()) {
    const double t = z * a.location;
    if (!detail::inside_domain(t)) return kInfinity;
    s += a.mass / (1.0 - t);
  }
  return env.beta * s;
}

struct MomentMatrix {
  double z = 0.0;
  Matrix entries;

  bool divergent() const { return !entries.allFinite(); }
  bool divergent(Eigen::Index i, Eigen::Index j) const { return !std::isfinite(entries(i, j)); }
  Eigen::Index size() const { return entries.rows(); }
};

inline MomentMatrix build_A(const EnvironmentCycle& cycle, double z) {
  const std::size_t k = cycle.size();
  MomentMatrix a{z, Matrix(k, k)};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      a.entries(i, j) = mu(cycle[j], residue(static_cast<long long>(i) - static_cast<long long>(j), k), z, k);
    }
  }
  return a;
}

struct SpectralResult {
  double rho = 0.0;
  Vector eigvec;          // positive, sums to one; empty when rho is infinite
  double residual = 0.0;  // ||A R - rho R||_inf
  int iterations = 0;
  double cw_lower = 0.0;  // Collatz-Wielandt bracket of rho
  double cw_upper = 0.0;
};

struct PerronOptions {
  double tolerance = 1e-14;
  int max_iterations = 100000;
  // Power iterations attempted before switching to shifted inverse iteration.
  int power_budget = 500;
};

namespace detail {

inline void collatz_wielandt(const Matrix& a, const Vector& r, double& lo, double& hi) {
  const Vector y = a * r;
  lo = kInfinity;
  hi = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double q = y(i) / r(i);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
}

}  // namespace detail

// Perron eigenpair of a non-negative matrix with positive off-diagonal part
// (or a diagonal one). A divergent entry yields rho = +inf.
inline SpectralResult perron(const Matrix& a, const PerronOptions& opt = {}) {
  const Eigen::Index k = a.rows();
  SpectralResult out;
  if (!a.allFinite()) {
    out.rho = kInfinity;
    out.residual = kInfinity;
    out.cw_lower = out.cw_upper = kInfinity;
    return out;
  }
  if ((a.array() < 0.0).any()) throw NumericError("Perron solver needs a non-negative matrix");

  const Matrix off = a - Matrix(a.diagonal().asDiagonal());
  if (off.isZero(0.0)) {
    Eigen::Index arg = 0;
    out.rho = a.diagonal().maxCoeff(&arg);
    out.eigvec = Vector::Zero(k);
    out.eigvec(arg) = 1.0;
    out.cw_lower = out.cw_upper = out.rho;
    return out;
  }

  Vector r = Vector::Constant(k, 1.0 / static_cast<double>(k));
  double lo = 0.0;
  double hi = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < std::min(opt.power_budget, opt.max_iterations); ++it) {
    detail::collatz_wielandt(a, r, lo, hi);
    if (hi - lo <= opt.tolerance * hi) {
      converged = true;
      break;
    }
    const Vector y = a * r;
    r = y / y.sum();
  }
  if (!converged) {
    // Slow power convergence (|lambda_2| close to rho): inverse iteration with
    // a shift just above the Collatz-Wielandt upper bound, which is closer to
    // rho than to any other eigenvalue.
    const double sigma = hi * (1.0 + 1e-9) + std::numeric_limits<double>::min();
    const Eigen::PartialPivLU<Matrix> lu(sigma * Matrix::Identity(k, k) - a);
    for (; it < opt.max_iterations; ++it) {
      Vector y = lu.solve(r);
      y = y.cwiseAbs();
      r = y / y.sum();
      detail::collatz_wielandt(a, r, lo, hi);
      if (hi - lo <= opt.tolerance * hi) break;
    }
  }
  const Vector ar = a * r;
  out.rho = std::clamp(ar.sum() / r.sum(), lo, hi);
  out.eigvec = r;
  out.residual = (ar - out.rho * r).cwiseAbs().maxCoeff();
  out.iterations = it;
  out.cw_lower = lo;
  out.cw_upper = hi;
  return out;
}

inline SpectralResult perron(const MomentMatrix& a, const PerronOptions& opt = {}) {
  return perron(a.entries, opt);
}

enum class Regime { non_condensation, condensation, boundary };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::non_condensation: return "non_condensation";
    case Regime::condensation: return "condensation";
    case Regime::boundary: return "boundary";
  }
  return "unknown";
}

// z_c, the regime, and the positive solution (U, alpha) of
//   A(z_c) U + alpha 1 = U,  U_0 = 1.
struct CriticalSolution {
  double z_c = 0.0;
  Regime regime = Regime::non_condensation;
  double alpha = 0.0;
  Vector U;
  double z_top = 0.0;    // right end of the search interval
  double rho_top = 0.0;  // rho(A(z_top)), +inf at a pole
  double residual = 0.0; // ||A(z_c) U + alpha 1 - U||_inf
  int bisection_steps = 0;
};

inline constexpr double kBoundaryTolerance = 1e-10;

// Shared solver for any increasing family of positive matrices on
// [0, z_top]; `build` may return infinite entries at z_top.
inline CriticalSolution solve_critical(const std::function<Matrix(double)>& build, double z_top) {
  CriticalSolution sol;
  sol.z_top = z_top;
  const Matrix top = build(z_top);
  const SpectralResult at_top = perron(top);
  sol.rho_top = at_top.rho;
  const Eigen::Index k = top.rows();

  Matrix a_c;
  if (std::isfinite(at_top.rho) && std::abs(at_top.rho - 1.0) < kBoundaryTolerance) {
    sol.regime = Regime::boundary;
    sol.z_c = z_top;
    sol.U = at_top.eigvec / at_top.eigvec(0);
    a_c = top;
  } else if (at_top.rho > 1.0) {
    sol.regime = Regime::non_condensation;
    double lo = 0.0;
    double hi = z_top;
    int steps = 0;
    while (steps < 200 && hi - lo > 1e-14 * z_top) {
      const double mid = 0.5 * (lo + hi);
      if (perron(build(mid)).rho <= 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      ++steps;
    }
    sol.bisection_steps = steps;
    sol.z_c = lo;
    a_c = build(lo);
    const SpectralResult pr = perron(a_c);
    sol.U = pr.eigvec / pr.eigvec(0);
  } else {
    sol.regime = Regime::condensation;
    sol.z_c = z_top;
    a_c = top;
    const Vector y = (Matrix::Identity(k, k) - top).partialPivLu().solve(Vector::Ones(k));
    if (!((y.array() > 0.0).all())) throw NumericError("(I - A) Y = 1 has a non-positive solution");
    sol.U = y / y(0);
    sol.alpha = 1.0 / y(0);
  }
  sol.residual = (a_c * sol.U + Vector::Constant(k, sol.alpha) - sol.U).cwiseAbs().maxCoeff();
  return sol;
}

inline CriticalSolution find_zc(const ModelInstance& model) {
  const EnvironmentCycle& cycle = model.cycle();
  return solve_critical([&cycle](double z) { return build_A(cycle, z).entries; },
                        1.0 / model.eta0());
}

// Column generating functions rho_j(z); column j of A(z) sums to rho_j(z).
inline Vector column_rhos(const EnvironmentCycle& cycle, double z) {
  Vector r(cycle.size());
  for (std::size_t j = 0; j < cycle.size(); ++j) r(j) = rho_single(cycle[j], z);
  return r;
}

// B(z) = A(z) - I - (1/k)(rho_j(z) - 1)_{i,j}; every column sums to zero.
inline Matrix build_B(const EnvironmentCycle& cycle, double z) {
  const auto k = static_cast<Eigen::Index>(cycle.size());
  const MomentMatrix a = build_A(cycle, z);
  if (a.divergent()) throw NumericError("B(z) undefined at pole");
  const Vector r = column_rhos(cycle, z);
  Matrix b = a.entries - Matrix::Identity(k, k);
  for (Eigen::Index j = 0; j < k; ++j) b.col(j).array() -= (r(j) - 1.0) / static_cast<double>(k);
  return b;
}

struct MinorsSolution {
  Vector N;  // diagonal minors of B(z_c)
  Vector U;
  double alpha = 0.0;
};

// (U, alpha) from the diagonal minors of B(z_c).
inline MinorsSolution minors_solution(const EnvironmentCycle& cycle, double z_c) {
  const auto k = static_cast<Eigen::Index>(cycle.size());
  const Matrix b = build_B(cycle, z_c);
  MinorsSolution out;
  out.N.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) out.N(j) = k == 1 ? 1.0 : minor_det(b, j, j);
  const double scale = std::pow(std::max(1.0, max_abs(b)), static_cast<double>(k - 1));
  if (std::abs(out.N(0)) < 1e-13 * scale) throw NumericError("minor degenerate");
  out.U = out.N / out.N(0);
  const Vector r = column_rhos(cycle, z_c);
  out.alpha = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) out.alpha += out.U(j) * (1.0 - r(j));
  out.alpha /= static_cast<double>(k);
  return out;
}

// det(I - A(z)); same sign as 1 - rho(A(z)).
inline double psi(const EnvironmentCycle& cycle, double z) {
  const MomentMatrix a = build_A(cycle, z);
  if (a.divergent()) throw NumericError("psi undefined at pole");
  const auto k = a.size();
  return determinant(Matrix::Identity(k, k) - a.entries);
}

// Two-environment criterion
//   sum_j (1 - int beta_j q_j/(1 - zx)) / (1 - int beta_j q_j/(1 + zx)),
// same sign as 1 - rho(A(z)).
inline double gamma2(const EnvironmentCycle& cycle, double z) {
  if (cycle.size() != 2) throw ModelError("gamma2 requires exactly two environments");
  double g = 0.0;
  for (const Environment& env : cycle.envs()) {
    double plus = 0.0;
    for (const Atom& a : env.q.atoms()) plus += a.mass / (1.0 + z * a.location);
    g += (1.0 - rho_single(env, z)) / (1.0 - env.beta * plus);
  }
  return g;
}

struct RhoBounds {
  double min_rho_j = 0.0;
  double rho = 0.0;
  double max_rho_j = 0.0;
  double mixed = 0.0;  // sum_i R_i rho_i(z) with R the sum-one Perron vector
};

inline RhoBounds rho_bounds(const EnvironmentCycle& cycle, double z) {
  const Vector r = column_rhos(cycle, z);
  const SpectralResult pr = perron(build_A(cycle, z));
  RhoBounds b;
  b.min_rho_j = r.minCoeff();
  b.max_rho_j = r.maxCoeff();
  b.rho = pr.rho;
  b.mixed = std::isfinite(pr.rho) ? pr.eigvec.dot(r) : kInfinity;
  return b;
}

struct RealEigenpairs {
  std::vector<double> values;  // real eigenvalues >= 1
  std::vector<Vector> vectors;
};

// Real eigenvalues >= 1 of a real matrix and their (real) eigenvectors.
inline RealEigenpairs real_eigenpairs_at_least_one(const Matrix& a) {
  if (!a.allFinite()) throw NumericError("eigen census needs finite entries");
  Eigen::EigenSolver<Matrix> es(a, true);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  RealEigenpairs out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto lambda = es.eigenvalues()(i);
    if (std::abs(lambda.imag()) > 1e-10 * std::max(1.0, std::abs(lambda))) continue;
    if (lambda.real() < 1.0) continue;
    out.values.push_back(lambda.real());
    Vector v = es.eigenvectors().col(i).real();
    out.vectors.push_back(v / v.cwiseAbs().maxCoeff());
  }
  return out;
}

// Number of real eigenvalues >= 1; at most one for every A(z), z > 0.
inline int real_eigen_census(const MomentMatrix& a) {
  return static_cast<int>(real_eigenpairs_at_least_one(a.entries).values.size());
}

struct SweepRow {
  double z = 0.0;
  double rho = 0.0;
  double psi = 0.0;     // NaN at a pole
  double gamma2 = 0.0;  // NaN unless k == 2
  double min_rho_j = 0.0;
  double max_rho_j = 0.0;
};

// Evaluates the spectral quantities on each probe; probes are independent
// and are split across worker threads.
inline std::vector<SweepRow> spectral_sweep(const EnvironmentCycle& cycle, std::span<const double> zs,
                                            unsigned threads = std::thread::hardware_concurrency()) {
  std::vector<SweepRow> rows(zs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const double z = zs[n];
      SweepRow row;
      row.z = z;
      const MomentMatrix a = build_A(cycle, z);
      row.rho = perron(a).rho;
      const auto k = a.size();
      row.psi = a.divergent() ? std::numeric_limits<double>::quiet_NaN()
                              : determinant(Matrix::Identity(k, k) - a.entries);
      row.gamma2 = cycle.size() == 2 ? gamma2(cycle, z) : std::numeric_limits<double>::quiet_NaN();
      const Vector r = column_rhos(cycle, z);
      row.min_rho_j = r.minCoeff();
      row.max_rho_j = r.maxCoeff();
      rows[n] = row;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads == 0 ? 1 : threads, 1, std::max<std::size_t>(1, zs.size()));
  if (workers <= 1) {
    work(0, zs.size());
    return rows;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (zs.size() + workers - 1) / workers;
  for (std::size_t b = 0; b < zs.size(); b += chunk) {
    jobs.push_back(std::async(std::launch::async, work, b, std::min(zs.size(), b + chunk)));
  }
  for (auto& j : jobs) j.get();
  return rows;
}

}  // namespace kingman
