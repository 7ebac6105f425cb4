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

// Generating functions of the normalized weights V_n = W_n / (1 - bbar)^n,
//
//   w^(i)(z) = sum_{n >= 1, n = i mod k} V_n z^n,
//
// evaluated from a simulated trajectory and in closed (Cramer) form.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "kingman/error.hpp"
#include "kingman/linalg.hpp"
#include "kingman/model.hpp"
#include "kingman/recursion.hpp"
#include "kingman/spectral.hpp"

namespace kingman {

// (1 - bbar)^k = prod (1 - beta_i).
inline double beta_bar(const EnvironmentCycle& cycle) {
  double s = 0.0;
  for (const Environment& e : cycle.envs()) s += std::log1p(-e.beta);
  return -std::expm1(s / static_cast<double>(cycle.size()));
}

// c_{ij} = prod_{q < [i-j]} (1 - beta_[i-q]) / (1 - bbar)^[i-j], c_ii = 1.
inline Matrix c_matrix(const EnvironmentCycle& cycle) {
  const std::size_t k = cycle.size();
  const double log_bar = std::log1p(-beta_bar(cycle));
  Matrix c(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = residue(static_cast<long long>(i) - static_cast<long long>(j), k);
      double l = 0.0;
      for (std::size_t q = 0; q < r; ++q) {
        l += std::log1p(-cycle[residue(static_cast<long long>(i) - static_cast<long long>(q), k)].beta);
      }
      c(i, j) = i == j ? 1.0 : std::exp(l - static_cast<double>(r) * log_bar);
    }
  }
  return c;
}

// Weights b_ij = f_j ... f_{i-1} below the diagonal and their reciprocals
// above it; any positive f_0..f_{k-2} leave det(B o A) = det(A).
inline Matrix hadamard_weights(const std::vector<double>& f) {
  const std::size_t k = f.size() + 1;
  Matrix b = Matrix::Ones(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double p = 1.0;
      for (std::size_t m = j; m < i; ++m) p *= f[m];
      b(i, j) = p;
      b(j, i) = 1.0 / p;
    }
  }
  return b;
}

// f_m = (1 - beta_{m+1}) / (1 - bbar), for which hadamard_weights = c_matrix.
inline std::vector<double> c_factors(const EnvironmentCycle& cycle) {
  const double bar = 1.0 - beta_bar(cycle);
  std::vector<double> f;
  for (std::size_t m = 0; m + 1 < cycle.size(); ++m) f.push_back((1.0 - cycle[m + 1].beta) / bar);
  return f;
}

// Residue parts of sum_{n >= 1} m_n z^n with m_n = int x^n p0(dx).
inline Vector m_gen(const Measure& p0, double z, std::size_t k) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(k));
  for (const Atom& a : p0.atoms()) {
    const double t = z * a.location;
    if (!detail::inside_domain(t)) throw NumericError("m(z) undefined at pole");
    const double d = detail::one_minus_power(t, k);
    for (std::size_t i = 0; i < k; ++i) {
      const int e = i == 0 ? static_cast<int>(k) : static_cast<int>(i);
      m(static_cast<Eigen::Index>(i)) += a.mass * std::pow(t, e) / d;
    }
  }
  return m;
}

struct WeightSeries {
  double z = 0.0;
  std::size_t N = 0;
  Vector value;       // partial sums up to n = N
  Vector tail_bound;  // bound on the remainder, plus rounding allowance
  std::vector<double> ratio;  // per-period term ratio used for the bound
};

inline void require_inside_disk(double z, double z_c) {
  if (!(z >= 0.0)) throw NumericError("z must be non-negative");
  if (!(z < z_c)) throw NumericError("outside convergence disk");
}

// Partial sums from a simulated trajectory. The tail after the last term t
// of a residue class is bounded by t r / (1 - r), r the largest per-period
// ratio among the last ten periods and the asymptotic ratio (z/z_c)^k.
inline WeightSeries weight_series(const ModelInstance& model, double z, std::size_t N, double z_c) {
  require_inside_disk(z, z_c);
  const std::size_t k = model.k();
  const auto kk = static_cast<Eigen::Index>(k);
  IterateOptions opts;
  opts.geometric_snapshots = false;
  opts.tail_snapshots = 1;
  const Trajectory traj = iterate(model, N, opts);
  const double log_bar = std::log1p(-beta_bar(model.cycle()));

  WeightSeries ws;
  ws.z = z;
  ws.N = N;
  ws.value = Vector::Zero(kk);
  ws.tail_bound = Vector::Zero(kk);
  ws.ratio.assign(k, 0.0);
  if (z == 0.0) return ws;

  const double log_z = std::log(z);
  std::vector<double> terms(N + 1, 0.0);
  Vector abs_sum = Vector::Zero(kk);
  for (std::size_t n = 1; n <= N; ++n) {
    const double dn = static_cast<double>(n);
    terms[n] = std::exp(traj.steps()[n].log_W - dn * log_bar + dn * log_z);
    ws.value(static_cast<Eigen::Index>(n % k)) += terms[n];
    abs_sum(static_cast<Eigen::Index>(n % k)) += terms[n];
  }
  const double asymptotic = std::pow(z / z_c, static_cast<double>(k));
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::size_t last = N - ((N + k - i) % k);  // largest n <= N in class i
    if (last == 0 || last > N) {
      ws.tail_bound(ii) = kInfinity;
      continue;
    }
    double r = asymptotic;
    for (std::size_t p = 0; p < 10 && last >= (p + 1) * k + 1; ++p) {
      const std::size_t n = last - p * k;
      if (terms[n - k] > 0.0) r = std::max(r, terms[n] / terms[n - k]);
    }
    ws.ratio[i] = r;
    const double rounding = 8.0 * static_cast<double>(N) * eps * abs_sum(ii);
    ws.tail_bound(ii) = r < 1.0 ? terms[last] * r / (1.0 - r) + rounding : kInfinity;
  }
  return ws;
}

inline WeightSeries weight_series(const ModelInstance& model, double z, std::size_t N) {
  return weight_series(model, z, N, find_zc(model).z_c);
}

// w^(j)(z) = c_{j,0} det((I - A, M)_j) / det(I - A), where (X, M)_j is X
// with column j replaced by M.
inline Vector weight_closed_form(const ModelInstance& model, double z, double z_c) {
  require_inside_disk(z, z_c);
  const std::size_t k = model.k();
  const auto kk = static_cast<Eigen::Index>(k);
  const Matrix ia = Matrix::Identity(kk, kk) - build_A(model.cycle(), z).entries;
  const Vector m = m_gen(model.p0(), z, k);
  const Matrix c = c_matrix(model.cycle());
  const double d = determinant(ia);
  if (d == 0.0) throw NumericError("det(I - A(z)) vanishes");
  Vector w(kk);
  for (Eigen::Index j = 0; j < kk; ++j) w(j) = c(j, 0) * determinant(replace_column(ia, j, m)) / d;
  return w;
}

inline Vector weight_closed_form(const ModelInstance& model, double z) {
  return weight_closed_form(model, z, find_zc(model).z_c);
}

// Residual of w = (C o A) w + C_0 o M for given w values.
inline Vector recurrence_residual(const ModelInstance& model, double z, const Vector& w) {
  const std::size_t k = model.k();
  const Matrix c = c_matrix(model.cycle());
  const Matrix a = build_A(model.cycle(), z).entries;
  const Vector m = m_gen(model.p0(), z, k);
  return w - c.cwiseProduct(a) * w - c.col(0).cwiseProduct(m);
}

// Largest recurrence residual of the truncated series.
inline double recurrence_check(const ModelInstance& model, double z, std::size_t N, double z_c) {
  const WeightSeries ws = weight_series(model, z, N, z_c);
  return recurrence_residual(model, z, ws.value).cwiseAbs().maxCoeff();
}

inline double recurrence_check(const ModelInstance& model, double z, std::size_t N) {
  return recurrence_check(model, z, N, find_zc(model).z_c);
}

struct HadamardResult {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;  // relative to max(1, |det A|)
  std::size_t trials = 0;
};

// det(C o A) against det(A) on random matrices with entries in (0, 1).
inline HadamardResult hadamard_check(const std::vector<double>& betas, std::size_t trials,
                                     std::uint64_t seed = 1) {
  if (betas.empty()) throw ModelError("hadamard_check needs at least one beta");
  std::vector<Environment> envs;
  for (double b : betas) envs.push_back({b, Measure::dirac(1.0)});
  const Matrix c = c_matrix(EnvironmentCycle(std::move(envs)));
  const auto k = c.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HadamardResult out;
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix a(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) a(i, j) = u(rng);
    const double da = determinant(a);
    const double err = std::abs(determinant(c.cwiseProduct(a)) - da);
    out.max_abs_error = std::max(out.max_abs_error, err);
    out.max_rel_error = std::max(out.max_rel_error, err / std::max(1.0, std::abs(da)));
  }
  return out;
}

// One row of the genfun table.
struct WeightGenFun {
  double z = 0.0;
  double beta_bar = 0.0;
  Matrix c;
  Vector m;
  WeightSeries series;
  Vector closed;
  Vector recurrence;         // residual of the series values
  double matrix_identity = 0.0;  // |(C o (I - A)) W_closed - C_0 o M|_inf
};

inline WeightGenFun evaluate_genfun(const ModelInstance& model, double z, std::size_t N, double z_c) {
  const std::size_t k = model.k();
  const auto kk = static_cast<Eigen::Index>(k);
  WeightGenFun g;
  g.z = z;
  g.beta_bar = beta_bar(model.cycle());
  g.c = c_matrix(model.cycle());
  g.m = m_gen(model.p0(), z, k);
  g.series = weight_series(model, z, N, z_c);
  g.closed = weight_closed_form(model, z, z_c);
  g.recurrence = recurrence_residual(model, z, g.series.value);
  const Matrix ia = Matrix::Identity(kk, kk) - build_A(model.cycle(), z).entries;
  g.matrix_identity = (g.c.cwiseProduct(ia) * g.closed - g.c.col(0).cwiseProduct(g.m)).cwiseAbs().maxCoeff();
  return g;
}

}  // namespace kingman
