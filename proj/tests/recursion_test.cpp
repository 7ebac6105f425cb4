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

#include <gtest/gtest.h>

#include <cmath>

#include "kingman/recursion.hpp"
#include "support/random_models.hpp"

namespace kingman {
namespace {

Measure pm(std::vector<Atom> atoms) { return Measure(std::move(atoms), MeasureKind::probability); }

ModelInstance single(double beta, double q, double p0) {
  return ModelInstance(EnvironmentCycle({{beta, Measure::dirac(q)}}), Measure::dirac(p0));
}

TEST(Cycle, Validation) {
  EXPECT_THROW(EnvironmentCycle({}), ModelError);
  EXPECT_THROW(EnvironmentCycle({{0.0, Measure::dirac(0.5)}}), ModelError);
  EXPECT_THROW(EnvironmentCycle({{1.0, Measure::dirac(0.5)}}), ModelError);
  EXPECT_THROW(EnvironmentCycle({{0.5, Measure::dirac(0.0)}}), ModelError);
  EXPECT_THROW(single(0.2, 0.8, 0.5), ModelError);
  EXPECT_NO_THROW(single(0.2, 0.8, 0.8));
}

TEST(Cycle, RotateHasPeriodK) {
  const EnvironmentCycle c({{0.1, Measure::dirac(0.5)}, {0.2, Measure::dirac(0.3)}, {0.3, Measure::dirac(0.2)}});
  EXPECT_EQ(rotate(c)[0].beta, 0.2);
  const EnvironmentCycle back = rotate(rotate(rotate(c)));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i].beta, c[i].beta);
}

TEST(Step, Examples) {
  const auto fixed = step(Measure::dirac(0.5), {0.5, Measure::dirac(0.5)});
  EXPECT_EQ(fixed.p, Measure::dirac(0.5));
  EXPECT_DOUBLE_EQ(fixed.w, 0.5);
  const auto s = step(Measure::dirac(1.0), {0.1, Measure::dirac(0.5)});
  EXPECT_DOUBLE_EQ(s.w, 1.0);
  EXPECT_NEAR(s.p.mass_at(0.5), 0.1, 1e-15);
  EXPECT_NEAR(s.p.mass_at(1.0), 0.9, 1e-15);
  EXPECT_THROW(step(Measure::dirac(0.0), {0.1, Measure::dirac(0.5)}), NumericError);
}

TEST(Step, SelectiveReductions) {
  const Environment env{0.1, Measure::dirac(0.5)};
  const Measure p = pm({{0.5, 0.5}, {1.0, 0.5}});
  EXPECT_EQ(step_selective(p, env, SelectionMap::identity()).p, step(p, env).p);
  const auto mix = step_selective(p, env, SelectionMap::constant(1.0)).p;
  EXPECT_NEAR(mix.mass_at(0.5), 0.1 + 0.9 * 0.5, 1e-15);
  // s = x^2: biased masses 0.125 : 0.5, so 0.1 + 0.9 * 0.2 and 0.9 * 0.8.
  const auto sq = step_selective(p, env, SelectionMap::power(2.0)).p;
  EXPECT_NEAR(sq.mass_at(0.5), 0.28, 1e-15);
  EXPECT_NEAR(sq.mass_at(1.0), 0.72, 1e-15);
  EXPECT_THROW(step_selective(Measure::dirac(0.5), env, SelectionMap("zero", [](double) { return 0.0; })),
               NumericError);
}

TEST(Iterate, E1) {
  const ModelInstance e1 = single(0.1, 0.5, 1.0);
  const Trajectory t0 = iterate(e1, 0);
  ASSERT_EQ(t0.steps().size(), 1u);
  EXPECT_EQ(t0.steps()[0].w, 1.0);
  EXPECT_EQ(t0.steps()[0].W, 1.0);
  const Trajectory t = iterate(e1, 2000);
  EXPECT_NEAR(t.w(2000), 0.9, 1e-8);
  EXPECT_NEAR(t.last().mass_at(1.0), 0.8, 1e-8);
  EXPECT_TRUE(t.converged_at().has_value());
  ASSERT_NE(t.snapshot(1024), nullptr);
  EXPECT_EQ(t.snapshot(1000), nullptr);
}

TEST(Iterate, E4PeriodicMeans) {
  const ModelInstance e4(EnvironmentCycle({{0.1, Measure::dirac(0.5)}, {0.1, Measure::dirac(0.25)}}),
                         Measure::dirac(1.0));
  const Trajectory t = iterate(e4, 4000);
  EXPECT_NEAR(t.w(4000), 0.91304347826086957, 1e-6);
  EXPECT_NEAR(t.w(3999), 0.88714285714285714, 1e-6);
}

TEST(Decompose, HandExample) {
  const ModelInstance m = single(0.1, 0.5, 1.0);
  const Decomposition d = decompose(m, 1);
  EXPECT_NEAR(d.a.mass_at(0.5), 0.1, 1e-15);
  EXPECT_NEAR(d.b.mass_at(1.0), 0.9, 1e-15);
  EXPECT_THROW(decompose(m, 0), ModelError);
}

TEST(Decompose, BMassDecreasesOnE1) {
  const ModelInstance m = single(0.1, 0.5, 1.0);
  double prev = 1.0;
  for (std::size_t n = 1; n <= 50; ++n) {
    const double b = decompose(m, n).b.total_mass();
    EXPECT_LE(b, prev + 1e-15);
    prev = b;
  }
}

TEST(RecursionProperty, Invariants) {
  testing::RandomModels r(21);
  for (int t = 0; t < 40; ++t) {
    const ModelInstance m = r.model();
    const std::size_t k = m.k();
    IterateOptions opts;
    double worst_mass = 0.0;
    double worst_support = 0.0;
    opts.observer = [&](std::size_t, const Measure& p) {
      worst_mass = std::max(worst_mass, std::abs(p.total_mass() - 1.0));
      worst_support = std::max(worst_support, support_max(p) - m.eta0());
    };
    const Trajectory tr = iterate(m, 40 * k, opts);
    EXPECT_LT(worst_mass, 1e-12);
    EXPECT_LE(worst_support, 1e-12);
    double log_w = 0.0;
    for (std::size_t n = 0; n < tr.steps().size(); ++n) {
      EXPECT_NEAR(tr.steps()[n].log_W, log_w, 1e-12 * (1.0 + std::abs(log_w)));
      log_w += std::log(tr.steps()[n].w);
    }
    for (std::size_t n : {std::size_t{1}, k, 5 * k}) {
      const Decomposition d = decompose(m, n);
      const Measure pn = iterate(m, n).last();
      EXPECT_LT(tv_distance(add(d.a, d.b), pn, {0.0, 1.0}), 1e-12);
    }
  }
}

// From p0 = delta_eta0 the proof's monotone scheme: p_{kn+i} increases for
// the order at eta0 and w_{kn+i} decreases.
TEST(RecursionProperty, MonotoneScheme) {
  testing::RandomModels r(22);
  for (int t = 0; t < 30; ++t) {
    const ModelInstance base = r.model();
    const ModelInstance m(base.cycle(), Measure::dirac(base.eta0()));
    const std::size_t k = m.k();
    std::vector<Measure> ps;
    IterateOptions opts;
    opts.observer = [&](std::size_t, const Measure& p) { ps.push_back(p); };
    const Trajectory tr = iterate(m, 30 * k, opts);
    for (std::size_t n = k; n < ps.size(); ++n) {
      EXPECT_TRUE(leq_eta(ps[n - k], ps[n], m.eta0(), 1e-13)) << "n=" << n;
      EXPECT_LE(tr.w(n), tr.w(n - k) + 1e-14);
    }
  }
}

}  // namespace
}  // namespace kingman
