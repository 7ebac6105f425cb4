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

#include "kingman/measure.hpp"
#include "kingman/recursion.hpp"
#include "support/random_models.hpp"

namespace kingman {
namespace {

Measure pm(std::vector<Atom> atoms) { return Measure(std::move(atoms), MeasureKind::probability); }

TEST(Measure, RejectsBadInput) {
  EXPECT_THROW(pm({{1.5, 1.0}}), ModelError);
  EXPECT_THROW(pm({{0.5, -1.0}}), ModelError);
  EXPECT_THROW(pm({{0.5, 0.7}}), ModelError);
  EXPECT_THROW(Measure({{0.5, 0.7}, {0.6, 0.7}}, MeasureKind::sub_probability), ModelError);
  EXPECT_NO_THROW(Measure({{0.5, 0.7}}, MeasureKind::sub_probability));
}

TEST(Measure, CanonicalMergesAndSorts) {
  const Measure m = pm({{0.8, 0.25}, {0.2, 0.5}, {0.8 + 1e-13, 0.25}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m.atoms()[0].location, 0.2);
  EXPECT_DOUBLE_EQ(m.atoms()[1].mass, 0.5);
}

TEST(Measure, SupportMax) {
  EXPECT_EQ(support_max(Measure::dirac(1.0)), 1.0);
  EXPECT_EQ(support_max(pm({{0.25, 0.5}, {0.5, 0.5}})), 0.5);
  EXPECT_EQ(support_max(pm({{0.5, 0.2}, {0.8, 0.8}})), 0.8);
  EXPECT_THROW(support_max(Measure()), ModelError);
}

TEST(Measure, Moment) {
  EXPECT_DOUBLE_EQ(moment(Measure::dirac(0.5), 2), 0.25);
  EXPECT_DOUBLE_EQ(moment(pm({{0.3, 0.4}, {0.9, 0.6}}), 0), 1.0);
  EXPECT_NEAR(moment(pm({{0.5, 0.2}, {1.0, 0.8}}), 1), 0.9, 1e-15);
}

TEST(Measure, SizeBias) {
  auto d = size_bias(Measure::dirac(0.5));
  EXPECT_EQ(d.measure, Measure::dirac(0.5));
  EXPECT_DOUBLE_EQ(d.mean, 0.5);
  auto s = size_bias(pm({{0.5, 0.5}, {1.0, 0.5}}));
  EXPECT_DOUBLE_EQ(s.mean, 0.75);
  EXPECT_NEAR(s.measure.atoms()[0].mass, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.measure.atoms()[1].mass, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(size_bias(Measure::dirac(0.0)), NumericError);
}

TEST(Measure, SizeBiasDropsZeroAtom) {
  auto s = size_bias(pm({{0.0, 0.5}, {0.5, 0.5}}));
  EXPECT_EQ(s.measure, Measure::dirac(0.5));
}

TEST(Measure, Truncate) {
  EXPECT_EQ(truncate(Measure::dirac(1.0), 0.9), Measure::dirac(0.9));
  const Measure t = truncate(pm({{0.5, 0.5}, {1.0, 0.5}}), 0.75);
  EXPECT_EQ(t, pm({{0.5, 0.5}, {0.75, 0.5}}));
  const Measure m = pm({{0.2, 0.3}, {0.6, 0.7}});
  EXPECT_EQ(truncate(m, 1.0), m);
  EXPECT_THROW(truncate(m, 0.0), ModelError);
}

TEST(Measure, TvDistance) {
  const Measure m = pm({{0.2, 0.3}, {0.6, 0.7}});
  EXPECT_EQ(tv_distance(m, m, {0.0, 1.0}), 0.0);
  EXPECT_EQ(tv_distance(Measure::dirac(0.5), Measure::dirac(0.8), {0.0, 1.0}), 2.0);
  EXPECT_EQ(tv_distance(Measure::dirac(0.5), Measure::dirac(0.8), {0.0, 0.6}), 1.0);
}

TEST(Measure, LeqEta) {
  const Measure m = pm({{0.5, 0.5}, {1.0, 0.5}});
  EXPECT_TRUE(leq_eta(m, m, 1.0));
  EXPECT_TRUE(leq_eta(Measure::dirac(1.0), m, 1.0));
  EXPECT_FALSE(leq_eta(pm({{0.5, 0.6}, {1.0, 0.4}}), m, 1.0));
}

TEST(Measure, Discretize) {
  const Measure u = discretize_density([](double) { return 1.0; }, {0.0, 0.5}, 4);
  ASSERT_EQ(u.size(), 4u);
  EXPECT_NEAR(u.atoms()[0].location, 0.0625, 1e-15);
  EXPECT_NEAR(moment(u, 1), 0.25, 1e-15);
  EXPECT_THROW(discretize_density([](double) { return 0.0; }, {0.0, 1.0}, 4), ModelError);
}

TEST(MeasureProperty, SizeBiasAndTruncation) {
  testing::RandomModels r(11);
  for (int t = 0; t < 200; ++t) {
    const Measure m = r.measure(r.integer(1, 6), 0.01, 1.0);
    const auto s = size_bias(m);
    EXPECT_NEAR(s.measure.total_mass(), 1.0, 1e-12);
    EXPECT_LE(support_max(s.measure), support_max(m));
    const double th = r.uniform(0.05, 1.0);
    EXPECT_NEAR(truncate(m, th).total_mass(), m.total_mass(), 1e-12);
  }
}

TEST(MeasureProperty, TvPseudometric) {
  testing::RandomModels r(12);
  for (int t = 0; t < 200; ++t) {
    const Measure a = r.measure(r.integer(1, 5), 0.0, 1.0);
    const Measure b = r.measure(r.integer(1, 5), 0.0, 1.0);
    const Measure c = r.measure(r.integer(1, 5), 0.0, 1.0);
    const Interval w{r.uniform(0.0, 0.5), r.uniform(0.5, 1.0)};
    EXPECT_DOUBLE_EQ(tv_distance(a, b, w), tv_distance(b, a, w));
    EXPECT_LE(tv_distance(a, c, w), tv_distance(a, b, w) + tv_distance(b, c, w) + 1e-15);
    EXPECT_EQ(tv_distance(a, a, w), 0.0);
    EXPECT_LE(tv_distance(a, b, w), 2.0 + 1e-15);
  }
}

// b with part of its mass below eta moved up to eta: a <=_{eta^-} b.
Measure push_up(testing::RandomModels& r, const Measure& b, double eta) {
  std::vector<Atom> atoms;
  double moved = 0.0;
  for (const Atom& x : b.atoms()) {
    if (x.location < eta - 1e-12) {
      const double keep = r.uniform(0.0, 1.0) * x.mass;
      moved += x.mass - keep;
      if (keep > 0.0) atoms.push_back({x.location, keep});
    } else {
      atoms.push_back(x);
    }
  }
  atoms.push_back({eta, moved});
  std::erase_if(atoms, [](const Atom& a) { return a.mass <= 0.0; });
  return pm(atoms);
}

TEST(MeasureProperty, PartialOrder) {
  testing::RandomModels r(13);
  for (int t = 0; t < 200; ++t) {
    const Measure c = r.measure(r.integer(1, 5), 0.05, 0.9);
    const double eta = 1.0;
    const Measure b = push_up(r, c, eta);
    const Measure a = push_up(r, b, eta);
    EXPECT_TRUE(leq_eta(a, a, eta));
    EXPECT_TRUE(leq_eta(a, b, eta));
    EXPECT_TRUE(leq_eta(b, c, eta));
    EXPECT_TRUE(leq_eta(a, c, eta));  // transitivity
    if (leq_eta(b, a, eta)) {
      EXPECT_NEAR(tv_distance(a, b, {0.0, eta - 1e-9}), 0.0, 1e-15);
    }
  }
}

TEST(MeasureProperty, StepPreservesOrderAndMeans) {
  testing::RandomModels r(14);
  for (int t = 0; t < 200; ++t) {
    const double eta = r.uniform(0.4, 1.0);
    const Measure b = pm([&] {
      auto body = r.measure(r.integer(1, 4), 0.05 * eta, 0.95 * eta).atoms();
      for (Atom& x : body) x.mass *= 0.8;
      body.push_back({eta, 0.2});
      return body;
    }());
    const Measure a = push_up(r, b, eta);
    ASSERT_TRUE(leq_eta(a, b, eta));
    EXPECT_LE(moment(b, 1), moment(a, 1) + 1e-15);
    const Environment env{r.uniform(0.02, 0.9), r.measure(r.integer(1, 3), 0.05 * eta, eta)};
    EXPECT_TRUE(leq_eta(step(a, env).p, step(b, env).p, eta, 1e-14));
  }
}

}  // namespace
}  // namespace kingman
