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

#include "kingman/genfun.hpp"
#include "support/random_models.hpp"

namespace kingman {
namespace {

ModelInstance single(double beta, double q, double p0) {
  return ModelInstance(EnvironmentCycle({{beta, Measure::dirac(q)}}), Measure::dirac(p0));
}

ModelInstance e4() {
  return ModelInstance(EnvironmentCycle({{0.1, Measure::dirac(0.5)}, {0.1, Measure::dirac(0.25)}}),
                       Measure::dirac(1.0));
}

TEST(BetaBar, GeometricMean) {
  const EnvironmentCycle c({{0.1, Measure::dirac(0.5)}, {0.3, Measure::dirac(0.5)}, {0.6, Measure::dirac(0.5)}});
  const double bb = beta_bar(c);
  EXPECT_NEAR(std::pow(1.0 - bb, 3), 0.9 * 0.7 * 0.4, 1e-15);
}

TEST(CMatrix, ReciprocalAndWeights) {
  testing::RandomModels r(51);
  for (int t = 0; t < 50; ++t) {
    const ModelInstance m = r.model(1, 5);
    const Matrix c = c_matrix(m.cycle());
    EXPECT_LT((c.cwiseProduct(c.transpose()) - Matrix::Ones(c.rows(), c.cols())).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((hadamard_weights(c_factors(m.cycle())) - c).cwiseAbs().maxCoeff(), 1e-13 * c.maxCoeff());
  }
}

TEST(CMatrix, EqualBetasGiveOnes) {
  const EnvironmentCycle c({{0.2, Measure::dirac(0.5)}, {0.2, Measure::dirac(0.4)}, {0.2, Measure::dirac(0.3)}});
  EXPECT_LT((c_matrix(c) - Matrix::Ones(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hadamard, TwoByTwoExact) {
  Matrix a(2, 2);
  a << 0.3, 0.7, 0.2, 0.9;
  const Matrix b = hadamard_weights({2.5});
  EXPECT_NEAR(determinant(b.cwiseProduct(a)), a(0, 0) * a(1, 1) - a(1, 0) * a(0, 1), 1e-15);
  EXPECT_LT(hadamard_check({0.1, 0.5, 0.2, 0.8}, 100).max_rel_error, 1e-10);
}

TEST(MGen, DropsConstantTerm) {
  // sum_{n >= 1} z^n m_n for p0 = delta_1 at z = 0.5, k = 1: 0.5 / 0.5.
  EXPECT_NEAR(m_gen(Measure::dirac(1.0), 0.5, 1)(0), 1.0, 1e-15);
  const Vector m2 = m_gen(Measure::dirac(1.0), 0.5, 2);
  EXPECT_NEAR(m2(0), 0.25 / 0.75, 1e-15);
  EXPECT_NEAR(m2(1), 0.5 / 0.75, 1e-15);
  EXPECT_EQ(m_gen(Measure::dirac(1.0), 0.0, 3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Series, ZeroAndDomain) {
  const ModelInstance m = single(0.1, 0.5, 1.0);
  const WeightSeries s = weight_series(m, 0.0, 50);
  EXPECT_EQ(s.value(0), 0.0);
  EXPECT_EQ(weight_closed_form(m, 0.0)(0), 0.0);
  EXPECT_THROW(weight_series(m, 1.0, 50), NumericError);
  EXPECT_THROW(weight_closed_form(m, 1.2), NumericError);
  EXPECT_EQ(recurrence_check(m, 0.0, 10), 0.0);
}

TEST(Series, E1TailBoundAndMonotone) {
  const ModelInstance m = single(0.1, 0.5, 1.0);
  const WeightSeries s = weight_series(m, 0.5, 200);
  EXPECT_LT(s.tail_bound(0), 1e-12);
  double prev = 0.0;
  for (std::size_t n : {10, 20, 40, 80}) {
    const double v = weight_series(m, 0.5, n).value(0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Series, MatchesClosedForm) {
  for (const ModelInstance& m : {single(0.1, 0.5, 1.0), single(0.5, 0.8, 1.0), e4()}) {
    const double zc = find_zc(m).z_c;
    for (double z : {0.1, 0.3, 0.5 * zc}) {
      const WeightSeries s = weight_series(m, z, 400, zc);
      const Vector c = weight_closed_form(m, z, zc);
      for (Eigen::Index i = 0; i < c.size(); ++i) EXPECT_LE(std::abs(s.value(i) - c(i)), s.tail_bound(i));
    }
  }
}

TEST(Series, K1Reduction) {
  // k = 1: w(z) = m(z) / (1 - A(z)).
  const ModelInstance m = single(0.3, 0.6, 0.9);
  const double z = 0.4;
  const double a = build_A(m.cycle(), z).entries(0, 0);
  EXPECT_NEAR(weight_closed_form(m, z)(0), m_gen(m.p0(), z, 1)(0) / (1.0 - a), 1e-15);
}

TEST(Recurrence, ShrinksWithN) {
  const ModelInstance m = single(0.1, 0.5, 1.0);
  const double r100 = recurrence_check(m, 0.9, 100);
  const double r200 = recurrence_check(m, 0.9, 200);
  EXPECT_LT(r200, r100);
  EXPECT_LT(r100, 1e-2);
}

TEST(Recurrence, RandomK2) {
  testing::RandomModels r(52);
  for (int t = 0; t < 20; ++t) {
    const ModelInstance m = r.model(2, 2);
    const double zc = find_zc(m).z_c;
    if (0.25 >= zc) continue;
    EXPECT_LT(recurrence_check(m, 0.25, 400, zc), 1e-10);
  }
}

TEST(GenFun, MatrixIdentity) {
  testing::RandomModels r(53);
  for (int t = 0; t < 30; ++t) {
    const ModelInstance m = r.model();
    const double zc = find_zc(m).z_c;
    const WeightGenFun g = evaluate_genfun(m, 0.5 * zc, 400, zc);
    EXPECT_LT(g.matrix_identity, 1e-9 * std::max(1.0, g.closed.cwiseAbs().maxCoeff()));
  }
}

}  // namespace
}  // namespace kingman
