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

// Small dense linear algebra helpers on top of Eigen.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace kingman {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// LU with partial pivoting; the empty matrix has determinant 1.
inline double determinant(const Matrix& m) {
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

// `m` with row `row` and column `col` removed.
inline Matrix submatrix(const Matrix& m, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = m.rows();
  Matrix out(n - 1, m.cols() - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == row) continue;
    for (Eigen::Index j = 0, oj = 0; j < m.cols(); ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

// (row, col)-minor.
inline double minor_det(const Matrix& m, Eigen::Index row, Eigen::Index col) {
  return determinant(submatrix(m, row, col));
}

// `m` with column `col` replaced by `v`.
inline Matrix replace_column(Matrix m, Eigen::Index col, const Vector& v) {
  m.col(col) = v;
  return m;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace kingman
