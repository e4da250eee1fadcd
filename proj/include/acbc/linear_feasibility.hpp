#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace acbc {

// Decides whether some x satisfies rows * x > 0 componentwise. The system is
// homogeneous, so this is the same as rows * x >= 1, which a phase-one
// simplex with Bland's rule settles exactly up to `tolerance`.
template <typename Scalar>
bool strictly_feasible(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rows,
                       Scalar tolerance = Scalar(1e-9)) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = rows.rows();
  const Eigen::Index n = rows.cols();
  if (m == 0) return true;

  // Columns: x+ (n) | x- (n) | surplus (m) | artificial (m) | rhs
  const Eigen::Index width = 2 * n + 2 * m + 1;
  const Eigen::Index rhs = width - 1;
  Matrix tableau = Matrix::Zero(m + 1, width);
  tableau.topLeftCorner(m, n) = rows;
  tableau.block(0, n, m, n) = -rows;
  tableau.block(0, 2 * n, m, m) = -Matrix::Identity(m, m);
  tableau.block(0, 2 * n + m, m, m) = Matrix::Identity(m, m);
  tableau.col(rhs).head(m).setOnes();
  // Reduced costs of minimising the artificial sum, basis = artificials.
  tableau.row(m) = -tableau.topRows(m).colwise().sum();
  tableau.block(m, 2 * n + m, 1, m).setZero();

  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = 2 * n + m + i;

  const Eigen::Index max_pivots = 50 * (width + m);
  for (Eigen::Index iteration = 0; iteration < max_pivots; ++iteration) {
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < rhs; ++j) {
      if (tableau(m, j) < -tolerance) {
        entering = j;
        break;
      }
    }
    if (entering < 0) break;

    Eigen::Index leaving = -1;
    Scalar best = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar coefficient = tableau(i, entering);
      if (coefficient <= tolerance) continue;
      const Scalar ratio = tableau(i, rhs) / coefficient;
      if (leaving < 0 || ratio < best - tolerance ||
          (std::abs(ratio - best) <= tolerance && basis[i] < basis[leaving])) {
        leaving = i;
        best = ratio;
      }
    }
    if (leaving < 0) break;  // unbounded direction; cannot happen in phase one

    tableau.row(leaving) /= tableau(leaving, entering);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leaving) continue;
      const Scalar factor = tableau(i, entering);
      if (factor != Scalar(0)) tableau.row(i) -= factor * tableau.row(leaving);
    }
    basis[leaving] = entering;
  }
  return -tableau(m, rhs) <= tolerance * Scalar(m);
}

}  // namespace acbc
