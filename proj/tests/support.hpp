#pragma once

// Test-only generators and oracles. The oracles deliberately avoid the
// library's SVD path: restricted least squares goes through a pivoted QR of
// the explicitly extracted columns.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sindy/core.hpp"

namespace sindy::testing {

inline Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

/// Coefficient matrix with exactly `nonzeros` active entries per column,
/// magnitudes uniform in [min_abs, min_abs + 2] and random signs.
inline Matrix planted_coefficients(std::mt19937_64& rng, Eigen::Index features, Eigen::Index targets,
                                   int nonzeros, double min_abs = 1.0) {
  Matrix xi = Matrix::Zero(features, targets);
  std::uniform_real_distribution<double> mag(min_abs, min_abs + 2.0);
  std::bernoulli_distribution sign(0.5);
  for (Eigen::Index j = 0; j < targets; ++j) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(features));
    for (Eigen::Index i = 0; i < features; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int k = 0; k < nonzeros; ++k) {
      xi(idx[static_cast<std::size_t>(k)], j) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    }
  }
  return xi;
}

inline Matrix restricted_ols_oracle(const Matrix& theta, const Matrix& xdot, const BoolMatrix& support) {
  Matrix xi = Matrix::Zero(theta.cols(), xdot.cols());
  for (Eigen::Index j = 0; j < xdot.cols(); ++j) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < theta.cols(); ++i) {
      if (support(i, j)) idx.push_back(i);
    }
    if (idx.empty()) continue;
    Matrix sub(theta.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = theta.col(idx[c]);
    const Vector coef = sub.colPivHouseholderQr().solve(xdot.col(j));
    for (std::size_t c = 0; c < idx.size(); ++c) xi(idx[c], j) = coef[static_cast<Eigen::Index>(c)];
  }
  return xi;
}

inline double rms(const Eigen::Ref<const Vector>& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace sindy::testing
