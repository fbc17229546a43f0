#pragma once

// Sparse regression for Xdot ~= Theta * Xi. Every solver works column by
// column; columns are independent subproblems.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sindy/core.hpp"

namespace sindy {

inline constexpr double kSingularCutoff = 1e-12;
inline constexpr double kConditionWarning = 1e10;

struct StlsqConfig {
  double threshold = 0.1;
  double alpha = 0.05;
  int max_iter = 20;
  bool unbias = true;
};

enum class Thresholder { L0, L1, CAD };

inline std::string to_string(Thresholder t) {
  switch (t) {
    case Thresholder::L0: return "l0";
    case Thresholder::L1: return "l1";
    case Thresholder::CAD: return "cad";
  }
  return "l0";
}

inline Thresholder thresholder_from_string(const std::string& s) {
  if (s == "l0" || s == "L0") return Thresholder::L0;
  if (s == "l1" || s == "L1") return Thresholder::L1;
  if (s == "cad" || s == "CAD") return Thresholder::CAD;
  throw Error(ErrorCode::InvalidArgument, "unknown thresholder '" + s + "'");
}

struct Sr3Config {
  double threshold = 0.1;
  double nu = 1.0;
  double tol = 1e-5;
  Thresholder thresholder = Thresholder::L0;
  int max_iter = 30;
  bool unbias = true;
};

/// Plug-in regressor: fit(Theta, Xdot) -> coefficients.
struct ExternalRegressor {
  std::function<CoefficientMatrix(const FeatureMatrix&, const DerivativeMatrix&)> fit;
  std::string name = "external";
};

using Optimizer = std::variant<StlsqConfig, Sr3Config, ExternalRegressor>;

namespace detail {

inline void check_regression_shapes(const Matrix& theta, const Matrix& xdot) {
  if (theta.rows() != xdot.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "library has " + std::to_string(theta.rows()) +
                                              " rows but derivatives have " + std::to_string(xdot.rows()));
  }
  if (theta.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "library has no columns");
}

// Ridge (alpha > 0) or minimum-norm least squares (alpha == 0) through the
// thin SVD of theta; the normal equations are never formed.
inline Matrix svd_ridge(const Eigen::Ref<const Matrix>& theta, const Eigen::Ref<const Matrix>& rhs,
                        double alpha) {
  const Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return Matrix::Zero(theta.cols(), rhs.cols());
  const double smax = s[0];
  const double cutoff = kSingularCutoff * smax;
  Vector gain(s.size());
  double smin_kept = smax;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (alpha > 0.0) {
      gain[k] = s[k] / (s[k] * s[k] + alpha);
    } else if (s[k] > cutoff) {
      gain[k] = 1.0 / s[k];
    } else {
      gain[k] = 0.0;
    }
    if (s[k] > cutoff) smin_kept = s[k];
  }
  const double smin = s[s.size() - 1];
  const double condition = alpha > 0.0 ? (smax * smax + alpha) / (smin * smin + alpha)
                                        : (smin > cutoff ? smax / smin : smax / smin_kept);
  const bool rank_deficient = theta.rows() < theta.cols() || (alpha == 0.0 && smin <= cutoff);
  if (condition > kConditionWarning || rank_deficient) {
    std::ostringstream msg;
    msg << "ill-conditioned least-squares system (condition " << condition
        << (rank_deficient ? ", rank deficient" : "") << "); consider more regularization";
    warn(msg.str());
  }
  return svd.matrixV() * (gain.asDiagonal() * (svd.matrixU().transpose() * rhs));
}

inline std::vector<Eigen::Index> active_indices(const std::vector<bool>& mask) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

inline Matrix select_columns(const Matrix& theta, const std::vector<Eigen::Index>& idx) {
  Matrix out(theta.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = theta.col(idx[c]);
  return out;
}

}  // namespace detail

/// argmin ||Xdot - Theta Xi||_F^2 + alpha ||Xi||_F^2.
inline Matrix ridge_solve(const Matrix& theta, const Matrix& xdot, double alpha) {
  detail::check_regression_shapes(theta, xdot);
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be nonnegative");
  return detail::svd_ridge(theta, xdot, alpha);
}

inline Matrix ridge_solve(const FeatureMatrix& theta, const DerivativeMatrix& xdot, double alpha) {
  return ridge_solve(theta.values, xdot.values, alpha);
}

/// Ordinary least squares per target column, restricted to the columns of
/// theta marked in support(:, j). Off-support entries are exactly zero.
inline CoefficientMatrix unbias(const Matrix& theta, const Matrix& xdot, const BoolMatrix& support) {
  detail::check_regression_shapes(theta, xdot);
  if (support.rows() != theta.cols() || support.cols() != xdot.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "support must be features x targets");
  }
  Matrix xi = Matrix::Zero(theta.cols(), xdot.cols());
  for (Eigen::Index j = 0; j < xdot.cols(); ++j) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      if (support(i, j)) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const Matrix sub = detail::select_columns(theta, idx);
    const Vector coef = detail::svd_ridge(sub, xdot.col(j), 0.0);
    for (std::size_t c = 0; c < idx.size(); ++c) xi(idx[c], j) = coef[static_cast<Eigen::Index>(c)];
  }
  return CoefficientMatrix(std::move(xi));
}

inline CoefficientMatrix unbias(const FeatureMatrix& theta, const DerivativeMatrix& xdot, const BoolMatrix& support) {
  return unbias(theta.values, xdot.values, support);
}

struct StlsqReport {
  CoefficientMatrix coefficients;
  // Ridge solves performed per target column.
  std::vector<int> iterations;
  // support_history[j][k]: active set of column j going into solve k.
  std::vector<std::vector<std::vector<bool>>> support_history;
  // Coefficients before the unbiasing refit.
  Matrix thresholded;
};

/// Sequentially thresholded least squares with full diagnostics.
inline StlsqReport stlsq_report(const Matrix& theta, const Matrix& xdot, const StlsqConfig& cfg = {}) {
  detail::check_regression_shapes(theta, xdot);
  if (!(cfg.threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be nonnegative");
  if (!(cfg.alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be nonnegative");
  if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!theta.allFinite() || !xdot.allFinite()) throw Error(ErrorCode::NonFinite, "regression input is not finite");

  const Eigen::Index features = theta.cols();
  StlsqReport report;
  report.thresholded = Matrix::Zero(features, xdot.cols());
  report.iterations.assign(static_cast<std::size_t>(xdot.cols()), 0);
  report.support_history.resize(static_cast<std::size_t>(xdot.cols()));

  for (Eigen::Index j = 0; j < xdot.cols(); ++j) {
    auto& history = report.support_history[static_cast<std::size_t>(j)];
    std::vector<bool> active(static_cast<std::size_t>(features), true);
    Vector coef = Vector::Zero(features);
    for (int it = 0; it < cfg.max_iter; ++it) {
      const auto idx = detail::active_indices(active);
      if (idx.empty()) break;
      history.push_back(active);
      ++report.iterations[static_cast<std::size_t>(j)];
      const Vector sub = detail::svd_ridge(detail::select_columns(theta, idx), xdot.col(j), cfg.alpha);
      coef.setZero();
      std::vector<bool> next(static_cast<std::size_t>(features), false);
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const double v = sub[static_cast<Eigen::Index>(c)];
        if (std::abs(v) >= cfg.threshold) {
          coef[idx[c]] = v;
          next[static_cast<std::size_t>(idx[c])] = true;
        }
      }
      const bool unchanged = next == active;
      active = std::move(next);
      if (unchanged) break;
    }
    report.thresholded.col(j) = coef;
  }

  if (cfg.unbias) {
    const BoolMatrix support = report.thresholded.array() != 0.0;
    report.coefficients = unbias(theta, xdot, support);
  } else {
    report.coefficients = CoefficientMatrix(report.thresholded);
  }
  return report;
}

inline CoefficientMatrix stlsq(const FeatureMatrix& theta, const DerivativeMatrix& xdot, const StlsqConfig& cfg = {}) {
  return stlsq_report(theta.values, xdot.values, cfg).coefficients;
}

/// Proximal map of the selected sparsity penalty, elementwise.
///   L0:  hard threshold at `threshold`
///   L1:  soft threshold at `threshold`
///   CAD: zero below threshold, soft-threshold on [threshold, 2*threshold),
///        identity from 2*threshold up
inline double prox(double w, Thresholder kind, double threshold) {
  const double a = std::abs(w);
  switch (kind) {
    case Thresholder::L0:
      return a < threshold ? 0.0 : w;
    case Thresholder::L1:
      return std::copysign(std::max(a - threshold, 0.0), w);
    case Thresholder::CAD:
      if (a < threshold) return 0.0;
      if (a < 2.0 * threshold) return std::copysign(a - threshold, w);
      return w;
  }
  return w;
}

inline Matrix prox(const Matrix& w, Thresholder kind, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "prox threshold must be positive");
  return w.unaryExpr([&](double v) { return prox(v, kind, threshold); });
}

/// Penalty weight lambda whose prox (scaled by nu) cuts at `threshold`.
inline double sr3_lambda(const Sr3Config& cfg) {
  switch (cfg.thresholder) {
    case Thresholder::L0: return cfg.threshold * cfg.threshold / (2.0 * cfg.nu);
    case Thresholder::L1:
    case Thresholder::CAD: return cfg.threshold / cfg.nu;
  }
  return 0.0;
}

inline double sr3_penalty(const Matrix& w, const Sr3Config& cfg) {
  switch (cfg.thresholder) {
    case Thresholder::L0: return static_cast<double>((w.array() != 0.0).count());
    case Thresholder::L1: return w.cwiseAbs().sum();
    case Thresholder::CAD: return w.cwiseAbs().cwiseMin(2.0 * cfg.threshold).sum();
  }
  return 0.0;
}

/// 1/2 ||Xdot - Theta Xi||^2 + lambda R(W) + 1/(2 nu) ||Xi - W||^2.
inline double sr3_objective(const Matrix& theta, const Matrix& xdot, const Matrix& xi, const Matrix& w,
                            const Sr3Config& cfg) {
  return 0.5 * (xdot - theta * xi).squaredNorm() + sr3_lambda(cfg) * sr3_penalty(w, cfg) +
         (xi - w).squaredNorm() / (2.0 * cfg.nu);
}

struct Sr3Report {
  CoefficientMatrix coefficients;
  Matrix relaxed;  // final Xi (dense)
  Matrix sparse;   // final W
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective;  // after each iteration
};

/// Sparse relaxed regularized regression by alternating minimization.
/// W starts from the least-squares solution.
inline Sr3Report sr3_report(const Matrix& theta, const Matrix& xdot, const Sr3Config& cfg = {}) {
  detail::check_regression_shapes(theta, xdot);
  if (!(cfg.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "SR3 threshold must be positive");
  if (!(cfg.nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "SR3 nu must be positive");
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "SR3 tol must be positive");
  if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!theta.allFinite() || !xdot.allFinite()) throw Error(ErrorCode::NonFinite, "regression input is not finite");

  Matrix gram = theta.transpose() * theta;
  gram.diagonal().array() += 1.0 / cfg.nu;
  const Eigen::LLT<Matrix> chol(gram);
  if (chol.info() != Eigen::Success) throw Error(ErrorCode::NonFinite, "SR3 system is not positive definite");
  const Matrix rhs = theta.transpose() * xdot;

  Sr3Report report;
  Matrix w = detail::svd_ridge(theta, xdot, 0.0);
  Matrix xi = w;
  for (int it = 0; it < cfg.max_iter; ++it) {
    xi = chol.solve(rhs + w / cfg.nu);
    Matrix next = prox(xi, cfg.thresholder, cfg.threshold);
    const double change = (next - w).norm() / std::max(1.0, next.norm());
    w = std::move(next);
    ++report.iterations;
    report.objective.push_back(sr3_objective(theta, xdot, xi, w, cfg));
    if (change < cfg.tol) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    warn("SR3 did not converge in " + std::to_string(cfg.max_iter) + " iterations");
  }
  report.relaxed = xi;
  report.sparse = w;
  if (cfg.unbias) {
    report.coefficients = unbias(theta, xdot, w.array() != 0.0);
  } else {
    report.coefficients = CoefficientMatrix(w);
  }
  return report;
}

inline CoefficientMatrix sr3(const FeatureMatrix& theta, const DerivativeMatrix& xdot, const Sr3Config& cfg = {}) {
  return sr3_report(theta.values, xdot.values, cfg).coefficients;
}

inline CoefficientMatrix fit_coefficients(const Optimizer& optimizer, const FeatureMatrix& theta,
                                          const DerivativeMatrix& xdot) {
  return std::visit(
      [&](const auto& opt) -> CoefficientMatrix {
        using T = std::decay_t<decltype(opt)>;
        if constexpr (std::is_same_v<T, StlsqConfig>) {
          return stlsq(theta, xdot, opt);
        } else if constexpr (std::is_same_v<T, Sr3Config>) {
          return sr3(theta, xdot, opt);
        } else {
          if (!opt.fit) throw Error(ErrorCode::Unsupported, "external regressor '" + opt.name + "' is not callable");
          CoefficientMatrix out = opt.fit(theta, xdot);
          if (out.features() != theta.values.cols() || out.targets() != xdot.values.cols()) {
            throw Error(ErrorCode::DimensionMismatch, "external regressor returned the wrong shape");
          }
          return out;
        }
      },
      optimizer);
}

}  // namespace sindy
