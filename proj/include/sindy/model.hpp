#pragma once

// End-to-end estimator: differentiate -> build library -> sparse regression.

#include <Eigen/Dense>

#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sindy/core.hpp"
#include "sindy/differentiation.hpp"
#include "sindy/features.hpp"
#include "sindy/integrate.hpp"
#include "sindy/optimize.hpp"

namespace sindy {

struct ModelConfig {
  Differentiator differentiator = FiniteDifference{};
  LibrarySpec library = PolynomialLibrary{};
  Optimizer optimizer = StlsqConfig{};
  // Overrides the trajectory's variable names when non-empty.
  Names variable_names;
};

/// A learned dynamical system x' = Theta(x) Xi. Immutable once built.
class FittedModel {
 public:
  FittedModel(LibrarySpec library, CoefficientMatrix coefficients, Names feature_names, Names variable_names,
              Differentiator differentiator = FiniteDifference{}, Optimizer optimizer = StlsqConfig{})
      : library_(std::move(library)),
        coefficients_(std::move(coefficients)),
        feature_names_(std::move(feature_names)),
        variable_names_(std::move(variable_names)),
        differentiator_(std::move(differentiator)),
        optimizer_(std::move(optimizer)) {
    if (feature_names_.size() != static_cast<std::size_t>(coefficients_.features())) {
      throw Error(ErrorCode::DimensionMismatch, "feature name count does not match coefficient rows");
    }
    if (variable_names_.size() != static_cast<std::size_t>(coefficients_.targets())) {
      throw Error(ErrorCode::DimensionMismatch, "variable name count does not match coefficient columns");
    }
  }

  const LibrarySpec& library() const noexcept { return library_; }
  const CoefficientMatrix& coefficients() const noexcept { return coefficients_; }
  const Names& feature_names() const noexcept { return feature_names_; }
  const Names& variable_names() const noexcept { return variable_names_; }
  const Differentiator& differentiator() const noexcept { return differentiator_; }
  const Optimizer& optimizer() const noexcept { return optimizer_; }
  Eigen::Index dimension() const noexcept { return coefficients_.targets(); }

  FeatureMatrix features(const Eigen::Ref<const Matrix>& states) const {
    check_input_columns(states.cols());
    FeatureMatrix theta = transform(library_, states, variable_names_);
    if (theta.values.cols() != coefficients_.features()) {
      throw Error(ErrorCode::DimensionMismatch, "library produced " + std::to_string(theta.values.cols()) +
                                                    " features, model has " +
                                                    std::to_string(coefficients_.features()));
    }
    return theta;
  }

  /// Theta(states) * Xi, one row per sample.
  DerivativeMatrix predict(const Eigen::Ref<const Matrix>& states) const {
    return {features(states).values * coefficients_.values()};
  }

  /// The learned right-hand side at a single state.
  Vector rhs(const Eigen::Ref<const Vector>& x) const {
    const Matrix row = x.transpose();
    return predict(row).values.row(0).transpose();
  }

  DerivativeMatrix differentiate(const Trajectory& traj) const { return sindy::differentiate(differentiator_, traj); }

  /// States at each of `times`, integrating the learned system from x0.
  Matrix simulate(const Vector& x0, const Vector& times, const IntegratorOptions& options = {}) const {
    if (x0.size() != dimension()) throw Error(ErrorCode::DimensionMismatch, "initial state has the wrong length");
    return integrate([this](const Vector& x) { return rhs(x); }, x0, times, options);
  }

  /// One line per state: "<name>' = c1 f1 + c2 f2 ...", zero terms omitted.
  std::vector<std::string> equations(int precision = 3) const {
    if (precision < 1) throw Error(ErrorCode::InvalidArgument, "precision must be >= 1");
    std::vector<std::string> lines;
    const Matrix& xi = coefficients_.values();
    for (Eigen::Index j = 0; j < xi.cols(); ++j) {
      std::string line = variable_names_[static_cast<std::size_t>(j)] + "' = ";
      bool first = true;
      for (Eigen::Index i = 0; i < xi.rows(); ++i) {
        if (xi(i, j) == 0.0) continue;
        if (!first) line += " + ";
        line += format_fixed(xi(i, j), precision) + " " + feature_names_[static_cast<std::size_t>(i)];
        first = false;
      }
      if (first) line += format_fixed(0.0, precision);
      lines.push_back(std::move(line));
    }
    return lines;
  }

  /// Pooled coefficient of determination between predicted and reference
  /// derivatives: 1 - SS_res / SS_tot, SS_tot about each column's mean.
  double score(const Trajectory& traj, const std::optional<DerivativeMatrix>& xdot_override = std::nullopt) const {
    const DerivativeMatrix reference = xdot_override ? *xdot_override : differentiate(traj);
    if (reference.values.rows() != traj.samples() || reference.values.cols() != traj.dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "reference derivatives do not match the trajectory shape");
    }
    const Matrix predicted = predict(traj.states()).values;
    return r2_score(reference.values, predicted);
  }

  static double r2_score(const Matrix& reference, const Matrix& predicted) {
    const double ss_res = (reference - predicted).squaredNorm();
    const Matrix centered = reference.rowwise() - reference.colwise().mean();
    const double ss_tot = centered.squaredNorm();
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
  }

 private:
  static std::string format_fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
  }

  void check_input_columns(Eigen::Index cols) const {
    if (cols != dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(dimension()) +
                                                    " state columns, got " + std::to_string(cols));
    }
  }

  LibrarySpec library_;
  CoefficientMatrix coefficients_;
  Names feature_names_;
  Names variable_names_;
  Differentiator differentiator_;
  Optimizer optimizer_;
};

/// Fits a model to one trajectory. When `xdot_override` is given it replaces
/// the configured differentiator's output.
inline FittedModel fit(const Trajectory& traj, const ModelConfig& cfg = {},
                       const std::optional<DerivativeMatrix>& xdot_override = std::nullopt) {
  Names names = cfg.variable_names.empty() ? traj.variable_names() : cfg.variable_names;
  if (names.size() != static_cast<std::size_t>(traj.dimension())) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(traj.dimension()) +
                                                  " variable names, got " + std::to_string(names.size()));
  }
  DerivativeMatrix xdot;
  if (xdot_override) {
    if (xdot_override->values.rows() != traj.samples() || xdot_override->values.cols() != traj.dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "supplied derivatives do not match the trajectory shape");
    }
    if (!xdot_override->values.allFinite()) throw Error(ErrorCode::NonFinite, "supplied derivatives are not finite");
    xdot = *xdot_override;
  } else {
    xdot = differentiate(cfg.differentiator, traj);
  }
  FeatureMatrix theta = transform(cfg.library, traj.states(), names);
  CoefficientMatrix xi = fit_coefficients(cfg.optimizer, theta, xdot);
  return FittedModel(cfg.library, std::move(xi), std::move(theta.names), std::move(names), cfg.differentiator,
                     cfg.optimizer);
}

}  // namespace sindy
