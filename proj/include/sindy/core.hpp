#pragma once

// Data model shared by every pipeline stage. Rows index time, columns index
// state variables.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sindy/error.hpp"

namespace sindy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Names = std::vector<std::string>;

inline Names default_variable_names(Eigen::Index n) {
  Names names;
  names.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

/// Time-stamped state measurements. Instances always satisfy: times strictly
/// increasing, rows(states) == size(times), n >= 1, every entry finite.
class Trajectory {
 public:
  Trajectory(Vector times, Matrix states, Names variable_names = {})
      : times_(std::move(times)), states_(std::move(states)), names_(std::move(variable_names)) {
    if (times_.size() != states_.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "times has " + std::to_string(times_.size()) +
                                                " entries but states has " +
                                                std::to_string(states_.rows()) + " rows");
    }
    if (states_.rows() < 1 || states_.cols() < 1) {
      throw Error(ErrorCode::ShapeMismatch, "trajectory needs at least one sample and one variable");
    }
    if (!times_.allFinite() || !states_.allFinite()) {
      throw Error(ErrorCode::NonFinite, "trajectory contains NaN or Inf");
    }
    for (Eigen::Index i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) {
        throw Error(ErrorCode::NonMonotonicTime,
                    "times not strictly increasing at index " + std::to_string(i));
      }
    }
    if (names_.empty()) {
      names_ = default_variable_names(states_.cols());
    } else if (names_.size() != static_cast<std::size_t>(states_.cols())) {
      throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(states_.cols()) +
                                                " variable names, got " +
                                                std::to_string(names_.size()));
    }
  }

  const Vector& times() const noexcept { return times_; }
  const Matrix& states() const noexcept { return states_; }
  const Names& variable_names() const noexcept { return names_; }
  Eigen::Index samples() const noexcept { return states_.rows(); }
  Eigen::Index dimension() const noexcept { return states_.cols(); }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.times_.size() == b.times_.size() && a.states_.rows() == b.states_.rows() &&
           a.states_.cols() == b.states_.cols() && a.times_ == b.times_ && a.states_ == b.states_ &&
           a.names_ == b.names_;
  }

 private:
  Vector times_;
  Matrix states_;
  Names names_;
};

inline Trajectory validate_trajectory(Vector times, Matrix states, Names variable_names = {}) {
  return Trajectory(std::move(times), std::move(states), std::move(variable_names));
}

/// Grid [0, h, 2h, ...] with `samples` points, offset by t0.
inline Vector uniform_times(double h, Eigen::Index samples, double t0 = 0.0) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  Vector t(samples);
  for (Eigen::Index i = 0; i < samples; ++i) t[i] = t0 + static_cast<double>(i) * h;
  return t;
}

/// Half-open grid t0, t0+h, ... < t1, the same sample count numpy.arange gives.
inline Vector arange_times(double t0, double t1, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "t1 must exceed t0");
  const auto count = static_cast<Eigen::Index>(std::ceil((t1 - t0) / h - 1e-9));
  return uniform_times(h, count, t0);
}

inline Trajectory trajectory_from_step(double h, Matrix states, Names variable_names = {}) {
  auto times = uniform_times(h, states.rows());
  return Trajectory(std::move(times), std::move(states), std::move(variable_names));
}

/// Common step of a uniform grid, or nullopt when successive gaps deviate
/// from their mean by 1e-10 relative or more.
inline std::optional<double> uniform_step(const Eigen::Ref<const Vector>& times) {
  if (times.size() < 2) return std::nullopt;
  const Eigen::Index gaps = times.size() - 1;
  const Vector diffs = times.tail(gaps) - times.head(gaps);
  const double mean = diffs.mean();
  if (!(mean > 0.0)) return std::nullopt;
  const double deviation = (diffs.array() - mean).abs().maxCoeff();
  if (deviation < 1e-10 * mean) return mean;
  return std::nullopt;
}

/// Per-sample time derivatives, shaped like the trajectory states.
struct DerivativeMatrix {
  Matrix values;
};

/// Library evaluated on data: column j is feature names[j] evaluated row-wise.
struct FeatureMatrix {
  Matrix values;
  Names names;
};

/// Sparse coefficients Xi (features x states). support(i, j) is true exactly
/// where values(i, j) is nonzero.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;

  explicit CoefficientMatrix(Matrix values) : values_(std::move(values)) {
    support_ = values_.array() != 0.0;
  }

  static CoefficientMatrix zeros(Eigen::Index features, Eigen::Index targets) {
    return CoefficientMatrix(Matrix::Zero(features, targets));
  }

  const Matrix& values() const noexcept { return values_; }
  const BoolMatrix& support() const noexcept { return support_; }
  Eigen::Index features() const noexcept { return values_.rows(); }
  Eigen::Index targets() const noexcept { return values_.cols(); }
  Eigen::Index nonzeros() const { return support_.count(); }

 private:
  Matrix values_;
  BoolMatrix support_;
};

}  // namespace sindy
