#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <string>
#include <variant>

#include "sindy/core.hpp"

namespace sindy {

namespace detail {

// Weights w such that sum_k w[k] f(nodes[k]) is the derivative at `at` of the
// interpolating polynomial through the three nodes.
inline std::array<double, 3> three_point_weights(const std::array<double, 3>& nodes, double at) {
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    const double denom = (nodes[k] - nodes[a]) * (nodes[k] - nodes[b]);
    w[k] = ((at - nodes[a]) + (at - nodes[b])) / denom;
  }
  return w;
}

}  // namespace detail

/// Finite-difference derivative of every state column.
///
/// order == 2: centered three-point stencil at interior samples and
/// one-sided three-point stencils at both ends (second order everywhere).
/// order == 1: forward difference, backward at the final sample.
/// Stencil weights come from the local time gaps, so nonuniform grids are
/// handled exactly.
inline DerivativeMatrix finite_difference(const Eigen::Ref<const Matrix>& states,
                                          const Eigen::Ref<const Vector>& times, int order = 2) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::InvalidArgument, "finite difference order must be 1 or 2");
  }
  const Eigen::Index m = states.rows();
  if (times.size() != m) throw Error(ErrorCode::ShapeMismatch, "times and states disagree in length");
  if (m < order + 1) {
    throw Error(ErrorCode::TooFewSamples, "order-" + std::to_string(order) +
                                              " finite difference needs at least " +
                                              std::to_string(order + 1) + " samples, got " +
                                              std::to_string(m));
  }
  Matrix out(m, states.cols());
  if (order == 1) {
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      out.row(i) = (states.row(i + 1) - states.row(i)) / (times[i + 1] - times[i]);
    }
    out.row(m - 1) = (states.row(m - 1) - states.row(m - 2)) / (times[m - 1] - times[m - 2]);
    return {std::move(out)};
  }

  auto apply = [&](Eigen::Index row, Eigen::Index first) {
    const std::array<double, 3> nodes{times[first], times[first + 1], times[first + 2]};
    const auto w = detail::three_point_weights(nodes, times[row]);
    out.row(row) = w[0] * states.row(first) + w[1] * states.row(first + 1) + w[2] * states.row(first + 2);
  };
  apply(0, 0);
  for (Eigen::Index i = 1; i + 1 < m; ++i) apply(i, i - 1);
  apply(m - 1, m - 3);
  return {std::move(out)};
}

inline DerivativeMatrix finite_difference(const Trajectory& traj, int order = 2) {
  return finite_difference(traj.states(), traj.times(), order);
}

/// Savitzky-Golay smoothing: every column is replaced by a local
/// least-squares polynomial of `degree` over a centered window of `window`
/// samples. The first and last window/2 samples are evaluated on the fit of
/// the nearest full window. Samples are treated as equally spaced.
inline Matrix smooth(const Eigen::Ref<const Matrix>& states, int window = 11, int degree = 3) {
  if (window < 3 || window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "window must be odd and >= 3");
  if (degree < 1 || degree >= window) throw Error(ErrorCode::InvalidArgument, "smoothing degree must satisfy 1 <= degree < window");
  const Eigen::Index m = states.rows();
  if (window > m) {
    throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds " +
                                               std::to_string(m) + " samples");
  }
  const int half = window / 2;

  // Hat matrix of the local fit: row p evaluates the fitted polynomial at
  // window position p. Offsets are scaled to [-1, 1] for conditioning.
  Matrix vander(window, degree + 1);
  for (int p = 0; p < window; ++p) {
    const double u = static_cast<double>(p - half) / half;
    double power = 1.0;
    for (int d = 0; d <= degree; ++d) {
      vander(p, d) = power;
      power *= u;
    }
  }
  const Eigen::HouseholderQR<Matrix> qr(vander);
  const Matrix q = qr.householderQ() * Matrix::Identity(window, degree + 1);
  const Matrix hat = q * q.transpose();

  Matrix out(m, states.cols());
  for (Eigen::Index i = half; i + half < m; ++i) {
    out.row(i) = hat.row(half) * states.middleRows(i - half, window);
  }
  for (int p = 0; p < half; ++p) {
    out.row(p) = hat.row(p) * states.topRows(window);
    out.row(m - half + p) = hat.row(half + 1 + p) * states.bottomRows(window);
  }
  return out;
}

struct FiniteDifference {
  int order = 2;
};

struct SmoothedFiniteDifference {
  int window = 11;
  int smooth_degree = 3;
  int order = 2;
};

inline DerivativeMatrix smoothed_finite_difference(const Trajectory& traj,
                                                   const SmoothedFiniteDifference& spec = {}) {
  const Matrix smoothed = smooth(traj.states(), spec.window, spec.smooth_degree);
  return finite_difference(smoothed, traj.times(), spec.order);
}

/// User-supplied differentiation: (states, times) -> derivative matrix.
struct ExternalDifferentiator {
  std::function<DerivativeMatrix(const Matrix&, const Vector&)> fn;
  std::string name = "external";
};

using Differentiator = std::variant<FiniteDifference, SmoothedFiniteDifference, ExternalDifferentiator>;

inline DerivativeMatrix differentiate(const Differentiator& method, const Trajectory& traj) {
  DerivativeMatrix out = std::visit(
      [&](const auto& d) -> DerivativeMatrix {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FiniteDifference>) {
          return finite_difference(traj, d.order);
        } else if constexpr (std::is_same_v<T, SmoothedFiniteDifference>) {
          return smoothed_finite_difference(traj, d);
        } else {
          if (!d.fn) throw Error(ErrorCode::Unsupported, "external differentiator '" + d.name + "' is not callable");
          return d.fn(traj.states(), traj.times());
        }
      },
      method);
  if (out.values.rows() != traj.samples() || out.values.cols() != traj.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "differentiator returned a matrix of the wrong shape");
  }
  if (!out.values.allFinite()) throw Error(ErrorCode::NonFinite, "differentiator produced NaN or Inf");
  return out;
}

}  // namespace sindy
