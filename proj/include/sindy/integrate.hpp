#pragma once

// Adaptive Dormand-Prince 5(4) integrator with a fourth-order continuous
// extension, used both to generate benchmark data and to simulate fitted
// models.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "sindy/core.hpp"

namespace sindy {

struct IntegratorOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  double blowup_norm = 1e10;
  double max_step = std::numeric_limits<double>::infinity();
};

namespace dopri {

inline constexpr std::array<double, 6> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
inline constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
};
inline constexpr std::array<double, 6> kB{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
// Difference between the fifth- and embedded fourth-order weights (7 stages, FSAL).
inline constexpr std::array<double, 7> kE{-71.0 / 57600, 0, 71.0 / 16695, -71.0 / 1920,
                                          17253.0 / 339200, -22.0 / 525, 1.0 / 40};
// Dense output: y(t + s h) = y + h * sum_k K_k * sum_p kP[k][p] s^(p+1).
inline constexpr double kP[7][4] = {
    {1, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0, 0, 0, 0},
    {0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
};

inline double scaled_rms(const Vector& err, const Vector& y0, const Vector& y1, const IntegratorOptions& opt) {
  const Vector scale = (opt.atol + opt.rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
  return std::sqrt((err.array() / scale.array()).square().mean());
}

}  // namespace dopri

/// Integrates the autonomous system dx/dt = rhs(x) from x0 at times[0] and
/// reports the state at every entry of `times`. Row 0 is x0 exactly.
/// Throws IntegrationBlowup carrying the last accepted time when the state
/// norm exceeds the blowup bound, becomes non-finite, or the step underflows.
template <class Rhs>
Matrix integrate(Rhs&& rhs, const Vector& x0, const Vector& times, const IntegratorOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  const Eigen::Index samples = times.size();
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one output time");
  if (!x0.allFinite()) throw Error(ErrorCode::NonFinite, "initial state is not finite");
  for (Eigen::Index i = 1; i < samples; ++i) {
    if (!(times[i] > times[i - 1])) throw Error(ErrorCode::NonMonotonicTime, "output times not strictly increasing");
  }
  Matrix out(samples, n);
  out.row(0) = x0.transpose();
  if (samples == 1) return out;

  auto eval = [&](const Vector& x) -> Vector {
    Vector dx = rhs(x);
    if (dx.size() != n) throw Error(ErrorCode::DimensionMismatch, "right-hand side returned the wrong length");
    return dx;
  };

  double t = times[0];
  const double t_end = times[samples - 1];
  Vector y = x0;
  std::array<Vector, 7> k;
  k[0] = eval(y);

  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const Vector scale = (opt.atol + opt.rtol * y.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
    const double d1 = std::sqrt((k[0].array() / scale.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t);
    const Vector y1 = y + h0 * k[0];
    const Vector f1 = eval(y1);
    const double d2 = std::sqrt(((f1 - k[0]).array() / scale.array()).square().mean()) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, opt.max_step});
  }

  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 10.0;
  Eigen::Index next_out = 1;
  Vector y_new(n);
  Vector err(n);

  while (next_out < samples) {
    const double min_step = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    h = std::min({h, t_end - t, opt.max_step});
    if (h < min_step) {
      std::ostringstream msg;
      msg << "step size underflow at t=" << t;
      throw IntegrationBlowup(t, msg.str());
    }
    for (int s = 1; s < 6; ++s) {
      Vector ys = y;
      for (int r = 0; r < s; ++r) ys += h * dopri::kA[s][r] * k[r];
      k[s] = eval(ys);
    }
    y_new = y;
    for (int s = 0; s < 6; ++s) y_new += h * dopri::kB[s] * k[s];
    k[6] = eval(y_new);
    err.setZero();
    for (int s = 0; s < 7; ++s) err += h * dopri::kE[s] * k[s];

    const double norm = y_new.allFinite() && k[6].allFinite()
                            ? dopri::scaled_rms(err, y, y_new, opt)
                            : std::numeric_limits<double>::infinity();
    if (!(norm <= 1.0)) {
      const double factor = std::isfinite(norm) ? std::max(kMinFactor, kSafety * std::pow(norm, -0.2)) : kMinFactor;
      h *= factor;
      continue;
    }

    if (y_new.norm() > opt.blowup_norm) {
      std::ostringstream msg;
      msg << "state norm exceeded " << opt.blowup_norm << " after t=" << t;
      throw IntegrationBlowup(t, msg.str());
    }

    const double t_new = (t_end - t - h <= min_step) ? t_end : t + h;
    const double h_taken = t_new - t;
    while (next_out < samples && times[next_out] <= t_new) {
      if (times[next_out] == t_new) {
        out.row(next_out) = y_new.transpose();
      } else {
        const double s = (times[next_out] - t) / h_taken;
        Vector yi = y;
        for (int stage = 0; stage < 7; ++stage) {
          const double q = s * (dopri::kP[stage][0] + s * (dopri::kP[stage][1] + s * (dopri::kP[stage][2] + s * dopri::kP[stage][3])));
          if (q != 0.0) yi += h_taken * q * k[stage];
        }
        out.row(next_out) = yi.transpose();
      }
      ++next_out;
    }
    t = t_new;
    y = y_new;
    k[0] = k[6];
    const double factor = norm == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(norm, -0.2), kMinFactor, kMaxFactor);
    h *= factor;
  }
  return out;
}

}  // namespace sindy
