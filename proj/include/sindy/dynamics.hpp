#pragma once

// Benchmark systems for generating training and test data.

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sindy/core.hpp"
#include "sindy/integrate.hpp"

namespace sindy {

inline Vector lorenz_rhs(const Vector& x, double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0) {
  Vector dx(3);
  dx[0] = sigma * (x[1] - x[0]);
  dx[1] = x[0] * (rho - x[2]) - x[1];
  dx[2] = x[0] * x[1] - beta * x[2];
  return dx;
}

struct BenchmarkSystem {
  std::string name;
  std::map<std::string, double> parameters;
  Vector default_x0;
  Names variable_names;
  std::function<Vector(const Vector&)> rhs;

  Eigen::Index dimension() const { return default_x0.size(); }
};

inline BenchmarkSystem lorenz_system(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0) {
  BenchmarkSystem sys;
  sys.name = "lorenz";
  sys.parameters = {{"sigma", sigma}, {"rho", rho}, {"beta", beta}};
  sys.default_x0 = (Vector(3) << -8.0, 8.0, 27.0).finished();
  sys.variable_names = {"x0", "x1", "x2"};
  sys.rhs = [sigma, rho, beta](const Vector& x) { return lorenz_rhs(x, sigma, rho, beta); };
  return sys;
}

// Damped linear oscillator: x' = -0.1 x + 2 y, y' = -2 x - 0.1 y.
inline BenchmarkSystem linear2d_system(double damping = 0.1, double frequency = 2.0) {
  BenchmarkSystem sys;
  sys.name = "linear2d";
  sys.parameters = {{"damping", damping}, {"frequency", frequency}};
  sys.default_x0 = (Vector(2) << 2.0, 0.0).finished();
  sys.variable_names = {"x0", "x1"};
  sys.rhs = [damping, frequency](const Vector& x) {
    Vector dx(2);
    dx[0] = -damping * x[0] + frequency * x[1];
    dx[1] = -frequency * x[0] - damping * x[1];
    return dx;
  };
  return sys;
}

// x' = -rate x.
inline BenchmarkSystem decay1d_system(double rate = 1.0) {
  BenchmarkSystem sys;
  sys.name = "decay1d";
  sys.parameters = {{"rate", rate}};
  sys.default_x0 = (Vector(1) << 1.0).finished();
  sys.variable_names = {"x0"};
  sys.rhs = [rate](const Vector& x) -> Vector { return -rate * x; };
  return sys;
}

inline std::vector<std::string> benchmark_names() { return {"lorenz", "linear2d", "decay1d"}; }

/// Looks up a system by name; `overrides` replaces named parameters.
inline BenchmarkSystem make_system(const std::string& name, const std::map<std::string, double>& overrides = {}) {
  auto param = [&](const std::string& key, double fallback) {
    const auto it = overrides.find(key);
    return it == overrides.end() ? fallback : it->second;
  };
  BenchmarkSystem sys;
  if (name == "lorenz") {
    sys = lorenz_system(param("sigma", 10.0), param("rho", 28.0), param("beta", 8.0 / 3.0));
  } else if (name == "linear2d") {
    sys = linear2d_system(param("damping", 0.1), param("frequency", 2.0));
  } else if (name == "decay1d") {
    sys = decay1d_system(param("rate", 1.0));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown system '" + name + "'");
  }
  for (const auto& [key, value] : overrides) {
    if (!sys.parameters.contains(key)) {
      throw Error(ErrorCode::InvalidArgument, "system '" + name + "' has no parameter '" + key + "'");
    }
  }
  return sys;
}

inline Trajectory generate(const BenchmarkSystem& system, const Vector& x0, const Vector& times,
                           const IntegratorOptions& options = {}) {
  if (x0.size() != system.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, system.name + " expects a " + std::to_string(system.dimension()) +
                                                  "-dimensional initial state");
  }
  Matrix states = integrate(system.rhs, x0, times, options);
  return Trajectory(times, std::move(states), system.variable_names);
}

}  // namespace sindy
