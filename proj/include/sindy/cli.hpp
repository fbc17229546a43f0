#pragma once

// Command-line front end. Exit codes: 0 success, 1 pipeline/runtime error,
// 2 usage error.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sindy/dynamics.hpp"
#include "sindy/io.hpp"
#include "sindy/model.hpp"

namespace sindy::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    const auto value = eq == std::string::npos ? std::nullopt : detail::parse_number(kv.substr(eq + 1));
    if (!value) throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    out[kv.substr(0, eq)] = *value;
  }
  return out;
}

struct GenerateArgs {
  std::string system = "lorenz";
  std::vector<double> x0;
  std::vector<std::string> params;
  double t0 = 0.0;
  double t1 = 10.0;
  double dt = 0.002;
  std::string out;
  std::string tidy;
};

struct FitArgs {
  std::string data;
  std::string out;
  double dt = 0.0;
  std::string library = "polynomial";
  int degree = 2;
  bool bias = true;
  bool interaction = true;
  int n_frequencies = 1;
  std::string optimizer = "stlsq";
  double threshold = 0.1;
  double alpha = 0.05;
  int max_iter = -1;
  bool unbias = true;
  double nu = 1.0;
  double tol = 1e-5;
  std::string thresholder = "l0";
  std::string diff = "fd";
  int order = 2;
  int window = 11;
  int smooth_degree = 3;
  std::vector<std::string> names;
  int precision = 3;
};

struct PrintArgs {
  std::string model;
  int precision = 3;
};

struct PredictArgs {
  std::string model;
  std::string data;
  double dt = 0.0;
  std::string out;
  std::string tidy;
};

struct SimulateArgs {
  std::string model;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 15.0;
  double dt = 0.002;
  std::string out;
  std::string reference_system;
  std::vector<std::string> reference_params;
  std::string reference_out;
  std::string tidy;
};

struct NoiseDemoArgs {
  double h = 0.01;
  double t1 = 2.0 * 3.14159265358979323846;
  double sigma = 0.01;
  unsigned seed = 0;
  int window = 11;
  int smooth_degree = 3;
  std::string out;
};

inline ModelConfig build_config(const FitArgs& a) {
  ModelConfig cfg;
  if (a.diff == "fd") {
    cfg.differentiator = FiniteDifference{a.order};
  } else if (a.diff == "smoothed") {
    cfg.differentiator = SmoothedFiniteDifference{a.window, a.smooth_degree, a.order};
  }
  if (a.library == "polynomial") {
    cfg.library = PolynomialLibrary{a.degree, a.bias, a.interaction};
  } else if (a.library == "fourier") {
    cfg.library = FourierLibrary{a.n_frequencies, true, true};
  } else {
    cfg.library = IdentityLibrary{};
  }
  if (a.optimizer == "stlsq") {
    StlsqConfig o;
    o.threshold = a.threshold;
    o.alpha = a.alpha;
    if (a.max_iter > 0) o.max_iter = a.max_iter;
    o.unbias = a.unbias;
    cfg.optimizer = o;
  } else {
    Sr3Config o;
    o.threshold = a.threshold;
    o.nu = a.nu;
    o.tol = a.tol;
    o.thresholder = thresholder_from_string(a.thresholder);
    if (a.max_iter > 0) o.max_iter = a.max_iter;
    o.unbias = a.unbias;
    cfg.optimizer = o;
  }
  cfg.variable_names = a.names;
  return cfg;
}

inline std::optional<double> optional_dt(double dt) {
  if (dt > 0.0) return dt;
  return std::nullopt;
}

inline void print_equations(const FittedModel& model, int precision, std::ostream& out) {
  for (const auto& line : model.equations(precision)) out << line << '\n';
}

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const BenchmarkSystem sys = make_system(a.system, parse_params(a.params));
  const Vector x0 = a.x0.empty() ? sys.default_x0 : to_vector(a.x0);
  const Trajectory traj = generate(sys, x0, arange_times(a.t0, a.t1, a.dt));
  write_csv(a.out, traj);
  if (!a.tidy.empty()) {
    std::vector<Series> series;
    for (Eigen::Index j = 0; j < traj.dimension(); ++j) {
      series.push_back({traj.variable_names()[static_cast<std::size_t>(j)], traj.states().col(j)});
    }
    write_tidy_csv(a.tidy, traj.times(), series);
  }
  out << "wrote " << traj.samples() << " samples of " << sys.name << " to " << a.out << '\n';
  return kExitOk;
}

inline int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Trajectory traj = load_csv(a.data, optional_dt(a.dt));
  const FittedModel model = fit(traj, build_config(a));
  if (!a.out.empty()) save_model(model, a.out);
  print_equations(model, a.precision, out);
  return kExitOk;
}

inline int cmd_print(const PrintArgs& a, std::ostream& out) {
  print_equations(load_model(a.model), a.precision, out);
  return kExitOk;
}

inline int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const FittedModel model = load_model(a.model);
  const Trajectory traj = load_csv(a.data, optional_dt(a.dt));
  const Matrix computed = model.differentiate(traj).values;
  const Matrix predicted = model.predict(traj.states()).values;
  const auto n = static_cast<std::size_t>(model.dimension());
  Names names;
  for (const auto& v : model.variable_names()) names.push_back(v + "'_computed");
  for (const auto& v : model.variable_names()) names.push_back(v + "'_predicted");
  Matrix both(traj.samples(), 2 * model.dimension());
  both << computed, predicted;
  write_csv(a.out, traj.times(), both, names);
  if (!a.tidy.empty()) {
    std::vector<Series> series;
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      series.push_back({model.variable_names()[j] + "' computed", computed.col(c)});
      series.push_back({model.variable_names()[j] + "' predicted", predicted.col(c)});
    }
    write_tidy_csv(a.tidy, traj.times(), series);
  }
  out << "R2 " << FittedModel::r2_score(computed, predicted) << '\n';
  return kExitOk;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const FittedModel model = load_model(a.model);
  const Vector x0 = to_vector(a.x0);
  const Vector times = arange_times(a.t0, a.t1, a.dt);
  const Matrix simulated = model.simulate(x0, times);
  if (!a.out.empty()) write_csv(a.out, times, simulated, model.variable_names());
  std::optional<Trajectory> reference;
  if (!a.reference_system.empty()) {
    reference = generate(make_system(a.reference_system, parse_params(a.reference_params)), x0, times);
    if (!a.reference_out.empty()) write_csv(a.reference_out, times, reference->states(), model.variable_names());
  }
  if (!a.tidy.empty()) {
    std::vector<Series> series;
    for (Eigen::Index j = 0; j < model.dimension(); ++j) {
      const auto& v = model.variable_names()[static_cast<std::size_t>(j)];
      if (reference) series.push_back({v + " true", reference->states().col(j)});
      series.push_back({v + " model", simulated.col(j)});
    }
    write_tidy_csv(a.tidy, times, series);
  }
  if (a.out.empty() && a.tidy.empty()) {
    write_csv(out, times, simulated, model.variable_names());
  } else {
    out << "simulated " << times.size() << " samples\n";
  }
  return kExitOk;
}

/// sin(t) with and without Gaussian noise, and finite-difference
/// derivatives of each against cos(t).
inline int cmd_noise_demo(const NoiseDemoArgs& a, std::ostream& out) {
  const Vector t = arange_times(0.0, a.t1, a.h);
  const Vector clean = t.array().sin().matrix();
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> noise(0.0, a.sigma);
  Vector noisy = clean;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] += noise(rng);
  const Trajectory clean_traj(t, clean);
  const Trajectory noisy_traj(t, noisy);
  const Vector exact = t.array().cos().matrix();
  const Vector fd_clean = finite_difference(clean_traj).values.col(0);
  const Vector fd_noisy = finite_difference(noisy_traj).values.col(0);
  const Vector sfd_noisy = smoothed_finite_difference(noisy_traj, {a.window, a.smooth_degree, 2}).values.col(0);
  write_tidy_csv(a.out, t,
                 {{"x", clean},
                  {"x noisy", noisy},
                  {"x' exact", exact},
                  {"x' fd clean", fd_clean},
                  {"x' fd noisy", fd_noisy},
                  {"x' smoothed fd noisy", sfd_noisy}});
  auto rms = [&](const Vector& d) { return std::sqrt((d - exact).squaredNorm() / static_cast<double>(d.size())); };
  out << "rms fd clean " << rms(fd_clean) << "\nrms fd noisy " << rms(fd_noisy) << "\nrms smoothed fd noisy "
      << rms(sfd_noisy) << '\n';
  return kExitOk;
}

/// Parses and runs one command. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse identification of nonlinear dynamics from time-series data", "sindy"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Integrate a benchmark system and write a CSV");
  generate_cmd->add_option("--system", gen.system, "lorenz | linear2d | decay1d")
      ->check(CLI::IsMember(benchmark_names()));
  generate_cmd->add_option("--x0", gen.x0, "Initial state, comma separated")->delimiter(',');
  generate_cmd->add_option("--param", gen.params, "System parameter override key=value");
  generate_cmd->add_option("--t0", gen.t0);
  generate_cmd->add_option("--t1", gen.t1, "End time (exclusive)");
  generate_cmd->add_option("--dt", gen.dt)->check(CLI::PositiveNumber);
  generate_cmd->add_option("--out", gen.out, "Output CSV")->required();
  generate_cmd->add_option("--tidy", gen.tidy, "Also write long-format plot data");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a sparse model to a trajectory CSV and print its equations");
  fit_cmd->add_option("data", fa.data, "Input CSV")->required();
  fit_cmd->add_option("--out", fa.out, "Write the fitted model JSON here");
  fit_cmd->add_option("--dt", fa.dt, "Uniform time step when the CSV has no t column")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--library", fa.library)->check(CLI::IsMember({"polynomial", "fourier", "identity"}));
  fit_cmd->add_option("--degree", fa.degree)->check(CLI::NonNegativeNumber);
  fit_cmd->add_flag("--bias,!--no-bias", fa.bias, "Include the constant term");
  fit_cmd->add_flag("--interaction,!--no-interaction", fa.interaction, "Include cross terms");
  fit_cmd->add_option("--n-frequencies", fa.n_frequencies)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--optimizer", fa.optimizer)->check(CLI::IsMember({"stlsq", "sr3"}));
  fit_cmd->add_option("--threshold", fa.threshold)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--alpha", fa.alpha, "STLSQ ridge penalty")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--max-iter", fa.max_iter)->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--unbias,!--no-unbias", fa.unbias, "Refit the final support by least squares");
  fit_cmd->add_option("--nu", fa.nu, "SR3 relaxation weight")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--tol", fa.tol, "SR3 convergence tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--thresholder", fa.thresholder)->check(CLI::IsMember({"l0", "l1", "cad", "L0", "L1", "CAD"}));
  fit_cmd->add_option("--diff", fa.diff)->check(CLI::IsMember({"fd", "smoothed"}));
  fit_cmd->add_option("--order", fa.order)->check(CLI::IsMember({1, 2}));
  fit_cmd->add_option("--window", fa.window);
  fit_cmd->add_option("--smooth-degree", fa.smooth_degree);
  fit_cmd->add_option("--names", fa.names, "Variable names, comma separated")->delimiter(',');
  fit_cmd->add_option("--precision", fa.precision)->check(CLI::PositiveNumber);

  PrintArgs pa;
  auto* print_cmd = app.add_subcommand("print", "Print the equations of a saved model");
  print_cmd->add_option("model", pa.model)->required();
  print_cmd->add_option("--precision", pa.precision)->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "Write computed vs predicted derivatives");
  predict_cmd->add_option("model", pr.model)->required();
  predict_cmd->add_option("data", pr.data)->required();
  predict_cmd->add_option("--dt", pr.dt)->check(CLI::PositiveNumber);
  predict_cmd->add_option("--out", pr.out)->required();
  predict_cmd->add_option("--tidy", pr.tidy);

  SimulateArgs sa;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a saved model forward in time");
  simulate_cmd->add_option("model", sa.model)->required();
  simulate_cmd->add_option("--x0", sa.x0)->delimiter(',')->required();
  simulate_cmd->add_option("--t0", sa.t0);
  simulate_cmd->add_option("--t1", sa.t1);
  simulate_cmd->add_option("--dt", sa.dt)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--out", sa.out);
  simulate_cmd->add_option("--reference-system", sa.reference_system, "Also integrate this benchmark system")
      ->check(CLI::IsMember(benchmark_names()));
  simulate_cmd->add_option("--reference-param", sa.reference_params);
  simulate_cmd->add_option("--reference-out", sa.reference_out);
  simulate_cmd->add_option("--tidy", sa.tidy);

  NoiseDemoArgs na;
  auto* noise_cmd = app.add_subcommand("noise-demo", "Finite differences of clean vs noisy sin(t)");
  noise_cmd->add_option("--step", na.h, "grid spacing")->check(CLI::PositiveNumber);
  noise_cmd->add_option("--t1", na.t1);
  noise_cmd->add_option("--sigma", na.sigma)->check(CLI::NonNegativeNumber);
  noise_cmd->add_option("--seed", na.seed);
  noise_cmd->add_option("--window", na.window);
  noise_cmd->add_option("--smooth-degree", na.smooth_degree);
  noise_cmd->add_option("--out", na.out)->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (generate_cmd->parsed()) return cmd_generate(gen, out);
    if (fit_cmd->parsed()) return cmd_fit(fa, out);
    if (print_cmd->parsed()) return cmd_print(pa, out);
    if (predict_cmd->parsed()) return cmd_predict(pr, out);
    if (simulate_cmd->parsed()) return cmd_simulate(sa, out);
    if (noise_cmd->parsed()) return cmd_noise_demo(na, out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sindy::cli
