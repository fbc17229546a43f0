#pragma once

// Candidate function libraries. Column order is part of the model file
// contract: polynomial terms are graded lexicographic (bias first), Fourier
// terms loop frequency-major with sin before cos for each variable.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "sindy/core.hpp"

namespace sindy {

struct PolynomialLibrary {
  int degree = 2;
  bool include_bias = true;
  bool include_interaction = true;
};

struct FourierLibrary {
  int n_frequencies = 1;
  bool include_sin = true;
  bool include_cos = true;
};

struct CustomFunction {
  int arity = 1;
  std::function<double(std::span<const double>)> fn;
  std::function<std::string(std::span<const std::string>)> name;
};

struct CustomLibrary {
  std::vector<CustomFunction> functions;
};

struct IdentityLibrary {};

using LibrarySpec = std::variant<PolynomialLibrary, FourierLibrary, CustomLibrary, IdentityLibrary>;

namespace detail {

// Ascending index multisets of size k over n variables, lexicographic.
inline void multisets(int n, int k, int start, std::vector<int>& current,
                      std::vector<std::vector<int>>& out, bool allow_repeat) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int j = start; j < n; ++j) {
    current.push_back(j);
    multisets(n, k, allow_repeat ? j : j + 1, current, out, allow_repeat);
    current.pop_back();
  }
}

// Terms of the polynomial library as variable-index multisets; the empty
// multiset is the bias.
inline std::vector<std::vector<int>> polynomial_terms(const PolynomialLibrary& spec, int n) {
  if (spec.degree < 0) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 0");
  std::vector<std::vector<int>> terms;
  if (spec.include_bias) terms.emplace_back();
  for (int d = 1; d <= spec.degree; ++d) {
    if (spec.include_interaction) {
      std::vector<int> current;
      multisets(n, d, 0, current, terms, true);
    } else {
      for (int j = 0; j < n; ++j) terms.emplace_back(static_cast<std::size_t>(d), j);
    }
  }
  return terms;
}

inline std::string monomial_name(const std::vector<int>& term, const Names& vars) {
  if (term.empty()) return "1";
  std::string name;
  std::size_t i = 0;
  while (i < term.size()) {
    std::size_t run = i;
    while (run < term.size() && term[run] == term[i]) ++run;
    if (!name.empty()) name += ' ';
    name += vars[static_cast<std::size_t>(term[i])];
    if (run - i > 1) name += '^' + std::to_string(run - i);
    i = run;
  }
  return name;
}

inline std::vector<std::vector<int>> index_combinations(int n, int arity) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  multisets(n, arity, 0, current, out, false);
  return out;
}

inline void check_unique(const Names& names) {
  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::DuplicateFeatureName, "duplicate feature name '" + name + "'");
    }
  }
}

inline void check_custom(const CustomLibrary& spec, int n) {
  if (spec.functions.empty()) throw Error(ErrorCode::InvalidArgument, "custom library has no functions");
  for (const auto& f : spec.functions) {
    if (f.arity < 1) throw Error(ErrorCode::InvalidArgument, "custom function arity must be >= 1");
    if (f.arity > n) {
      throw Error(ErrorCode::ArityExceedsDimension,
                  "custom function of arity " + std::to_string(f.arity) + " on " +
                      std::to_string(n) + " variables");
    }
    if (!f.fn || !f.name) throw Error(ErrorCode::InvalidArgument, "custom function needs a callable and a name formatter");
  }
}

inline Names resolve_names(const Names& given, Eigen::Index n) {
  if (given.empty()) return default_variable_names(n);
  if (given.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n) + " variable names, got " +
                                                  std::to_string(given.size()));
  }
  return given;
}

}  // namespace detail

inline FeatureMatrix polynomial_transform(const Eigen::Ref<const Matrix>& states,
                                          const PolynomialLibrary& spec, const Names& variable_names = {}) {
  const int n = static_cast<int>(states.cols());
  const Names vars = detail::resolve_names(variable_names, n);
  const auto terms = detail::polynomial_terms(spec, n);
  if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial library is empty");
  FeatureMatrix out{Matrix(states.rows(), static_cast<Eigen::Index>(terms.size())), {}};
  out.names.reserve(terms.size());
  for (std::size_t c = 0; c < terms.size(); ++c) {
    auto col = out.values.col(static_cast<Eigen::Index>(c));
    col.setOnes();
    for (int j : terms[c]) col.array() *= states.col(j).array();
    out.names.push_back(detail::monomial_name(terms[c], vars));
  }
  return out;
}

inline FeatureMatrix fourier_transform(const Eigen::Ref<const Matrix>& states, const FourierLibrary& spec,
                                       const Names& variable_names = {}) {
  if (spec.n_frequencies < 1) throw Error(ErrorCode::InvalidArgument, "n_frequencies must be >= 1");
  if (!spec.include_sin && !spec.include_cos) {
    throw Error(ErrorCode::InvalidArgument, "fourier library needs sin or cos terms");
  }
  const Eigen::Index n = states.cols();
  const Names vars = detail::resolve_names(variable_names, n);
  const Eigen::Index per = (spec.include_sin ? 1 : 0) + (spec.include_cos ? 1 : 0);
  FeatureMatrix out{Matrix(states.rows(), per * spec.n_frequencies * n), {}};
  Eigen::Index c = 0;
  for (int k = 1; k <= spec.n_frequencies; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string arg = std::to_string(k) + " " + vars[static_cast<std::size_t>(j)];
      if (spec.include_sin) {
        out.values.col(c++) = (static_cast<double>(k) * states.col(j).array()).sin().matrix();
        out.names.push_back("sin(" + arg + ")");
      }
      if (spec.include_cos) {
        out.values.col(c++) = (static_cast<double>(k) * states.col(j).array()).cos().matrix();
        out.names.push_back("cos(" + arg + ")");
      }
    }
  }
  return out;
}

inline FeatureMatrix custom_transform(const Eigen::Ref<const Matrix>& states, const CustomLibrary& spec,
                                      const Names& variable_names = {}) {
  const int n = static_cast<int>(states.cols());
  detail::check_custom(spec, n);
  const Names vars = detail::resolve_names(variable_names, n);
  std::vector<Vector> columns;
  FeatureMatrix out;
  std::vector<double> args;
  std::vector<std::string> arg_names;
  for (const auto& f : spec.functions) {
    for (const auto& combo : detail::index_combinations(n, f.arity)) {
      arg_names.clear();
      for (int j : combo) arg_names.push_back(vars[static_cast<std::size_t>(j)]);
      const std::string name = f.name(arg_names);
      Vector col(states.rows());
      args.resize(combo.size());
      for (Eigen::Index i = 0; i < states.rows(); ++i) {
        for (std::size_t a = 0; a < combo.size(); ++a) args[a] = states(i, combo[a]);
        col[i] = f.fn(args);
        if (!std::isfinite(col[i])) {
          throw Error(ErrorCode::NonFiniteFeature,
                      "feature '" + name + "' is not finite at row " + std::to_string(i));
        }
      }
      columns.push_back(std::move(col));
      out.names.push_back(name);
    }
  }
  detail::check_unique(out.names);
  out.values.resize(states.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) out.values.col(static_cast<Eigen::Index>(c)) = columns[c];
  return out;
}

inline FeatureMatrix identity_transform(const Eigen::Ref<const Matrix>& states, const Names& variable_names = {}) {
  return {Matrix(states), detail::resolve_names(variable_names, states.cols())};
}

/// Names of the library columns, in transform column order.
inline Names feature_names(const LibrarySpec& spec, const Names& variable_names) {
  const int n = static_cast<int>(variable_names.size());
  return std::visit(
      [&](const auto& lib) -> Names {
        using T = std::decay_t<decltype(lib)>;
        Names names;
        if constexpr (std::is_same_v<T, PolynomialLibrary>) {
          for (const auto& term : detail::polynomial_terms(lib, n)) {
            names.push_back(detail::monomial_name(term, variable_names));
          }
        } else if constexpr (std::is_same_v<T, FourierLibrary>) {
          for (int k = 1; k <= lib.n_frequencies; ++k) {
            for (const auto& v : variable_names) {
              const std::string arg = std::to_string(k) + " " + v;
              if (lib.include_sin) names.push_back("sin(" + arg + ")");
              if (lib.include_cos) names.push_back("cos(" + arg + ")");
            }
          }
        } else if constexpr (std::is_same_v<T, CustomLibrary>) {
          detail::check_custom(lib, n);
          std::vector<std::string> args;
          for (const auto& f : lib.functions) {
            for (const auto& combo : detail::index_combinations(n, f.arity)) {
              args.clear();
              for (int j : combo) args.push_back(variable_names[static_cast<std::size_t>(j)]);
              names.push_back(f.name(args));
            }
          }
        } else {
          names = variable_names;
        }
        return names;
      },
      spec);
}

inline FeatureMatrix transform(const LibrarySpec& spec, const Eigen::Ref<const Matrix>& states,
                               const Names& variable_names = {}) {
  return std::visit(
      [&](const auto& lib) -> FeatureMatrix {
        using T = std::decay_t<decltype(lib)>;
        if constexpr (std::is_same_v<T, PolynomialLibrary>) {
          return polynomial_transform(states, lib, variable_names);
        } else if constexpr (std::is_same_v<T, FourierLibrary>) {
          return fourier_transform(states, lib, variable_names);
        } else if constexpr (std::is_same_v<T, CustomLibrary>) {
          return custom_transform(states, lib, variable_names);
        } else {
          return identity_transform(states, variable_names);
        }
      },
      spec);
}

/// Library row for a single state vector.
inline Vector transform_row(const LibrarySpec& spec, const Eigen::Ref<const Vector>& x,
                            const Names& variable_names = {}) {
  const Matrix row = x.transpose();
  return transform(spec, row, variable_names).values.row(0).transpose();
}

}  // namespace sindy
