#pragma once

// CSV trajectories and JSON model documents.
//
// Model document (format_version 1):
//   {
//     "format_version": 1,
//     "library": {"kind": "polynomial", "degree": 2, "include_bias": true, "include_interaction": true}
//              | {"kind": "fourier", "n_frequencies": 1, "include_sin": true, "include_cos": true}
//              | {"kind": "identity"},
//     "coefficients": {"rows": l, "cols": n, "values": [row-major l*n]},
//     "feature_names": [...], "variable_names": [...],
//     "optimizer": {"kind": "stlsq", "threshold", "alpha", "max_iter", "unbias"}
//                | {"kind": "sr3", "threshold", "nu", "tol", "thresholder", "max_iter", "unbias"}
//                | {"kind": "external", "name"},
//     "differentiator": {"kind": "finite_difference", "order"}
//                     | {"kind": "smoothed_finite_difference", "order", "window", "smooth_degree"}
//                     | {"kind": "external", "name"}
//   }

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sindy/core.hpp"
#include "sindy/model.hpp"

namespace sindy {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads a headered numeric CSV. A column named "t" holds the times; without
/// one, `dt` builds a uniform grid over all columns, and otherwise the first
/// column is taken as time.
inline Trajectory load_csv(const std::string& path, std::optional<double> dt = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    header = detail::split_csv_line(line, line_no);
    break;
  }
  if (header.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "empty file '" + path + "'");
  const std::size_t header_line = line_no;
  bool numeric_header = true;
  for (auto& h : header) {
    h = detail::trim(h);
    if (!detail::parse_number(h)) numeric_header = false;
  }
  if (numeric_header) throw ParseError(header_line, "missing header row in '" + path + "'");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      const auto v = detail::parse_number(f);
      if (!v) throw ParseError(line_no, "not a number: '" + f + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(line_no, "no data rows in '" + path + "'");

  std::optional<std::size_t> time_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "t") time_col = c;
  }
  if (!time_col && !dt) {
    if (header.size() < 2) throw Error(ErrorCode::MissingTime, "no time column in '" + path + "' and no time step given");
    time_col = 0;
  }
  Names names;
  std::vector<std::size_t> state_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (time_col && c == *time_col) continue;
    state_cols.push_back(c);
    names.push_back(header[c]);
  }
  if (state_cols.empty()) throw Error(ErrorCode::MissingTime, "'" + path + "' has a time column but no states");

  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix states(m, static_cast<Eigen::Index>(state_cols.size()));
  Vector times(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < state_cols.size(); ++c) states(i, static_cast<Eigen::Index>(c)) = row[state_cols[c]];
    times[i] = time_col ? row[*time_col] : static_cast<double>(i) * *dt;
  }
  return Trajectory(std::move(times), std::move(states), std::move(names));
}

/// Writes "t,<names...>" then one row per sample at 17 significant digits.
inline void write_csv(std::ostream& out, const Vector& times, const Matrix& states, const Names& names) {
  if (times.size() != states.rows() || names.size() != static_cast<std::size_t>(states.cols())) {
    throw Error(ErrorCode::ShapeMismatch, "CSV columns do not match data");
  }
  out << 't';
  for (const auto& n : names) out << ',' << detail::csv_escape(n);
  out << '\n';
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    out << detail::format_full(times[i]);
    for (Eigen::Index j = 0; j < states.cols(); ++j) out << ',' << detail::format_full(states(i, j));
    out << '\n';
  }
}

inline void write_csv(const std::string& path, const Vector& times, const Matrix& states, const Names& names) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_csv(out, times, states, names);
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline void write_csv(const std::string& path, const Trajectory& traj) {
  write_csv(path, traj.times(), traj.states(), traj.variable_names());
}

/// One named series for tidy output.
struct Series {
  std::string name;
  Vector values;
};

/// Long-format plot data: columns t, series, value.
inline void write_tidy_csv(const std::string& path, const Vector& times, const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "t,series,value\n";
  for (const auto& s : series) {
    if (s.values.size() != times.size()) throw Error(ErrorCode::ShapeMismatch, "series '" + s.name + "' has the wrong length");
    const std::string name = detail::csv_escape(s.name);
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      out << detail::format_full(times[i]) << ',' << name << ',' << detail::format_full(s.values[i]) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

// --- model documents ------------------------------------------------------

using Json = nlohmann::json;

inline Json library_to_json(const LibrarySpec& spec) {
  return std::visit(
      [](const auto& lib) -> Json {
        using T = std::decay_t<decltype(lib)>;
        if constexpr (std::is_same_v<T, PolynomialLibrary>) {
          return {{"kind", "polynomial"},
                  {"degree", lib.degree},
                  {"include_bias", lib.include_bias},
                  {"include_interaction", lib.include_interaction}};
        } else if constexpr (std::is_same_v<T, FourierLibrary>) {
          return {{"kind", "fourier"},
                  {"n_frequencies", lib.n_frequencies},
                  {"include_sin", lib.include_sin},
                  {"include_cos", lib.include_cos}};
        } else if constexpr (std::is_same_v<T, CustomLibrary>) {
          throw Error(ErrorCode::UnserializableLibrary, "custom libraries hold callables and cannot be saved");
        } else {
          return {{"kind", "identity"}};
        }
      },
      spec);
}

inline LibrarySpec library_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "polynomial") {
    return PolynomialLibrary{j.at("degree").get<int>(), j.at("include_bias").get<bool>(),
                             j.at("include_interaction").get<bool>()};
  }
  if (kind == "fourier") {
    return FourierLibrary{j.at("n_frequencies").get<int>(), j.at("include_sin").get<bool>(),
                          j.at("include_cos").get<bool>()};
  }
  if (kind == "identity") return IdentityLibrary{};
  throw Error(ErrorCode::InvalidArgument, "unknown library kind '" + kind + "'");
}

inline Json optimizer_to_json(const Optimizer& opt) {
  return std::visit(
      [](const auto& o) -> Json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, StlsqConfig>) {
          return {{"kind", "stlsq"}, {"threshold", o.threshold}, {"alpha", o.alpha},
                  {"max_iter", o.max_iter}, {"unbias", o.unbias}};
        } else if constexpr (std::is_same_v<T, Sr3Config>) {
          return {{"kind", "sr3"},         {"threshold", o.threshold},
                  {"nu", o.nu},            {"tol", o.tol},
                  {"thresholder", to_string(o.thresholder)},
                  {"max_iter", o.max_iter}, {"unbias", o.unbias}};
        } else {
          return {{"kind", "external"}, {"name", o.name}};
        }
      },
      opt);
}

inline Optimizer optimizer_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "stlsq") {
    return StlsqConfig{j.at("threshold").get<double>(), j.at("alpha").get<double>(), j.at("max_iter").get<int>(),
                       j.at("unbias").get<bool>()};
  }
  if (kind == "sr3") {
    return Sr3Config{j.at("threshold").get<double>(), j.at("nu").get<double>(), j.at("tol").get<double>(),
                     thresholder_from_string(j.at("thresholder").get<std::string>()), j.at("max_iter").get<int>(),
                     j.at("unbias").get<bool>()};
  }
  if (kind == "external") return ExternalRegressor{nullptr, j.value("name", std::string("external"))};
  throw Error(ErrorCode::InvalidArgument, "unknown optimizer kind '" + kind + "'");
}

inline Json differentiator_to_json(const Differentiator& d) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiniteDifference>) {
          return {{"kind", "finite_difference"}, {"order", m.order}};
        } else if constexpr (std::is_same_v<T, SmoothedFiniteDifference>) {
          return {{"kind", "smoothed_finite_difference"}, {"order", m.order},
                  {"window", m.window}, {"smooth_degree", m.smooth_degree}};
        } else {
          return {{"kind", "external"}, {"name", m.name}};
        }
      },
      d);
}

inline Differentiator differentiator_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite_difference") return FiniteDifference{j.at("order").get<int>()};
  if (kind == "smoothed_finite_difference") {
    return SmoothedFiniteDifference{j.at("window").get<int>(), j.at("smooth_degree").get<int>(), j.at("order").get<int>()};
  }
  if (kind == "external") return ExternalDifferentiator{nullptr, j.value("name", std::string("external"))};
  throw Error(ErrorCode::InvalidArgument, "unknown differentiator kind '" + kind + "'");
}

inline Json model_to_json(const FittedModel& model) {
  const Matrix& xi = model.coefficients().values();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(xi.size()));
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    for (Eigen::Index j = 0; j < xi.cols(); ++j) values.push_back(xi(i, j));
  }
  return {{"format_version", kModelFormatVersion},
          {"library", library_to_json(model.library())},
          {"coefficients", {{"rows", xi.rows()}, {"cols", xi.cols()}, {"values", values}}},
          {"feature_names", model.feature_names()},
          {"variable_names", model.variable_names()},
          {"optimizer", optimizer_to_json(model.optimizer())},
          {"differentiator", differentiator_to_json(model.differentiator())}};
}

inline FittedModel model_from_json(const Json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model format_version " + std::to_string(version) +
                                                  " is not supported (expected " +
                                                  std::to_string(kModelFormatVersion) + ")");
    }
    LibrarySpec library = library_from_json(doc.at("library"));
    const auto& c = doc.at("coefficients");
    const auto rows = c.at("rows").get<Eigen::Index>();
    const auto cols = c.at("cols").get<Eigen::Index>();
    const auto values = c.at("values").get<std::vector<double>>();
    if (rows < 1 || cols < 1 || values.size() != static_cast<std::size_t>(rows * cols)) {
      throw Error(ErrorCode::ShapeMismatch, "coefficient array does not match rows x cols");
    }
    Matrix xi(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) xi(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    }
    Names feature = doc.at("feature_names").get<Names>();
    Names variables = doc.at("variable_names").get<Names>();
    if (!std::holds_alternative<IdentityLibrary>(library) && feature_names(library, variables) != feature) {
      throw Error(ErrorCode::InvalidArgument, "feature names do not match the library and variable names");
    }
    return FittedModel(std::move(library), CoefficientMatrix(std::move(xi)), std::move(feature), std::move(variables),
                       differentiator_from_json(doc.at("differentiator")), optimizer_from_json(doc.at("optimizer")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
  }
}

inline void save_model(const FittedModel& model, const std::string& path) {
  const Json doc = model_to_json(model);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace sindy
