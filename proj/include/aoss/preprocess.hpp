#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "aoss/csv.hpp"
#include "aoss/error.hpp"
#include "aoss/types.hpp"

namespace aoss {

/// A raw dataset: n-by-p covariates, an optional response and column labels.
struct DataMatrix {
  Matrix X;
  std::optional<Vector> y;
  std::vector<std::string> column_names;
  std::string response_name = "y";

  Index rows() const { return X.rows(); }
  Index cols() const { return X.cols(); }
};

/// Per-column min/max of the [-1,1] transform. Constant columns are mapped
/// to all-zeros and flagged; model selection must not offer them.
struct ScaleMap {
  struct Column {
    double min = 0.0;
    double max = 0.0;
    bool constant = false;
  };
  std::vector<Column> columns;
};

/// Column means subtracted by centralization, for the adjusted intercept.
struct CenterMap {
  Vector x_means;
  std::optional<double> y_mean;
};

/// Scales every covariate column affinely onto [-1,1] (min -> -1, max -> +1).
/// The response is never scaled. Row order is preserved.
inline std::pair<DataMatrix, ScaleMap> scale_to_unit_interval(const DataMatrix& d) {
  if (d.rows() < 2)
    throw ValidationError("scale_to_unit_interval: need at least 2 rows");
  DataMatrix out = d;
  ScaleMap map;
  map.columns.resize(d.cols());
  for (Index j = 0; j < d.cols(); ++j) {
    const double mn = d.X.col(j).minCoeff();
    const double mx = d.X.col(j).maxCoeff();
    map.columns[j] = {mn, mx, mx <= mn};
    if (mx > mn) {
      out.X.col(j) = (2.0 * (d.X.col(j).array() - mn) / (mx - mn) - 1.0).matrix();
    } else {
      out.X.col(j).setZero();
    }
  }
  return {std::move(out), std::move(map)};
}

/// Applies a previously computed ScaleMap (e.g. to a test set with the
/// training-set parameters).
inline Matrix apply_scale(const ScaleMap& map, const Matrix& x) {
  if (static_cast<Index>(map.columns.size()) != x.cols())
    throw DimensionMismatchError("apply_scale: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& c = map.columns[j];
    if (c.constant)
      out.col(j).setZero();
    else
      out.col(j) = (2.0 * (x.col(j).array() - c.min) / (c.max - c.min) - 1.0).matrix();
  }
  return out;
}

/// Inverse of apply_scale; constant columns map back to their constant value.
inline Matrix invert_scale(const ScaleMap& map, const Matrix& x) {
  if (static_cast<Index>(map.columns.size()) != x.cols())
    throw DimensionMismatchError("invert_scale: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const auto& c = map.columns[j];
    if (c.constant)
      out.col(j).setConstant(c.min);
    else
      out.col(j) = ((x.col(j).array() + 1.0) * 0.5 * (c.max - c.min) + c.min).matrix();
  }
  return out;
}

/// Subtracts column means from X and, when present, the mean from y, so the
/// linear model can be fit without an intercept.
inline std::pair<DataMatrix, CenterMap> centralize(const DataMatrix& d) {
  if (d.rows() < 2) throw ValidationError("centralize: need at least 2 rows");
  DataMatrix out = d;
  CenterMap map;
  map.x_means = d.X.colwise().mean();
  out.X.rowwise() -= map.x_means.transpose();
  if (d.y) {
    map.y_mean = d.y->mean();
    out.y = *d.y - Vector::Constant(d.y->size(), *map.y_mean);
  }
  return {std::move(out), std::move(map)};
}

/// Loads a rectangular numeric CSV with a mandatory header row. When
/// `response_column` is given, that column becomes y and the rest form X.
inline DataMatrix load_csv(const std::string& path,
                           const std::optional<std::string>& response_column = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("input file not found: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ": empty file, expected a header row");
  std::vector<std::string> header = split_csv_record(line);

  Index response_idx = -1;
  if (response_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == *response_column) response_idx = static_cast<Index>(j);
    if (response_idx < 0)
      throw MissingColumnError(path + ": no column named '" + *response_column + "'");
  }

  const Index ncols = static_cast<Index>(header.size());
  std::vector<double> values;
  Index nrows = 0;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_record(line);
    if (static_cast<Index>(cells.size()) != ncols)
      throw ParseError(path + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(ncols));
    for (Index j = 0; j < ncols; ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v) || !std::isfinite(v))
        throw ParseError(path + ": line " + std::to_string(line_no) +
                         ", column '" + header[j] + "': cannot parse '" +
                         cells[j] + "' as a finite number");
      values.push_back(v);
    }
    ++nrows;
  }
  if (nrows == 0) throw ParseError(path + ": no data rows");

  DataMatrix d;
  if (response_idx >= 0) {
    d.X.resize(nrows, ncols - 1);
    d.y = Vector(nrows);
    d.response_name = header[response_idx];
    for (Index j = 0; j < ncols; ++j)
      if (j != response_idx) d.column_names.push_back(header[j]);
    for (Index i = 0; i < nrows; ++i) {
      Index jx = 0;
      for (Index j = 0; j < ncols; ++j) {
        const double v = values[i * ncols + j];
        if (j == response_idx) (*d.y)(i) = v;
        else d.X(i, jx++) = v;
      }
    }
  } else {
    d.X.resize(nrows, ncols);
    d.column_names = header;
    for (Index i = 0; i < nrows; ++i)
      for (Index j = 0; j < ncols; ++j) d.X(i, j) = values[i * ncols + j];
  }
  return d;
}

/// Writes a DataMatrix back out in the same CSV dialect load_csv reads.
/// Values use shortest round-trip formatting, so rewrites are byte-stable.
inline void write_dataset_csv(const std::string& path, const DataMatrix& d) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (Index j = 0; j < d.cols(); ++j) {
    if (j) out << ',';
    out << csv_quote(j < static_cast<Index>(d.column_names.size())
                         ? d.column_names[j]
                         : "x" + std::to_string(j + 1));
  }
  if (d.y) out << ',' << csv_quote(d.response_name);
  out << '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      if (j) out << ',';
      out << format_double(d.X(i, j));
    }
    if (d.y) out << ',' << format_double((*d.y)(i));
    out << '\n';
  }
}

inline void to_json(nlohmann::json& j, const ScaleMap::Column& c) {
  j = {{"min", c.min}, {"max", c.max}, {"constant", c.constant}};
}
inline void from_json(const nlohmann::json& j, ScaleMap::Column& c) {
  j.at("min").get_to(c.min);
  j.at("max").get_to(c.max);
  j.at("constant").get_to(c.constant);
}
inline void to_json(nlohmann::json& j, const ScaleMap& m) {
  j = {{"columns", m.columns}};
}
inline void from_json(const nlohmann::json& j, ScaleMap& m) {
  j.at("columns").get_to(m.columns);
}
inline void to_json(nlohmann::json& j, const CenterMap& m) {
  j = nlohmann::json{{"x_means", std::vector<double>(m.x_means.begin(), m.x_means.end())}};
  if (m.y_mean) j["y_mean"] = *m.y_mean;
}
inline void from_json(const nlohmann::json& j, CenterMap& m) {
  std::vector<double> v = j.at("x_means").get<std::vector<double>>();
  m.x_means = Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
  if (j.contains("y_mean")) m.y_mean = j["y_mean"].get<double>();
}

/// Sidecar IO so a test set can be transformed with training parameters.
template <typename MapType>
void save_map_json(const std::string& path, const MapType& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << nlohmann::json(m).dump(2) << '\n';
}

template <typename MapType>
MapType load_map_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("input file not found: " + path);
  nlohmann::json j;
  in >> j;
  return j.get<MapType>();
}

}  // namespace aoss
