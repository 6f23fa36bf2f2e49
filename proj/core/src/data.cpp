#include "boop/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace boop {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trimmed(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

TransformKind transform_from_string(const std::string& name) {
  if (name == "none") return TransformKind::None;
  if (name == "diff") return TransformKind::Diff;
  if (name == "diff_log_400") return TransformKind::DiffLog400;
  throw ConfigError("unknown transform '" + name + "'");
}

Frequency frequency_from_string(const std::string& name) {
  if (name == "Q" || name == "quarterly") return Frequency::Quarterly;
  if (name == "M" || name == "monthly") return Frequency::Monthly;
  throw ConfigError("unknown frequency '" + name + "'");
}

const std::vector<double>& RawSeriesTable::column(
    const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw DataError("no column named '" + name + "'");
}

RawSeriesTable ingest_csv(const std::string& path,
                          const std::vector<std::string>& required_columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  RawSeriesTable table;
  table.names = split_csv_line(line);
  if (table.names.empty()) throw DataError(path + ": empty header");
  table.columns.resize(table.names.size());

  for (const auto& required : required_columns) {
    if (std::find(table.names.begin(), table.names.end(), required) ==
        table.names.end()) {
      throw DataError(path + ": missing column '" + required + "'");
    }
  }

  std::size_t row = 1;
  bool any_rows = false;
  while (std::getline(in, line)) {
    ++row;
    if (trimmed(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != table.names.size()) {
      throw DataError(path + ": ragged row " + std::to_string(row) + " (" +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(table.names.size()) + ")");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
        table.columns[c].push_back(v);
      } catch (const std::exception&) {
        throw DataError(path + ": non-numeric cell at row " +
                        std::to_string(row) + ", column " +
                        std::to_string(c + 1) + " ('" + table.names[c] + "')");
      }
    }
    any_rows = true;
  }
  if (!any_rows) throw DataError(path + ": no data rows");
  return table;
}

std::vector<double> transform_series(const std::vector<double>& series,
                                     TransformKind kind) {
  if (kind == TransformKind::None) return series;
  if (series.size() < 2) {
    throw DataError("transform_series: need at least 2 observations");
  }
  std::vector<double> out;
  out.reserve(series.size() - 1);
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (kind == TransformKind::Diff) {
      out.push_back(series[t] - series[t - 1]);
    } else {
      if (!(series[t] > 0.0) || !(series[t - 1] > 0.0)) {
        throw DataError("transform_series: diff_log_400 needs positive values"
                        " (offending index " + std::to_string(t) + ")");
      }
      out.push_back(400.0 * (std::log(series[t]) - std::log(series[t - 1])));
    }
  }
  return out;
}

QuarterlyAggregate monthly_to_quarterly(const std::vector<double>& series) {
  if (series.size() < 3) {
    throw DataError("monthly_to_quarterly: need at least 3 observations");
  }
  QuarterlyAggregate out;
  const std::size_t quarters = series.size() / 3;
  out.dropped_partial = series.size() % 3 != 0;
  out.values.reserve(quarters);
  for (std::size_t q = 0; q < quarters; ++q) {
    out.values.push_back(
        (series[3 * q] + series[3 * q + 1] + series[3 * q + 2]) / 3.0);
  }
  return out;
}

Eigen::MatrixXd assemble_observation_matrix(const RawSeriesTable& table,
                                            const std::vector<SeriesSpec>& specs,
                                            bool* any_partial_quarter) {
  if (specs.empty()) throw ConfigError("no series configured");
  std::vector<std::vector<double>> prepared;
  bool partial = false;
  for (const auto& spec : specs) {
    std::vector<double> s = table.column(spec.name);
    if (spec.frequency == Frequency::Monthly) {
      QuarterlyAggregate agg = monthly_to_quarterly(s);
      partial = partial || agg.dropped_partial;
      s = std::move(agg.values);
    }
    prepared.push_back(transform_series(s, spec.transform));
  }
  if (any_partial_quarter != nullptr) *any_partial_quarter = partial;

  std::size_t t = prepared.front().size();
  for (const auto& s : prepared) t = std::min(t, s.size());
  if (t == 0) throw DataError("assemble: a series is empty after transforms");

  // Align on the trailing observations.
  Eigen::MatrixXd y(static_cast<Eigen::Index>(t),
                    static_cast<Eigen::Index>(specs.size()));
  for (std::size_t c = 0; c < prepared.size(); ++c) {
    const std::size_t offset = prepared[c].size() - t;
    for (std::size_t r = 0; r < t; ++r) {
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          prepared[c][offset + r];
    }
  }
  return y;
}

}  // namespace boop
