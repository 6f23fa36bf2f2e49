#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "boop/errors.hpp"

namespace boop {

enum class TransformKind { None, Diff, DiffLog400 };
enum class Frequency { Quarterly, Monthly };

TransformKind transform_from_string(const std::string& name);
Frequency frequency_from_string(const std::string& name);

struct RawSeriesTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
};

// Reads a headered CSV of numeric columns. Every name in required_columns
// must be present; parse problems are reported with 1-based row/column
// coordinates.
RawSeriesTable ingest_csv(const std::string& path,
                          const std::vector<std::string>& required_columns);

// diff: first differences; diff_log_400: 400 * (log y_t - log y_{t-1});
// none: identity. Differencing shortens the series by one.
std::vector<double> transform_series(const std::vector<double>& series,
                                     TransformKind kind);

struct QuarterlyAggregate {
  std::vector<double> values;
  bool dropped_partial = false;  // a trailing partial quarter was discarded
};

// Within-quarter means of month triples.
QuarterlyAggregate monthly_to_quarterly(const std::vector<double>& series);

struct SeriesSpec {
  std::string name;
  TransformKind transform = TransformKind::None;
  Frequency frequency = Frequency::Quarterly;
};

// Applies frequency aggregation and transforms per series, then aligns all
// series on their trailing observations and stacks them into a T x n matrix
// (column order follows `specs`).
Eigen::MatrixXd assemble_observation_matrix(const RawSeriesTable& table,
                                            const std::vector<SeriesSpec>& specs,
                                            bool* any_partial_quarter = nullptr);

}  // namespace boop
