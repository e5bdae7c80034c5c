#pragma once

#include <map>
#include <string>
#include <vector>

#include "qcv/series.hpp"

namespace qcv {

/// Maps output series names to CSV column headers. `date_column` must parse
/// as ISO "YYYY-MM" or "YYYY-MM-DD"; value columns as plain decimals.
struct CsvSchema {
  std::string date_column = "date";
  std::map<std::string, std::string> series_columns;  // series name -> column header
};

/// Loads one Series per mapped value column. Rows are sorted by date;
/// duplicate dates, unparseable cells and missing columns are errors that
/// carry row/column context.
std::vector<Series> load_csv(const std::string& path, const CsvSchema& schema);

/// Writes series sharing a common timestamp range to a CSV file (the
/// schema documented in the README: UTF-8, comma-delimited, header row,
/// ISO dates, plain decimals).
void write_csv(const std::string& path, const std::vector<Series>& series);

}  // namespace qcv
