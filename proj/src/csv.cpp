#include "qcv/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qcv/errors.hpp"

namespace qcv {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

Period parse_period(const std::string& cell, std::size_t row) {
  // "YYYY-MM" or "YYYY-MM-DD"; the day is ignored.
  int y = 0, m = 0;
  if (cell.size() < 7 || cell[4] != '-' ||
      std::from_chars(cell.data(), cell.data() + 4, y).ec != std::errc{} ||
      std::from_chars(cell.data() + 5, cell.data() + 7, m).ec != std::errc{} || m < 1 || m > 12)
    throw Error(Errc::unparseable_cell,
                "row " + std::to_string(row) + ", date column: '" + cell + "'");
  if (cell.size() > 7 && cell[7] != '-')
    throw Error(Errc::unparseable_cell,
                "row " + std::to_string(row) + ", date column: '" + cell + "'");
  return Period{y, m};
}

double parse_value(const std::string& cell, std::size_t row, const std::string& col) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw Error(Errc::unparseable_cell,
                "row " + std::to_string(row) + ", column '" + col + "': '" + cell + "'");
  return v;
}

}  // namespace

std::vector<Series> load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw Error(Errc::empty_file, "'" + path + "' has no header row");
  const auto headers = split_row(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < headers.size(); ++i)
      if (trim(headers[i]) == name) return i;
    throw Error(Errc::missing_column, "'" + name + "' not found in '" + path + "'");
  };

  const std::size_t date_idx = column_index(schema.date_column);
  std::vector<std::pair<std::string, std::size_t>> cols;  // series name, column idx
  for (const auto& [sname, header] : schema.series_columns)
    cols.emplace_back(sname, column_index(header));

  struct Row {
    Period p;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() < headers.size())
      throw Error(Errc::unparseable_cell, "row " + std::to_string(row_no) + ": expected " +
                                              std::to_string(headers.size()) + " cells, got " +
                                              std::to_string(cells.size()));
    Row r;
    r.p = parse_period(trim(cells[date_idx]), row_no);
    for (const auto& [sname, idx] : cols) r.vals.push_back(parse_value(cells[idx], row_no, sname));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(Errc::empty_file, "'" + path + "' has no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.p < b.p; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].p == rows[i - 1].p)
      throw Error(Errc::duplicate_timestamp, "'" + path + "': period " + rows[i].p.str());

  std::vector<Series> out;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Series s;
    s.name = cols[c].first;
    for (const auto& r : rows) {
      s.timestamps.push_back(r.p);
      s.values.push_back(r.vals[c]);
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<Series>& series) {
  if (series.empty()) throw Error(Errc::empty_fit, "write_csv: no series");
  for (const auto& s : series)
    if (s.timestamps != series[0].timestamps)
      throw Error(Errc::timestamp_mismatch, "write_csv: '" + s.name + "' range differs");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << "date";
  for (const auto& s : series) out << "," << s.name;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < series[0].size(); ++i) {
    out << series[0].timestamps[i].str();
    for (const auto& s : series) {
      std::snprintf(buf, sizeof(buf), "%.10g", s.values[i]);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace qcv
