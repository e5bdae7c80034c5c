#include "qcv/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qcv/errors.hpp"

namespace qcv {

namespace {

std::string escape_markdown(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

bool needs_csv_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string escape_csv(const std::string& s) {
  if (!needs_csv_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Cell text_cell(std::string text) { return Cell{std::move(text), false}; }

Cell number_cell(double v) { return Cell{format_number(v), false}; }

Cell p_value_cell(double p) { return Cell{format_number(p), p <= 0.10}; }

std::string render_markdown(const ReportTable& table) {
  std::string out = "# " + table.title + "\n\n";
  out += "|";
  for (const auto& c : table.columns) out += " " + escape_markdown(c) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : table.rows) {
    out += "|";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      std::string text = i < row.size() ? escape_markdown(row[i].text) : "";
      if (i < row.size() && row[i].bold && !text.empty()) text = "**" + text + "**";
      out += " " + text + " |";
    }
    out += "\n";
  }
  if (!table.notes.empty()) {
    out += "\n";
    for (const auto& n : table.notes) out += n + "\n";
  }
  return out;
}

std::string render_csv(const ReportTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i > 0) out += ",";
    out += escape_csv(table.columns[i]);
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (i > 0) out += ",";
      if (i < row.size()) out += escape_csv(row[i].text);
    }
    out += "\n";
  }
  for (const auto& n : table.notes) out += "# " + escape_csv(n) + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (!f) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

std::vector<std::string> emit_report(const std::vector<ReportTable>& results,
                                     ReportFormat format,
                                     const std::string& out_dir) {
  std::vector<std::string> written;
  for (const auto& table : results) {
    if (table.rows.empty()) {
      std::cerr << "warning: table '" << table.id << "' is empty, no file emitted\n";
      continue;
    }
    const char* ext = format == ReportFormat::markdown ? ".md" : ".csv";
    std::string path = (std::filesystem::path(out_dir) / (table.id + ext)).string();
    write_text_file(path, format == ReportFormat::markdown ? render_markdown(table)
                                                           : render_csv(table));
    written.push_back(path);
  }
  return written;
}

}  // namespace qcv
