#pragma once

#include <string>
#include <vector>

namespace qcv {

/// One table cell. Markdown output wraps bold cells in `**`; CSV ignores
/// the flag.
struct Cell {
  std::string text;
  bool bold = false;
};

/// A rectangular report table. `id` is the output file stem, `notes` render
/// as footnote lines under the markdown table and as trailing comment rows
/// in CSV.
struct ReportTable {
  std::string id;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

enum class ReportFormat { markdown, csv };

/// Fixed 6-significant-digit formatting ("%.6g") used for every number in
/// emitted files; golden-file comparisons depend on it.
std::string format_number(double v);

Cell text_cell(std::string text);
Cell number_cell(double v);
/// p-value cell, bold at p <= 0.10 (boundary inclusive).
Cell p_value_cell(double p);

std::string render_markdown(const ReportTable& table);
std::string render_csv(const ReportTable& table);

/// Writes `content` verbatim (UTF-8, LF line endings). Throws IoError.
void write_text_file(const std::string& path, const std::string& content);

/// One file per table under `out_dir` ("<id>.md" or "<id>.csv"). Tables with
/// no rows are skipped with a warning on stderr (an empty battery produces
/// no file). Returns the paths written.
std::vector<std::string> emit_report(const std::vector<ReportTable>& results,
                                     ReportFormat format,
                                     const std::string& out_dir);

}  // namespace qcv
