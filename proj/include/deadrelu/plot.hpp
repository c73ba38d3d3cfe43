#pragma once

#include <string>
#include <utility>
#include <vector>

namespace deadrelu {

/// Numeric CSV table: a header row followed by rows of reals.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of `name`; throws InvalidInput listing the available columns.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

struct PlotSpec {
  std::string input_csv;
  std::string x_column;
  std::vector<std::string> series;
  /// Series drawn dashed, typically the bounds.
  std::vector<std::string> dashed;
  bool log_x = false;
  bool log_y = false;
  std::string output_svg;
  std::string title;
  /// Keep only rows where column == value, e.g. {"n", 2}.
  std::vector<std::pair<std::string, double>> filters;
};

/// Renders an 800x600 SVG 1.1 line chart. Output depends only on the
/// table and spec, never on time or environment.
std::string render_svg(const CsvTable& table, const PlotSpec& spec);

/// Reads spec.input_csv and writes spec.output_svg. Nothing is written if
/// the CSV or the spec is invalid.
void plot_csv(const PlotSpec& spec);

}  // namespace deadrelu
