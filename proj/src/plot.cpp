#include "deadrelu/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "deadrelu/experiments.hpp"
#include "deadrelu/network.hpp"

namespace deadrelu {

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  std::string available;
  for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
  throw InvalidInput("column '" + name + "' not found; available columns: " + available);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InvalidInput("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size()) {
        throw InvalidInput("CSV line " + std::to_string(line_no) + ": '" + f + "' is not a number");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidInput("CSV has no header");
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 620.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 540.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> ticks;

  double map(double v, double from, double to) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double t = ((log ? std::log10(v) : v) - a) / (b - a);
    return from + t * (to - from);
  }
};

// 1-2-5 steps, roughly six ticks, range widened to tick multiples.
Axis linear_axis(double lo, double hi) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  Axis axis;
  axis.lo = std::floor(lo / step) * step;
  axis.hi = std::ceil(hi / step) * step;
  const int count = static_cast<int>(std::llround((axis.hi - axis.lo) / step));
  for (int i = 0; i <= count; ++i) {
    const double t = axis.lo + i * step;
    axis.ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return axis;
}

// Whole decades; at most ~10 labelled ticks.
Axis log_axis(double lo, double hi) {
  Axis axis;
  axis.log = true;
  int e_lo = static_cast<int>(std::floor(std::log10(lo)));
  int e_hi = static_cast<int>(std::ceil(std::log10(hi)));
  if (e_hi == e_lo) ++e_hi;
  axis.lo = std::pow(10.0, e_lo);
  axis.hi = std::pow(10.0, e_hi);
  const int stride = std::max(1, (e_hi - e_lo + 9) / 10);
  for (int e = e_lo; e <= e_hi; e += stride) axis.ticks.push_back(std::pow(10.0, e));
  return axis;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<double>& values, bool log, const std::string& name) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!usable(v, log)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {
    throw InvalidInput("no plottable values for " + name + (log ? " on a log scale" : ""));
  }
  return log ? log_axis(lo, hi) : linear_axis(lo, hi);
}

}  // namespace

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  if (spec.series.empty()) throw InvalidInput("plot needs at least one series");
  const std::size_t x_col = table.column(spec.x_column);
  std::vector<std::size_t> y_cols;
  for (const auto& s : spec.series) y_cols.push_back(table.column(s));
  std::vector<std::pair<std::size_t, double>> filters;
  for (const auto& [name, value] : spec.filters) filters.emplace_back(table.column(name), value);
  for (const auto& d : spec.dashed) {
    if (std::find(spec.series.begin(), spec.series.end(), d) == spec.series.end()) {
      throw InvalidInput("dashed column '" + d + "' is not among the plotted series");
    }
  }

  std::vector<const std::vector<double>*> rows;
  for (const auto& row : table.rows) {
    bool keep = true;
    for (const auto& [col, value] : filters) keep = keep && row[col] == value;
    if (keep) rows.push_back(&row);
  }
  if (rows.empty()) throw InvalidInput("CSV has no data rows" + std::string(filters.empty() ? "" : " matching the filter"));
  std::stable_sort(rows.begin(), rows.end(), [&](auto* a, auto* b) { return (*a)[x_col] < (*b)[x_col]; });

  std::vector<double> xs, ys;
  for (const auto* row : rows) {
    xs.push_back((*row)[x_col]);
    for (std::size_t c : y_cols) ys.push_back((*row)[c]);
  }
  const Axis x_axis = make_axis(xs, spec.log_x, spec.x_column);
  const Axis y_axis = make_axis(ys, spec.log_y, "the series");

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    svg << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"30.00\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"18\">" << escape(spec.title) << "</text>\n";
  }

  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : x_axis.ticks) {
    const double px = x_axis.map(t, kLeft, kRight);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px) << "\" y2=\"" << num(kBottom)
        << "\"/>\n";
  }
  for (double t : y_axis.ticks) {
    const double py = y_axis.map(t, kBottom, kTop);
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kRight) << "\" y2=\"" << num(py)
        << "\"/>\n";
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kRight - kLeft)
      << "\" height=\"" << num(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double t : x_axis.ticks) {
    svg << "<text x=\"" << num(x_axis.map(t, kLeft, kRight)) << "\" y=\"" << num(kBottom + 18)
        << "\" text-anchor=\"middle\">" << label(t) << "</text>\n";
  }
  for (double t : y_axis.ticks) {
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y_axis.map(t, kBottom, kTop) + 4)
        << "\" text-anchor=\"end\">" << label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kBottom + 45) << "\" text-anchor=\"middle\">"
      << escape(spec.x_column) << (spec.log_x ? " (log)" : "") << "</text>\n";
  svg << "</g>\n";

  for (std::size_t s = 0; s < y_cols.size(); ++s) {
    const std::string color = kPalette[s % kPalette.size()];
    const bool dashed = std::find(spec.dashed.begin(), spec.dashed.end(), spec.series[s]) != spec.dashed.end();
    // A non-plottable value (NaN, or <= 0 on a log axis) breaks the line.
    std::vector<std::string> segments;
    std::string current;
    int points = 0;
    auto flush = [&] {
      if (points > 0) segments.push_back(current);
      current.clear();
      points = 0;
    };
    for (const auto* row : rows) {
      const double x = (*row)[x_col];
      const double y = (*row)[y_cols[s]];
      if (!usable(x, spec.log_x) || !usable(y, spec.log_y)) {
        flush();
        continue;
      }
      if (points) current += ' ';
      current += num(x_axis.map(x, kLeft, kRight)) + "," + num(y_axis.map(y, kBottom, kTop));
      ++points;
    }
    flush();
    for (const auto& seg : segments) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
          << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << seg << "\"/>\n";
    }
    const double ly = kTop + 10 + 22.0 * static_cast<double>(s);
    svg << "<line x1=\"640.00\" y1=\"" << num(ly) << "\" x2=\"670.00\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"678.00\" y=\"" << num(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(spec.series[s]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void plot_csv(const PlotSpec& spec) {
  const CsvTable table = read_csv(spec.input_csv);
  const std::string svg = render_svg(table, spec);
  std::ofstream out(spec.output_svg, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + spec.output_svg);
  out << svg;
  if (!out) throw IoError("failed writing " + spec.output_svg);
}

}  // namespace deadrelu
