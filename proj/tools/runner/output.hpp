#pragma once

#include <string>
#include <utility>
#include <vector>

namespace seqlab::runner {

struct Table {
  std::string file;  ///< relative to the output directory
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  ///< sorted by x on render
};

struct Chart {
  std::string file;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
};

/// %.12g, with "nan" / "inf" / "-inf" spelled out.
std::string fmt(double v);
std::string fmt(std::size_t v);

/// First line is "# config: <config> version=<version>".
std::string render_csv(const Table& table, const std::string& config_line, const std::string& version);

/// Axes, ticks, one polyline per series and a legend. Output depends only
/// on the chart contents.
std::string render_svg(const Chart& chart);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace seqlab::runner
