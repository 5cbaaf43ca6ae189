#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace seqlab::runner {

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("table " + file + ": row width mismatch");
  rows.push_back(std::move(row));
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

std::string render_csv(const Table& table, const std::string& config_line, const std::string& version) {
  std::string out = "# config: " + config_line + " version=" + version + "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_svg(const Chart& chart) {
  constexpr double W = 720, H = 440, left = 80, right = 170, top = 40, bottom = 60;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
  for (const auto& s : chart.series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(y) || !std::isfinite(x) || (chart.log_x && x <= 0)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(chart.title) +
         "</text>\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(top + ph) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top + ph) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x0 + (x1 - x0) * i / 5.0;
    const double xv = chart.log_x ? std::pow(10.0, fx) : fx;
    const double sx = left + pw * i / 5.0;
    out += "<line x1=\"" + num(sx) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(sx) + "\" y2=\"" +
           num(top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(sx) + "\" y=\"" + num(top + ph + 19) + "\" text-anchor=\"middle\">" +
           tick_label(xv) + "</text>\n";
    const double yv = y0 + (y1 - y0) * i / 5.0;
    const double sy = py(yv);
    out += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(sy) + "\" x2=\"" + num(left) + "\" y2=\"" + num(sy) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(sy + 4) + "\" text-anchor=\"end\">" + tick_label(yv) +
           "</text>\n";
  }
  out += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 15) + "\" text-anchor=\"middle\">" +
         escape(chart.x_label) + (chart.log_x ? " (log scale)" : "") + "</text>\n";
  out += "<text transform=\"translate(20," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(chart.y_label) + "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = palette[k % 10];
    auto pts = s.points;
    std::sort(pts.begin(), pts.end());
    std::string poly;
    for (auto [x, y] : pts) {
      if (!std::isfinite(y) || !std::isfinite(x) || (chart.log_x && x <= 0)) continue;
      poly += (poly.empty() ? "" : " ") + num(px(x)) + "," + num(py(y));
      out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!poly.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + poly +
             "\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    out += "<line x1=\"" + num(W - right + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(W - right + 40) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(W - right + 46) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace seqlab::runner
