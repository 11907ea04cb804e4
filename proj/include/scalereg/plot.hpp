#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "scalereg/experiments.hpp"

namespace scalereg {

namespace detail {

struct SvgFrame {
  double width = 480, height = 360;
  double margin = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double px(double x) const {
    return margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin);
  }
  double py(double y) const {
    return height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin);
  }
};

inline void svg_begin(std::ostream& os, const SvgFrame& f, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
     << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<line x1=\"" << f.margin << "\" y1=\"" << f.height - f.margin << "\" x2=\""
     << f.width - f.margin << "\" y2=\"" << f.height - f.margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.margin << "\" y1=\"" << f.margin << "\" x2=\"" << f.margin << "\" y2=\""
     << f.height - f.margin << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
  os << "<text x=\"14\" y=\"" << f.height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
     << "transform=\"rotate(-90 14 " << f.height / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace detail

/// Log-log scatter of per-replicate errors with the median trend line.
inline void plot_rate_svg(std::ostream& os, const RateResult& result) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : result.rows)
    if (std::isfinite(row.err) && row.err > 0.0)
      pts.emplace_back(std::log10(static_cast<double>(row.n)), std::log10(row.err));
  detail::SvgFrame f;
  if (!pts.empty()) {
    f.x_min = f.x_max = pts.front().first;
    f.y_min = f.y_max = pts.front().second;
    for (const auto& [x, y] : pts) {
      f.x_min = std::min(f.x_min, x);
      f.x_max = std::max(f.x_max, x);
      f.y_min = std::min(f.y_min, y);
      f.y_max = std::max(f.y_max, y);
    }
    const double pad_x = 0.05 * (f.x_max - f.x_min + 1e-9);
    const double pad_y = 0.05 * (f.y_max - f.y_min + 1e-9);
    f.x_min -= pad_x;
    f.x_max += pad_x;
    f.y_min -= pad_y;
    f.y_max += pad_y;
  }
  detail::svg_begin(os, f, "prediction error vs sample size (log-log, slope " +
                               std::to_string(result.slope) + ")",
                    "log10 n", "log10 err");
  for (const auto& [x, y] : pts)
    os << "<circle cx=\"" << f.px(x) << "\" cy=\"" << f.py(y)
       << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.5\"/>\n";
  bool first = true;
  os << "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"";
  for (const auto& [n, med] : result.median_err) {
    if (med <= 0.0) continue;
    os << (first ? "" : " ") << f.px(std::log10(static_cast<double>(n))) << ','
       << f.py(std::log10(med));
    first = false;
  }
  os << "\"/>\n</svg>\n";
}

/// Coverage indicators per replicate plus the empirical frequency line.
inline void plot_coverage_svg(std::ostream& os, const CoverageResult& result) {
  detail::SvgFrame f;
  f.x_min = 0;
  f.x_max = std::max<std::size_t>(result.rows.size(), 1);
  f.y_min = 0;
  f.y_max = 1.05;
  detail::svg_begin(os, f,
                    "oracle-bound coverage (freq " + std::to_string(result.frequency) + ")",
                    "replicate", "covered");
  for (const auto& row : result.rows)
    os << "<circle cx=\"" << f.px(row.rep + 0.5) << "\" cy=\"" << f.py(row.covered)
       << "\" r=\"2\" fill=\"" << (row.covered ? "seagreen" : "crimson") << "\"/>\n";
  os << "<line x1=\"" << f.px(f.x_min) << "\" y1=\"" << f.py(result.frequency) << "\" x2=\""
     << f.px(f.x_max) << "\" y2=\"" << f.py(result.frequency)
     << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  os << "</svg>\n";
}

}  // namespace scalereg
