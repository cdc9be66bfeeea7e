#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "aoss/error.hpp"

namespace aoss {

/// One labelled polyline of a plot. Points are drawn in the given order.
struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Round tick step: 1, 2 or 5 times a power of ten near range/target.
inline double nice_step(double range, int target_ticks) {
  const double raw = range / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm <= 1.5) return mag;
  if (norm <= 3.5) return 2.0 * mag;
  if (norm <= 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

}  // namespace detail

/// Renders labelled series as an SVG line chart with axes, round-number
/// ticks, point markers and a legend. Purely textual output, so renders are
/// byte-identical for identical inputs.
inline std::string render_line_plot(const PlotSpec& spec,
                                    const std::vector<Series>& series) {
  if (series.empty()) throw ValidationError("render_line_plot: no series");
  for (const Series& s : series) {
    if (s.xs.size() != s.ys.size())
      throw ValidationError("render_line_plot: series '" + s.label +
                            "' has mismatched x/y lengths");
    if (s.xs.empty())
      throw ValidationError("render_line_plot: series '" + s.label + "' is empty");
  }

  double xmin = series[0].xs[0], xmax = xmin;
  double ymin = series[0].ys[0], ymax = ymin;
  for (const Series& s : series) {
    for (double v : s.xs) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.ys) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (xmax == xmin) { xmin -= 1.0; xmax += 1.0; }
  if (ymax == ymin) {
    const double pad = std::max(1.0, std::abs(ymin)) * 0.5;
    ymin -= pad;
    ymax += pad;
  } else {
    const double pad = (ymax - ymin) * 0.08;
    ymin -= pad;
    ymax += pad;
  }

  const double left = 70, right = 150, top = 42, bottom = 52;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::fmt(left + pw / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::xml_escape(spec.title) + "</text>\n";

  // Gridlines and ticks.
  const double xstep = detail::nice_step(xmax - xmin, 6);
  const double ystep = detail::nice_step(ymax - ymin, 6);
  for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-9 * xstep; t += xstep) {
    const double gx = px(t);
    svg += "<line x1=\"" + detail::fmt(gx) + "\" y1=\"" + detail::fmt(top) +
           "\" x2=\"" + detail::fmt(gx) + "\" y2=\"" + detail::fmt(top + ph) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + detail::fmt(gx) + "\" y=\"" + detail::fmt(top + ph + 18) +
           "\" text-anchor=\"middle\">" + detail::fmt(t) + "</text>\n";
  }
  for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-9 * ystep; t += ystep) {
    const double gy = py(t);
    svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(gy) +
           "\" x2=\"" + detail::fmt(left + pw) + "\" y2=\"" + detail::fmt(gy) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + detail::fmt(left - 8) + "\" y=\"" + detail::fmt(gy + 4) +
           "\" text-anchor=\"end\">" + detail::fmt(t) + "</text>\n";
  }

  // Axes.
  svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top + ph) +
         "\" x2=\"" + detail::fmt(left + pw) + "\" y2=\"" + detail::fmt(top + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top) +
         "\" x2=\"" + detail::fmt(left) + "\" y2=\"" + detail::fmt(top + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" +
         detail::fmt(top + ph + 40) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + detail::fmt(top + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         detail::fmt(top + ph / 2) + ")\">" + detail::xml_escape(spec.y_label) +
         "</text>\n";

  // Series polylines, markers and legend.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = detail::kPalette[si % detail::kPaletteSize];
    const Series& s = series[si];
    std::string points;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (i) points += ' ';
      points += detail::fmt(px(s.xs[i])) + "," + detail::fmt(py(s.ys[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.8\" points=\"" + points + "\"/>\n";
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      svg += "<circle cx=\"" + detail::fmt(px(s.xs[i])) + "\" cy=\"" +
             detail::fmt(py(s.ys[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(si);
    svg += "<line x1=\"" + detail::fmt(left + pw + 12) + "\" y1=\"" +
           detail::fmt(ly) + "\" x2=\"" + detail::fmt(left + pw + 34) +
           "\" y2=\"" + detail::fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"/>\n";
    svg += "<text x=\"" + detail::fmt(left + pw + 40) + "\" y=\"" +
           detail::fmt(ly + 4) + "\">" + detail::xml_escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_svg(const std::string& path, const PlotSpec& spec,
                      const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << render_line_plot(spec, series);
}

}  // namespace aoss
