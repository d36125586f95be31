#ifndef LANGINC_OUTPUT_HPP_
#define LANGINC_OUTPUT_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "langinc/errors.hpp"

namespace langinc {

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ContractViolation("number formatting failed");
  return std::string(buf, end);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// RFC 4180 table with LF line endings; every row must match the header width.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw ContractViolation("CSV row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    add_row(std::move(cells));
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_field(cells[i]);
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Minimal SVG charts: axes with ticks, one polyline per line series and one
// rect per histogram bar.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string tick_label(double v) {
  if (v == 0.0) return "0";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// 1-2-5 ticks covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

class Frame {
 public:
  static constexpr double kWidth = 720, kHeight = 440, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

  Frame(double x0, double x1, double y0, double y1, bool log_x) : log_x_(log_x) {
    if (log_x_) {
      x0 = std::log10(x0);
      x1 = std::log10(x1);
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    x0_ = x0, x1_ = x1, y0_ = y0, y1_ = y1;
  }

  double px(double x) const {
    const double u = log_x_ ? std::log10(x) : x;
    return kLeft + (u - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight);
  }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  std::string axes(const ChartSpec& spec) const {
    std::string s;
    const double bx = kHeight - kBottom;
    s += "<line class=\"axis\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(bx) + "\" x2=\"" + fixed(kWidth - kRight) +
         "\" y2=\"" + fixed(bx) + "\" stroke=\"black\"/>\n";
    s += "<line class=\"axis\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(kLeft) +
         "\" y2=\"" + fixed(bx) + "\" stroke=\"black\"/>\n";
    std::vector<double> xt;
    if (log_x_) {
      for (double e = std::ceil(x0_ - 1e-9); e <= x1_ + 1e-9; e += 1.0) xt.push_back(std::pow(10.0, e));
    } else {
      xt = nice_ticks(x0_, x1_);
    }
    for (double t : xt) {
      const double x = px(t);
      s += "<line class=\"tick\" x1=\"" + fixed(x) + "\" y1=\"" + fixed(bx) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
           fixed(bx + 5) + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(bx + 20) + "\" font-size=\"12\" text-anchor=\"middle\">" +
           tick_label(t) + "</text>\n";
    }
    for (double t : nice_ticks(y0_, y1_)) {
      const double y = py(t);
      s += "<line class=\"tick\" x1=\"" + fixed(kLeft - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(kLeft) +
           "\" y2=\"" + fixed(y) + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + fixed(kLeft - 8) + "\" y=\"" + fixed(y + 4) + "\" font-size=\"12\" text-anchor=\"end\">" +
           tick_label(t) + "</text>\n";
    }
    s += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" +
         xml_escape(spec.title) + "</text>\n";
    s += "<text x=\"" + fixed((kLeft + kWidth - kRight) / 2) + "\" y=\"" + fixed(kHeight - 15) +
         "\" font-size=\"13\" text-anchor=\"middle\">" + xml_escape(spec.x_label) + "</text>\n";
    s += "<text x=\"16\" y=\"" + fixed((kTop + bx) / 2) + "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed((kTop + bx) / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";
    return s;
  }

 private:
  bool log_x_;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
};

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  return colors[i % 5];
}

inline std::string svg_open() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" "
         "height=\"440\" viewBox=\"0 0 720 440\">\n<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
}

inline std::string polyline(const Frame& fr, const Series& s, std::size_t index) {
  std::string pts;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (i) pts += ' ';
    pts += fixed(fr.px(s.x[i])) + "," + fixed(fr.py(s.y[i]));
  }
  return "<polyline class=\"series\" data-label=\"" + xml_escape(s.label) + "\" fill=\"none\" stroke=\"" +
         palette(index) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
}

inline std::string legend(const std::vector<Series>& series, std::size_t first_color = 0) {
  std::string s;
  double y = Frame::kTop + 12;
  for (std::size_t i = 0; i < series.size(); ++i, y += 16) {
    if (series[i].label.empty()) continue;
    const double x = Frame::kWidth - Frame::kRight - 170;
    s += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(y - 4) + "\" x2=\"" + fixed(x + 20) + "\" y2=\"" + fixed(y - 4) +
         "\" stroke=\"" + palette(first_color + i) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(x + 26) + "\" y=\"" + fixed(y) + "\" font-size=\"12\">" + xml_escape(series[i].label) +
         "</text>\n";
  }
  return s;
}

}  // namespace detail

/// One <polyline> per series; its point count equals the series length.
inline std::string svg_line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ContractViolation("series x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.log_x && !(s.x[i] > 0.0)) throw ContractViolation("log axis needs positive x");
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = spec.log_x ? 1.0 : 0.0, x1 = x0 + 1.0, y0 = 0.0, y1 = 1.0;
  const double pad = 0.05 * (y1 - y0);
  const detail::Frame fr(x0, x1, y0 - pad, y1 + pad, spec.log_x);
  std::string out = detail::svg_open() + fr.axes(spec);
  for (std::size_t i = 0; i < series.size(); ++i) out += detail::polyline(fr, series[i], i);
  out += detail::legend(series);
  return out + "</svg>\n";
}

/// One <rect class="bar"> per bin, plus optional overlay polylines.
inline std::string svg_bar_chart(const ChartSpec& spec, const std::vector<double>& edges,
                                 const std::vector<double>& heights, const std::vector<Series>& overlays = {}) {
  if (edges.size() != heights.size() + 1) throw ContractViolation("bar chart needs bins + 1 edges");
  double y1 = 0.0;
  for (double h : heights) y1 = std::max(y1, h);
  for (const auto& s : overlays) {
    for (double v : s.y) y1 = std::max(y1, v);
  }
  const detail::Frame fr(edges.front(), edges.back(), 0.0, 1.05 * y1, false);
  std::string out = detail::svg_open() + fr.axes(spec);
  for (std::size_t b = 0; b < heights.size(); ++b) {
    const double xa = fr.px(edges[b]), xb = fr.px(edges[b + 1]);
    const double top = fr.py(heights[b]), base = fr.py(0.0);
    out += "<rect class=\"bar\" x=\"" + detail::fixed(xa) + "\" y=\"" + detail::fixed(top) + "\" width=\"" +
           detail::fixed(std::max(xb - xa, 0.0)) + "\" height=\"" + detail::fixed(std::max(base - top, 0.0)) +
           "\" fill=\"#9ecae1\" stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n";
  }
  for (std::size_t i = 0; i < overlays.size(); ++i) out += detail::polyline(fr, overlays[i], i + 1);
  out += detail::legend(overlays, 1);
  return out + "</svg>\n";
}

}  // namespace langinc

#endif  // LANGINC_OUTPUT_HPP_
