#pragma once

// Minimal self-contained SVG line plots.  CSV files are the data contract;
// these plots are a convenience view of the same numbers (linear or log-y,
// multiple named series, no external dependencies).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kerneldyn {

class svg_plot {
 public:
  svg_plot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void set_log_y(bool on) { log_y_ = on; }

  void add_series(std::string name, std::vector<std::pair<double, double>> points) {
    series_.push_back({std::move(name), std::move(points)});
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render();
  }

  std::string render() const {
    // Data bounds over plottable points (finite; positive when log-y).
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool any = false;
    for (const auto& s : series_) {
      for (const auto& [x, y] : s.points) {
        if (!plottable(x, y)) continue;
        const double yy = log_y_ ? std::log10(y) : y;
        if (!any) {
          x_lo = x_hi = x;
          y_lo = y_hi = yy;
          any = true;
        } else {
          x_lo = std::min(x_lo, x);
          x_hi = std::max(x_hi, x);
          y_lo = std::min(y_lo, yy);
          y_hi = std::max(y_hi, yy);
        }
      }
    }
    if (x_hi - x_lo < 1e-300) x_hi = x_lo + 1.0;
    if (y_hi - y_lo < 1e-300) y_hi = y_lo + 1.0;

    const double W = 640, H = 420, ml = 64, mr = 16, mt = 30, mb = 46;
    const auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
    const auto py = [&](double yy) { return H - mb - (yy - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"13\">" << escape(title_) << "</text>\n";

    // Axes box and ticks.
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
        << H - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = x_lo + (x_hi - x_lo) * i / 5.0;
      const double fy = y_lo + (y_hi - y_lo) * i / 5.0;
      svg << "<line x1=\"" << px(fx) << "\" y1=\"" << H - mb << "\" x2=\"" << px(fx) << "\" y2=\""
          << H - mb + 4 << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 16
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
          << tick_label(fx, false) << "</text>\n"
          << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
          << py(fy) << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << ml - 6 << "\" y=\"" << py(fy) + 3
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
          << tick_label(fy, log_y_) << "</text>\n";
    }
    svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(xlabel_) << "</text>\n"
        << "<text x=\"14\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\""
        << " transform=\"rotate(-90 14 " << (mt + H - mb) / 2 << ")\">"
        << escape(log_y_ ? ylabel_ + " (log10)" : ylabel_) << "</text>\n";

    // Series polylines and legend.
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf"};
    for (size_t s = 0; s < series_.size(); ++s) {
      const char* color = palette[s % 6];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : series_[s].points) {
        if (!plottable(x, y)) continue;
        svg << px(x) << "," << py(log_y_ ? std::log10(y) : y) << " ";
      }
      svg << "\"/>\n";
      if (!series_[s].name.empty()) {
        const double ly = mt + 14 + 14 * static_cast<double>(s);
        svg << "<line x1=\"" << W - mr - 110 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 90
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << W - mr - 86 << "\" y=\"" << ly + 3
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(series_[s].name)
            << "</text>\n";
      }
    }
    svg << "</svg>\n";
    return svg.str();
  }

 private:
  struct series {
    std::string name;
    std::vector<std::pair<double, double>> points;
  };

  bool plottable(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    return !log_y_ || y > 0.0;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&') out += "&amp;";
      else if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else out += c;
    }
    return out;
  }

  static std::string tick_label(double v, bool as_power_of_ten) {
    char buf[32];
    if (as_power_of_ten) {
      std::snprintf(buf, sizeof buf, "1e%.2g", v);
    } else {
      std::snprintf(buf, sizeof buf, "%.3g", v);
    }
    return buf;
  }

  std::string title_, xlabel_, ylabel_;
  bool log_y_ = false;
  std::vector<series> series_;
};

}  // namespace kerneldyn
