#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tabpfgen/error.hpp"
#include "tabpfgen/kde.hpp"

namespace tabpfgen {

// Minimal SVG canvas mapping a data rectangle onto a fixed-size viewport.
// Deterministic output: shape order and number formatting are fixed, so
// identical inputs give byte-identical files.
class SvgCanvas {
 public:
  SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width = 640,
            int height = 480, int margin = 40)
      : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width),
        height_(height), margin_(margin) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
          << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << width_ << "\" height=\"" << height_
          << "\" fill=\"white\"/>\n";
  }

  double px(double x) const {
    return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2.0 * margin_);
  }
  double py(double y) const {
    return height_ - margin_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - 2.0 * margin_);
  }

  void circle(double x, double y, double r, const std::string& fill, double opacity = 1.0,
              const std::string& stroke = "none") {
    body_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << fmt(r)
          << "\" fill=\"" << fill << "\" fill-opacity=\"" << fmt(opacity) << "\" stroke=\""
          << stroke << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double stroke_width = 1.0) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ << ' ';
      body_ << fmt(px(pts[i].first)) << ',' << fmt(py(pts[i].second));
    }
    body_ << "\"/>\n";
  }

  // Rectangle in data coordinates (used for histogram bars).
  void bar(double x0, double x1, double y0, double y1, const std::string& fill,
           double opacity = 1.0) {
    const double left = px(x0);
    const double top = py(y1);
    body_ << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
          << fmt(px(x1) - left) << "\" height=\"" << fmt(py(y0) - top) << "\" fill=\"" << fill
          << "\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
  }

  void text(double x_pixels, double y_pixels, const std::string& s, int size = 14) {
    body_ << "<text x=\"" << fmt(x_pixels) << "\" y=\"" << fmt(y_pixels) << "\" font-size=\""
          << size << "\" font-family=\"sans-serif\">" << escape(s) << "</text>\n";
  }

  void frame() {
    body_ << "<rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\""
          << width_ - 2 * margin_ << "\" height=\"" << height_ - 2 * margin_
          << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  std::string str() const { return body_.str() + "</svg>\n"; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::io_write_failed, "cannot write '" + path + "'");
    out << str();
    require(out.good(), ErrorCode::io_write_failed, "write to '" + path + "' failed");
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
      }
    }
    return out;
  }

  double x_min_, x_max_, y_min_, y_max_;
  int width_, height_, margin_;
  std::ostringstream body_;
};

// Marching-squares iso-lines of a density grid at the given level, as
// segments in data coordinates.
inline std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>>
contour_segments(const DensityGrid& g, double level) {
  std::vector<std::pair<std::pair<double, double>, std::pair<double, double>>> segs;
  const auto nx = static_cast<Eigen::Index>(g.xs.size());
  const auto ny = static_cast<Eigen::Index>(g.ys.size());
  auto interp = [&](double a, double b, double pa, double pb) {
    const double t = (level - pa) / (pb - pa);
    return a + t * (b - a);
  };
  for (Eigen::Index r = 0; r + 1 < ny; ++r)
    for (Eigen::Index c = 0; c + 1 < nx; ++c) {
      const double x0 = g.xs[static_cast<std::size_t>(c)], x1 = g.xs[static_cast<std::size_t>(c + 1)];
      const double y0 = g.ys[static_cast<std::size_t>(r)], y1 = g.ys[static_cast<std::size_t>(r + 1)];
      const double v00 = g.values(r, c), v10 = g.values(r, c + 1);
      const double v01 = g.values(r + 1, c), v11 = g.values(r + 1, c + 1);
      int idx = 0;
      if (v00 > level) idx |= 1;
      if (v10 > level) idx |= 2;
      if (v11 > level) idx |= 4;
      if (v01 > level) idx |= 8;
      if (idx == 0 || idx == 15) continue;
      // Edge crossings: bottom (y0), right (x1), top (y1), left (x0).
      std::pair<double, double> pt[4];
      bool has[4] = {false, false, false, false};
      if ((v00 > level) != (v10 > level)) { pt[0] = {interp(x0, x1, v00, v10), y0}; has[0] = true; }
      if ((v10 > level) != (v11 > level)) { pt[1] = {x1, interp(y0, y1, v10, v11)}; has[1] = true; }
      if ((v01 > level) != (v11 > level)) { pt[2] = {interp(x0, x1, v01, v11), y1}; has[2] = true; }
      if ((v00 > level) != (v01 > level)) { pt[3] = {x0, interp(y0, y1, v00, v01)}; has[3] = true; }
      std::vector<int> edges;
      for (int e = 0; e < 4; ++e)
        if (has[e]) edges.push_back(e);
      if (edges.size() == 2) {
        segs.push_back({pt[edges[0]], pt[edges[1]]});
      } else if (edges.size() == 4) {
        // Saddle: pair bottom-right and top-left.
        segs.push_back({pt[0], pt[1]});
        segs.push_back({pt[2], pt[3]});
      }
    }
  return segs;
}

// Histogram with fixed bin count over [lo, hi]; returns counts per bin.
inline std::vector<long> histogram_counts(const std::vector<double>& values, double lo, double hi,
                                          int bins) {
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto b = static_cast<long>((v - lo) / width);
    b = std::min<long>(b, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

}  // namespace tabpfgen
