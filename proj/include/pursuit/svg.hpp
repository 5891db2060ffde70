#pragma once
#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pursuit/error.hpp"
#include "pursuit/geometry.hpp"

namespace pursuit {

// Minimal SVG line plotting: world-coordinate polylines, auto viewbox,
// y flipped so +y is up.
class SvgPlot {
 public:
  SvgPlot(double width_px = 900.0, double height_px = 700.0)
      : width_(width_px), height_(height_px) {}

  void polyline(const std::vector<Vec2>& pts, const std::string& color, double stroke = 1.5,
                bool dashed = false) {
    if (pts.empty()) return;
    for (const Vec2& p : pts) {
      min_ = {std::min(min_.x, p.x), std::min(min_.y, p.y)};
      max_ = {std::max(max_.x, p.x), std::max(max_.y, p.y)};
    }
    Item it;
    it.pts = pts;
    it.color = color;
    it.stroke = stroke;
    it.dashed = dashed;
    items_.push_back(std::move(it));
  }

  void label(const std::string& text) { labels_.push_back(text); }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write plot: " + path);
    const double pad = 0.05 * std::max(max_.x - min_.x, max_.y - min_.y) + 1e-6;
    const double x0 = min_.x - pad, x1 = max_.x + pad;
    const double y0 = min_.y - pad, y1 = max_.y + pad;
    const double sx = width_ / (x1 - x0);
    const double sy = height_ / (y1 - y0);
    const double s = std::min(sx, sy);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& it : items_) {
      out << "<polyline fill=\"none\" stroke=\"" << it.color << "\" stroke-width=\""
          << it.stroke << "\"";
      if (it.dashed) out << " stroke-dasharray=\"6 4\"";
      out << " points=\"";
      for (const Vec2& p : it.pts)
        out << (p.x - x0) * s << "," << height_ - (p.y - y0) * s << " ";
      out << "\"/>\n";
    }
    double ty = 18.0;
    for (const auto& text : labels_) {
      out << "<text x=\"10\" y=\"" << ty << "\" font-family=\"monospace\" font-size=\"13\">"
          << text << "</text>\n";
      ty += 16.0;
    }
    out << "</svg>\n";
  }

 private:
  struct Item {
    std::vector<Vec2> pts;
    std::string color;
    double stroke;
    bool dashed;
  };
  double width_, height_;
  Vec2 min_{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 max_{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  std::vector<Item> items_;
  std::vector<std::string> labels_;
};

// x/y series plot with simple axes.
inline void plot_series(const std::string& path, const std::vector<double>& xs,
                        const std::vector<double>& ys, const std::string& title,
                        const std::string& color = "#1f77b4") {
  SvgPlot plot(900, 400);
  std::vector<Vec2> pts(xs.size());
  double ymin = std::numeric_limits<double>::max(), ymax = std::numeric_limits<double>::lowest();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pts[i] = {xs[i], ys[i]};
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (!xs.empty()) {
    // axis frame
    plot.polyline({{xs.front(), ymin}, {xs.back(), ymin}}, "#888888", 1.0);
    plot.polyline({{xs.front(), ymin}, {xs.front(), ymax}}, "#888888", 1.0);
  }
  plot.polyline(pts, color, 1.5);
  std::ostringstream head;
  head.precision(4);
  head << title << "  [y: " << ymin << " .. " << ymax << "]";
  plot.label(head.str());
  plot.save(path);
}

}  // namespace pursuit
