#pragma once

// Minimal SVG plots: polylines, circle markers and occupied grid cells in
// world coordinates (y up). Bounds grow to fit everything added.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "locoplan/geometry.hpp"
#include "locoplan/scene.hpp"

namespace locoplan {

class SvgPlot {
 public:
  explicit SvgPlot(double pixels_per_meter = 60.0) : scale_(pixels_per_meter) {}

  void polyline(const std::vector<Vec2>& pts, const std::string& color, double width = 2.0,
                const std::string& label = "") {
    for (const auto& p : pts) grow(p);
    items_.push_back({Kind::Line, pts, color, width, label});
  }

  void markers(const std::vector<Vec2>& pts, const std::string& color, double radius = 4.0,
               const std::string& label = "") {
    for (const auto& p : pts) grow(p);
    items_.push_back({Kind::Dots, pts, color, radius, label});
  }

  void grid(const OccupancyGrid& g, const std::string& color = "#bbbbbb") {
    grow(Vec2(0, 0));
    grow(Vec2(g.width() * g.cell_size(), g.height() * g.cell_size()));
    std::vector<Vec2> cells;
    for (int j = 0; j < g.height(); ++j)
      for (int i = 0; i < g.width(); ++i)
        if (g.occupied({i, j})) cells.emplace_back(i * g.cell_size(), j * g.cell_size());
    items_.push_back({Kind::Cells, cells, color, g.cell_size(), ""});
  }

  std::string str() const {
    const double margin = 0.5;
    const double x0 = (lo_.x() <= hi_.x() ? lo_.x() : 0.0) - margin;
    const double y1 = (lo_.y() <= hi_.y() ? hi_.y() : 1.0) + margin;
    const double w = std::max(hi_.x() - lo_.x(), 1.0) + 2 * margin;
    const double h = std::max(hi_.y() - lo_.y(), 1.0) + 2 * margin;
    auto px = [&](const Vec2& p) { return Vec2((p.x() - x0) * scale_, (y1 - p.y()) * scale_); };
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  w * scale_, h * scale_ + 20.0 * legend_count());
    out += buf;
    int legend = 0;
    for (const auto& it : items_) {
      switch (it.kind) {
        case Kind::Cells:
          for (const auto& c : it.pts) {
            const Vec2 q = px(Vec2(c.x(), c.y() + it.size));
            std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                          q.x(), q.y(), it.size * scale_, it.size * scale_, it.color.c_str());
            out += buf;
          }
          break;
        case Kind::Line: {
          out += "<polyline fill=\"none\" stroke=\"" + it.color + "\" stroke-width=\"" + std::to_string(it.size) +
                 "\" points=\"";
          for (const auto& p : it.pts) {
            const Vec2 q = px(p);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", q.x(), q.y());
            out += buf;
          }
          out += "\"/>\n";
          break;
        }
        case Kind::Dots:
          for (const auto& p : it.pts) {
            const Vec2 q = px(p);
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\"/>\n", q.x(), q.y(),
                          it.size, it.color.c_str());
            out += buf;
          }
          break;
      }
      if (!it.label.empty()) {
        std::snprintf(buf, sizeof buf, "<text x=\"10\" y=\"%.0f\" font-size=\"14\" fill=\"%s\">%s</text>\n",
                      h * scale_ + 16.0 + 20.0 * legend++, it.color.c_str(), it.label.c_str());
        out += buf;
      }
    }
    out += "</svg>\n";
    return out;
  }

 private:
  enum class Kind { Line, Dots, Cells };
  struct Item {
    Kind kind;
    std::vector<Vec2> pts;
    std::string color;
    double size;
    std::string label;
  };

  void grow(const Vec2& p) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  int legend_count() const {
    return static_cast<int>(std::count_if(items_.begin(), items_.end(), [](const Item& i) { return !i.label.empty(); }));
  }

  double scale_;
  Vec2 lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi_ = Vec2::Constant(-std::numeric_limits<double>::infinity());
  std::vector<Item> items_;
};

}  // namespace locoplan
