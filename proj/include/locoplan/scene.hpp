#pragma once

// Scene model: occupancy grid plus boxes and platforms, loadable from JSON.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "locoplan/error.hpp"
#include "locoplan/geometry.hpp"

namespace locoplan {

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct BoxSpec {
  Vec3 position = Vec3::Zero();  // center of the bottom face
  double yaw = 0.0;
  double width = 0.4;  // boxes are cubes
  double weight = 5.0;
  int stack_index = 0;
};

struct Platform {
  Vec2 position = Vec2::Zero();
  double height = 0.5;
  Vec2 footprint = Vec2(0.6, 0.6);
};

/// Row-major occupancy grid. Cell (i, j) covers [i, i+1) x [j, j+1) times cell_size.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double cell_size)
      : width_(width), height_(height), cell_size_(cell_size),
        cells_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0) {
    if (width < 1 || height < 1) throw InvalidScene("grid dimensions must be >= 1");
    if (!(cell_size > 0.0)) throw InvalidScene("cell size must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(Cell c) const { return c.i >= 0 && c.j >= 0 && c.i < width_ && c.j < height_; }
  bool occupied(Cell c) const { return cells_[index(c)] != 0; }
  void set(Cell c, bool value = true) { cells_[index(c)] = value ? 1 : 0; }

  Vec2 center(Cell c) const { return {(c.i + 0.5) * cell_size_, (c.j + 0.5) * cell_size_}; }
  Cell cell_at(const Vec2& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_size_)),
            static_cast<int>(std::floor(p.y() / cell_size_))};
  }
  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= width_ * cell_size_ &&
           p.y() <= height_ * cell_size_;
  }

  /// Grid where a cell is blocked if any occupied cell's square lies within
  /// `radius` of its center.
  OccupancyGrid inflated(double radius) const {
    OccupancyGrid out(width_, height_, cell_size_);
    const int reach = static_cast<int>(std::ceil(radius / cell_size_)) + 1;
    for (int j = 0; j < height_; ++j) {
      for (int i = 0; i < width_; ++i) {
        if (!occupied({i, j})) continue;
        const Vec2 lo(i * cell_size_, j * cell_size_);
        const Vec2 hi = lo + Vec2::Constant(cell_size_);
        for (int dj = -reach; dj <= reach; ++dj) {
          for (int di = -reach; di <= reach; ++di) {
            const Cell n{i + di, j + dj};
            if (!in_bounds(n)) continue;
            const Vec2 c = center(n);
            const Vec2 nearest = c.cwiseMax(lo).cwiseMin(hi);
            if ((c - nearest).norm() < radius || (di == 0 && dj == 0)) out.set(n);
          }
        }
      }
    }
    return out;
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto v : cells_) n += v;
    return n;
  }

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.j) * width_ + c.i; }

  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 1.0;
  std::vector<std::uint8_t> cells_;
};

struct Scene {
  OccupancyGrid grid;
  std::vector<BoxSpec> boxes;
  std::vector<Platform> platforms;
  Frame2D start;  // character start pose on the ground

  void validate() const {
    const double w = grid.width() * grid.cell_size();
    const double h = grid.height() * grid.cell_size();
    auto inside = [&](const Vec2& lo, const Vec2& hi) {
      return lo.x() >= 0.0 && lo.y() >= 0.0 && hi.x() <= w && hi.y() <= h;
    };
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const auto& b = boxes[k];
      if (!(b.width > 0.0) || !(b.weight > 0.0))
        throw InvalidScene("box " + std::to_string(k) + ": width and weight must be positive");
      if (b.stack_index < 0) throw InvalidScene("box " + std::to_string(k) + ": negative stack index");
      const Vec2 c = b.position.head<2>();
      const double r = 0.5 * b.width * std::sqrt(2.0);
      if (!inside(c - Vec2::Constant(r), c + Vec2::Constant(r)))
        throw InvalidScene("box " + std::to_string(k) + " footprint outside grid");
    }
    for (std::size_t k = 0; k < platforms.size(); ++k) {
      const auto& p = platforms[k];
      if (!(p.footprint.minCoeff() > 0.0) || p.height < 0.0)
        throw InvalidScene("platform " + std::to_string(k) + ": invalid footprint or height");
      if (!inside(p.position - 0.5 * p.footprint, p.position + 0.5 * p.footprint))
        throw InvalidScene("platform " + std::to_string(k) + " footprint outside grid");
    }
  }

  /// Obstacles seen by the planner: the raw grid, platform footprints, and
  /// boxes resting on the floor. `skip_box` excludes one box (the one carried).
  OccupancyGrid occupancy(std::optional<std::size_t> skip_box = std::nullopt) const {
    OccupancyGrid out = grid;
    for (int j = 0; j < grid.height(); ++j) {
      for (int i = 0; i < grid.width(); ++i) {
        const Vec2 c = grid.center({i, j});
        for (const auto& p : platforms) {
          const Vec2 d = (c - p.position).cwiseAbs();
          if (d.x() <= 0.5 * p.footprint.x() && d.y() <= 0.5 * p.footprint.y()) out.set({i, j});
        }
        for (std::size_t k = 0; k < boxes.size(); ++k) {
          if (skip_box && *skip_box == k) continue;
          const auto& b = boxes[k];
          const Vec2 local = Eigen::Rotation2Dd(-b.yaw) * (c - b.position.head<2>());
          if (local.cwiseAbs().maxCoeff() <= 0.5 * b.width) out.set({i, j});
        }
      }
    }
    return out;
  }
};

inline Vec3 json_vec3(const nlohmann::json& j) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.value("z", 0.0)};
}

inline Vec2 json_vec2(const nlohmann::json& j) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>()};
  return {j.at("x").get<double>(), j.at("y").get<double>()};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    const auto& g = j.at("grid");
    Scene s;
    s.grid = OccupancyGrid(g.at("width").get<int>(), g.at("height").get<int>(),
                           g.at("cell_size").get<double>());
    for (const auto& c : g.value("occupied", nlohmann::json::array())) {
      const Cell cell{c.at(0).get<int>(), c.at(1).get<int>()};
      if (!s.grid.in_bounds(cell)) throw InvalidScene("occupied cell outside grid");
      s.grid.set(cell);
    }
    for (const auto& b : j.value("boxes", nlohmann::json::array())) {
      BoxSpec box;
      box.position = json_vec3(b.at("position"));
      box.yaw = b.value("yaw", 0.0);
      box.width = b.value("width", box.width);
      box.weight = b.value("weight", box.weight);
      box.stack_index = b.value("stack_index", 0);
      s.boxes.push_back(box);
    }
    for (const auto& p : j.value("platforms", nlohmann::json::array())) {
      Platform pl;
      pl.position = json_vec2(p.at("position"));
      pl.height = p.value("height", pl.height);
      if (p.contains("footprint")) pl.footprint = json_vec2(p.at("footprint"));
      s.platforms.push_back(pl);
    }
    if (j.contains("start")) {
      const auto& st = j.at("start");
      s.start = Frame2D(Vec3(st.at("x").get<double>(), st.at("y").get<double>(), 0.0),
                        st.value("heading", 0.0));
    } else {
      s.start = Frame2D(Vec3(0.5 * s.grid.cell_size(), 0.5 * s.grid.cell_size(), 0.0), 0.0);
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScene(std::string("scene JSON: ") + e.what());
  }
}

inline nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json occ = nlohmann::json::array();
  for (int j = 0; j < s.grid.height(); ++j)
    for (int i = 0; i < s.grid.width(); ++i)
      if (s.grid.occupied({i, j})) occ.push_back({i, j});
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : s.boxes)
    boxes.push_back({{"position", {b.position.x(), b.position.y(), b.position.z()}},
                     {"yaw", b.yaw},
                     {"width", b.width},
                     {"weight", b.weight},
                     {"stack_index", b.stack_index}});
  nlohmann::json plats = nlohmann::json::array();
  for (const auto& p : s.platforms)
    plats.push_back({{"position", {p.position.x(), p.position.y()}},
                     {"height", p.height},
                     {"footprint", {p.footprint.x(), p.footprint.y()}}});
  return {{"grid",
           {{"cell_size", s.grid.cell_size()},
            {"width", s.grid.width()},
            {"height", s.grid.height()},
            {"occupied", occ}}},
          {"boxes", boxes},
          {"platforms", plats},
          {"start", {{"x", s.start.position.x()}, {"y", s.start.position.y()}, {"heading", s.start.heading}}}};
}

inline Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScene("cannot open scene file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScene(std::string("scene JSON: ") + e.what());
  }
  return scene_from_json(j);
}

}  // namespace locoplan
