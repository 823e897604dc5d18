#pragma once

// High-level sequencing: turns box moves into a primitive path whose
// locomotion segments carry waypoints sampled from smoothed A* paths.

#include <optional>
#include <string>
#include <vector>

#include "locoplan/planner.hpp"
#include "locoplan/primitive_graph.hpp"
#include "locoplan/spline.hpp"

namespace locoplan {

struct BoxMove {
  std::size_t box_id = 0;
  Vec3 target = Vec3::Zero();  // base of the box after placement; z = support height
  double target_yaw = 0.0;
};

struct Segment {
  Primitive primitive = Primitive::WalkOnly;
  std::size_t box_id = 0;
  // Locomotion segments
  PlanResult lattice_path;
  SmoothedPath path;
  std::vector<Waypoint> waypoints;
  Frame2D start;
  // Manipulation segments
  Vec2 platform_position = Vec2::Zero();
  double platform_height = 0.0;
};

struct TaskPlan {
  std::vector<Primitive> primitives;
  std::vector<Segment> segments;
  double total_cost_seconds() const {
    double c = 0.0;
    for (const auto& s : segments) c += s.lattice_path.cost_seconds();
    return c;
  }
};

struct TaskPlannerConfig {
  LatticeConfig lattice;
  double v_max = 1.4;
  double a_max = 1.0;
  double waypoint_spacing = kWaypointSpacing;
  double reach_clearance = 0.35;  // gap between the character's cell center and the support edge
  int stand_frames = 45;          // standing frames inserted at primitive boundaries
};

namespace detail {

struct Approach {
  PlannerGoal goal;
  Frame2D pose;
};

// Candidate stances around a location, nearest heading to `preferred_yaw` first.
inline std::vector<Approach> approach_candidates(const OccupancyGrid& blocked, const Vec2& location,
                                                 double preferred_yaw, double half_extent,
                                                 double clearance) {
  std::vector<Approach> out;
  const int first = nearest_heading_bin(preferred_yaw);
  for (int k = 0; k < 8; ++k) {
    const int offset = (k + 1) / 2 * (k % 2 == 1 ? 1 : -1);
    const int bin = ((first + offset) % 8 + 8) % 8;
    const double yaw = heading_bin_angle(bin);
    const Vec2 dir(std::cos(yaw), std::sin(yaw));
    const double reach = half_extent * (std::abs(dir.x()) + std::abs(dir.y())) + clearance;
    const Vec2 stand = location - reach * dir;
    if (!blocked.contains(stand)) continue;
    const Cell c = blocked.cell_at(stand);
    if (!blocked.in_bounds(c) || blocked.occupied(c)) continue;
    out.push_back({{c, bin}, Frame2D(Vec3(stand.x(), stand.y(), 0.0), yaw)});
  }
  return out;
}

inline double support_half_extent(const Scene& scene, const Vec2& location, double box_width) {
  double half = 0.5 * box_width;
  for (const auto& p : scene.platforms) {
    const Vec2 d = (location - p.position).cwiseAbs();
    if (d.x() <= 0.5 * p.footprint.x() && d.y() <= 0.5 * p.footprint.y())
      half = std::max(half, 0.5 * p.footprint.maxCoeff());
  }
  return half;
}

}  // namespace detail

/// Walks from `from` to a stance facing `location`. Throws NoPath naming `label`.
inline Segment plan_locomotion(const OccupancyGrid& blocked, const Frame2D& from,
                               const Vec2& location, double preferred_yaw, double half_extent,
                               Primitive kind, const TaskPlannerConfig& cfg, const std::string& label) {
  const Lattice lattice(blocked, cfg.lattice);
  const PlannerState start{blocked.cell_at(from.position.head<2>()), nearest_heading_bin(from.heading), 0};
  if (!lattice.valid(start)) throw NoPath(label + ": start cell is blocked");
  for (const auto& cand : detail::approach_candidates(blocked, location, preferred_yaw, half_extent,
                                                      cfg.reach_clearance)) {
    try {
      Segment seg;
      seg.primitive = kind;
      seg.lattice_path = plan_astar(lattice, start, cand.goal);
      seg.path = smooth_spline(blocked, seg.lattice_path.states, cfg.v_max, cfg.a_max);
      const Vec2 p0 = seg.path.knots().front().position;
      seg.start = Frame2D(Vec3(p0.x(), p0.y(), 0.0), from.heading);
      // Stretch so the path ends exactly on a waypoint sample.
      const double d = seg.path.duration();
      const double rounded = std::max(1.0, std::ceil(d / cfg.waypoint_spacing - 1e-9)) * cfg.waypoint_spacing;
      if (d > 0.0 && rounded > d) seg.path = seg.path.time_scaled(rounded / d);
      seg.waypoints = sample_waypoints(seg.path, cfg.waypoint_spacing);
      return seg;
    } catch (const NoPath&) {
    }
  }
  throw NoPath(label + ": no reachable stance near (" + std::to_string(location.x()) + ", " +
               std::to_string(location.y()) + ")");
}

/// Sequences pick/carry/place cycles for each move. Throws InvalidMove for
/// bad targets and NoPath (naming the segment) when a walk cannot be planned.
inline TaskPlan plan_task(const Scene& scene, const std::vector<BoxMove>& moves,
                          const TaskPlannerConfig& cfg = {}) {
  TaskPlan plan;
  if (moves.empty()) return plan;

  Scene world = scene;
  Frame2D at = scene.start;
  for (std::size_t m = 0; m < moves.size(); ++m) {
    const BoxMove& mv = moves[m];
    if (mv.box_id >= world.boxes.size())
      throw InvalidMove("move " + std::to_string(m) + ": unknown box " + std::to_string(mv.box_id));
    const Vec2 target = mv.target.head<2>();
    if (!world.grid.contains(target) || world.grid.occupied(world.grid.cell_at(target)))
      throw InvalidMove("move " + std::to_string(m) + ": target collides with an obstacle");
    BoxSpec& box = world.boxes[mv.box_id];
    const Vec2 source = box.position.head<2>();
    const std::string tag = "move " + std::to_string(m);

    const OccupancyGrid with_box = world.occupancy().inflated(cfg.lattice.inflation_radius);
    Segment walk = plan_locomotion(with_box, at, source, box.yaw,
                                   detail::support_half_extent(world, source, box.width),
                                   Primitive::WalkOnly, cfg, tag + " walk_only");
    walk.box_id = mv.box_id;
    at = Frame2D(Vec3(walk.path.knots().back().position.x(), walk.path.knots().back().position.y(), 0.0),
                 walk.path.knots().back().heading);

    Segment pick;
    pick.primitive = Primitive::PickUp;
    pick.box_id = mv.box_id;
    pick.start = at;
    pick.platform_position = source;
    pick.platform_height = box.position.z();

    const OccupancyGrid without_box = world.occupancy(mv.box_id).inflated(cfg.lattice.inflation_radius);
    Segment carry = plan_locomotion(without_box, at, target, mv.target_yaw,
                                    detail::support_half_extent(world, target, box.width),
                                    Primitive::WalkAndCarry, cfg, tag + " walk_and_carry");
    carry.box_id = mv.box_id;
    at = Frame2D(Vec3(carry.path.knots().back().position.x(), carry.path.knots().back().position.y(), 0.0),
                 carry.path.knots().back().heading);

    Segment put;
    put.primitive = Primitive::PutDown;
    put.box_id = mv.box_id;
    put.start = at;
    put.platform_position = target;
    put.platform_height = mv.target.z();

    box.position = mv.target;
    box.yaw = mv.target_yaw;

    for (Segment* s : {&walk, &pick, &carry, &put}) {
      plan.primitives.push_back(s->primitive);
      plan.segments.push_back(std::move(*s));
    }
  }
  return plan;
}

}  // namespace locoplan
