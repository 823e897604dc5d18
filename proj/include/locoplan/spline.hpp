#pragma once

// Cubic Hermite smoothing of lattice paths with uniform time dilation, and
// waypoint sampling from the smoothed path.

#include <algorithm>
#include <cmath>
#include <vector>

#include "locoplan/geometry.hpp"
#include "locoplan/planner.hpp"

namespace locoplan {

struct Knot {
  double time = 0.0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
};

struct PathSample {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
};

/// Piecewise cubic Hermite curve in x and y. Tangents are velocities (m/s).
class SmoothedPath {
 public:
  SmoothedPath() = default;
  SmoothedPath(std::vector<Knot> knots, std::vector<Vec2> tangents, double v_max, double a_max)
      : knots_(std::move(knots)), tangents_(std::move(tangents)), v_max_(v_max), a_max_(a_max) {}

  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<Vec2>& tangents() const { return tangents_; }
  double v_max() const { return v_max_; }
  double a_max() const { return a_max_; }
  double duration() const { return knots_.empty() ? 0.0 : knots_.back().time - knots_.front().time; }
  double start_time() const { return knots_.front().time; }
  double end_time() const { return knots_.back().time; }

  PathSample evaluate(double t) const {
    t = std::clamp(t, start_time(), end_time());
    std::size_t k = segment(t);
    const Knot& k0 = knots_[k];
    const Knot& k1 = knots_[k + 1];
    const double h = k1.time - k0.time;
    const double u = (t - k0.time) / h;
    const double u2 = u * u, u3 = u2 * u;
    const Vec2& p0 = k0.position;
    const Vec2& p1 = k1.position;
    const Vec2 m0 = tangents_[k] * h;
    const Vec2 m1 = tangents_[k + 1] * h;
    PathSample s;
    s.position = (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
                 (u3 - u2) * m1;
    s.velocity = ((6 * u2 - 6 * u) * p0 + (3 * u2 - 4 * u + 1) * m0 + (-6 * u2 + 6 * u) * p1 +
                  (3 * u2 - 2 * u) * m1) / h;
    s.acceleration = ((12 * u - 6) * p0 + (6 * u - 4) * m0 + (-12 * u + 6) * p1 + (6 * u - 2) * m1) /
                     (h * h);
    return s;
  }

  Vec2 position(double t) const { return evaluate(t).position; }

  /// Direction of travel; falls back to the nearest knot's heading while
  /// stationary, and the final knot heading at the end of the path.
  double heading(double t) const {
    if (t >= end_time() - 1e-12) return knots_.back().heading;
    const PathSample s = evaluate(t);
    if (s.velocity.norm() > 1e-9) return std::atan2(s.velocity.y(), s.velocity.x());
    const std::size_t k = segment(t);
    const bool first = (t - knots_[k].time) <= (knots_[k + 1].time - t);
    return first ? knots_[k].heading : knots_[k + 1].heading;
  }

  /// Same geometry traversed `factor` times slower.
  SmoothedPath time_scaled(double factor) const {
    SmoothedPath out = *this;
    const double t0 = start_time();
    for (auto& k : out.knots_) k.time = t0 + (k.time - t0) * factor;
    for (auto& m : out.tangents_) m /= factor;
    return out;
  }

  /// Peak speed and acceleration over samples at `rate` Hz (endpoints included).
  std::pair<double, double> sampled_peaks(double rate) const {
    double vmax = 0.0, amax = 0.0;
    const auto n = static_cast<long>(std::floor(duration() * rate + 1e-9));
    for (long i = 0; i <= n + 1; ++i) {
      const double t = std::min(start_time() + i / rate, end_time());
      const PathSample s = evaluate(t);
      vmax = std::max(vmax, s.velocity.norm());
      amax = std::max(amax, s.acceleration.norm());
    }
    return {vmax, amax};
  }

 private:
  std::size_t segment(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                               [](double v, const Knot& k) { return v < k.time; });
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return std::min(k, knots_.size() - 2);
  }

  std::vector<Knot> knots_;
  std::vector<Vec2> tangents_;
  double v_max_ = 1.4;
  double a_max_ = 1.0;
};

inline constexpr double kSplineCheckRate = 120.0;

/// Fits a C1 cubic Hermite through knot positions with finite-difference
/// tangents, then dilates time uniformly until the speed and acceleration
/// bounds hold at every 120 Hz sample.
inline SmoothedPath smooth_spline(const std::vector<Knot>& raw, double v_max = 1.4, double a_max = 1.0) {
  // Drop repeated positions (turning in place) but keep the latest heading.
  std::vector<Knot> knots;
  for (const auto& k : raw) {
    if (!knots.empty() && (knots.back().position - k.position).norm() < 1e-12) {
      knots.back().heading = k.heading;
      continue;
    }
    knots.push_back(k);
  }
  if (knots.size() == 1) {  // nothing to traverse: a stationary one-second path
    Knot end = knots.front();
    knots.push_back(end);
    knots.back().time = knots.front().time + 1.0;
    knots.front().time = 0.0;
    knots.back().time = 1.0;
    return SmoothedPath(knots, std::vector<Vec2>(2, Vec2::Zero()), v_max, a_max);
  }
  // Chord-length times at top speed.
  knots.front().time = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i)
    knots[i].time = knots[i - 1].time + (knots[i].position - knots[i - 1].position).norm() / v_max;

  const std::size_t n = knots.size();
  std::vector<Vec2> tangents(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    tangents[i] = (knots[b].position - knots[a].position) / (knots[b].time - knots[a].time);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec2& v = tangents[i];
    if (i > 0 && v.norm() > 1e-9) knots[i].heading = std::atan2(v.y(), v.x());
  }
  if (tangents.front().norm() > 1e-9)
    knots.front().heading = std::atan2(tangents.front().y(), tangents.front().x());

  SmoothedPath path(knots, tangents, v_max, a_max);

  // Acceleration is linear per segment, so its peak norm sits at a segment end;
  // speed is sampled densely. The loop then verifies on the 120 Hz grid.
  double vpeak = 0.0, apeak = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double t0 = knots[i].time, t1 = knots[i + 1].time;
    for (int s = 0; s <= 64; ++s) {
      const PathSample p = path.evaluate(t0 + (t1 - t0) * s / 64.0);
      vpeak = std::max(vpeak, p.velocity.norm());
    }
    apeak = std::max({apeak, path.evaluate(t0).acceleration.norm(),
                      path.evaluate(std::nextafter(t1, t0)).acceleration.norm()});
  }
  double factor = std::max({1.0, vpeak / v_max, std::sqrt(apeak / a_max)}) * (1.0 + 1e-9);
  SmoothedPath out = path.time_scaled(factor);
  for (int iter = 0; iter < 100; ++iter) {
    const auto [v, a] = out.sampled_peaks(kSplineCheckRate);
    if (v <= v_max && a <= a_max) break;
    factor *= std::max({1.001, v / v_max, std::sqrt(a / a_max)});
    out = path.time_scaled(factor);
  }
  return out;
}

/// Knots at lattice cell centers, headings from the lattice bins.
inline std::vector<Knot> lattice_knots(const OccupancyGrid& grid, const std::vector<PlannerState>& states) {
  std::vector<Knot> knots;
  knots.reserve(states.size());
  for (const auto& s : states) knots.push_back({0.0, grid.center(s.cell), heading_bin_angle(s.heading_bin)});
  return knots;
}

inline SmoothedPath smooth_spline(const OccupancyGrid& grid, const std::vector<PlannerState>& states,
                                  double v_max = 1.4, double a_max = 1.0) {
  return smooth_spline(lattice_knots(grid, states), v_max, a_max);
}

/// Waypoint for the generator: ground position and yaw-only direction.
struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  Rotation6D direction;

  double heading() const { return heading_of(decode6d(direction)); }
  Frame2D frame() const { return {position, heading()}; }
};

inline constexpr double kWaypointSpacing = 0.5;

/// Waypoints at spacing, 2*spacing, ... up to the path duration.
inline std::vector<Waypoint> sample_waypoints(const SmoothedPath& path, double spacing_s = kWaypointSpacing) {
  std::vector<Waypoint> out;
  const auto count = static_cast<long>(std::floor(path.duration() / spacing_s + 1e-9));
  for (long k = 1; k <= count; ++k) {
    const double t = std::min(path.start_time() + k * spacing_s, path.end_time());
    const Vec2 p = path.position(t);
    out.push_back({t - path.start_time(), Vec3(p.x(), p.y(), 0.0), Rotation6D::from_yaw(path.heading(t))});
  }
  return out;
}

}  // namespace locoplan
