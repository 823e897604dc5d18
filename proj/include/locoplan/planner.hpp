#pragma once

// Kinodynamic A* over a (cell, heading, speed) state lattice.
//
// Each action changes at most one of heading or speed, then the character
// advances one cell along its (new) heading when moving. Costs are travel
// times quantized up to whole microseconds so that path costs compare exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "locoplan/error.hpp"
#include "locoplan/scene.hpp"

namespace locoplan {

struct PlannerState {
  Cell cell;
  int heading_bin = 0;
  int speed_bin = 0;
  friend bool operator==(const PlannerState&, const PlannerState&) = default;
};

struct PlannerGoal {
  Cell cell;
  int heading_bin = 0;
};

struct LatticeConfig {
  static constexpr int kHeadingBins = 8;
  std::array<double, 3> speeds = {0.0, 0.8, 1.4};  // m/s per speed bin
  double inflation_radius = 0.3;
  // Time charged for an action that ends stopped (turning in place, coming to rest).
  // Non-positive means cell_size / walking speed.
  double stationary_action_time = -1.0;

  int speed_bins() const { return static_cast<int>(speeds.size()); }
  double max_speed() const { return *std::max_element(speeds.begin(), speeds.end()); }
};

using CostTicks = std::int64_t;
inline constexpr double kTicksPerSecond = 1e6;

inline CostTicks seconds_to_ticks_ceil(double s) {
  return static_cast<CostTicks>(std::ceil(s * kTicksPerSecond - 1e-6));
}

/// Unit step for each heading bin; bin k points at angle k * pi / 4.
inline constexpr std::array<std::array<int, 2>, 8> kHeadingSteps = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

inline double heading_bin_angle(int bin) { return wrap_angle(bin * kPi / 4.0); }

inline int nearest_heading_bin(double angle) {
  const int b = static_cast<int>(std::lround(angle / (kPi / 4.0)));
  return ((b % 8) + 8) % 8;
}

struct Transition {
  PlannerState next;
  CostTicks cost;
};

/// The action set and collision rules of the lattice over a fixed blocked grid.
class Lattice {
 public:
  Lattice(OccupancyGrid blocked, LatticeConfig cfg) : blocked_(std::move(blocked)), cfg_(cfg) {
    const double cs = blocked_.cell_size();
    const double rest = cfg_.stationary_action_time > 0.0 ? cfg_.stationary_action_time
                                                          : cs / cfg_.speeds[1];
    rest_cost_ = seconds_to_ticks_ceil(rest);
    for (int s = 1; s < cfg_.speed_bins(); ++s) {
      straight_cost_[s] = seconds_to_ticks_ceil(cs / cfg_.speeds[s]);
      diagonal_cost_[s] = seconds_to_ticks_ceil(cs * std::sqrt(2.0) / cfg_.speeds[s]);
    }
  }

  const OccupancyGrid& blocked() const { return blocked_; }
  const LatticeConfig& config() const { return cfg_; }

  bool free(Cell c) const { return blocked_.in_bounds(c) && !blocked_.occupied(c); }

  bool valid(const PlannerState& s) const {
    return free(s.cell) && s.heading_bin >= 0 && s.heading_bin < LatticeConfig::kHeadingBins &&
           s.speed_bin >= 0 && s.speed_bin < cfg_.speed_bins();
  }

  /// Successors under {accelerate, decelerate, keep, turn left, turn right}.
  template <class Fn>
  void for_each_successor(const PlannerState& s, Fn&& fn) const {
    const int H = LatticeConfig::kHeadingBins;
    const std::array<std::array<int, 2>, 5> actions = {{{0, +1}, {0, -1}, {0, 0}, {+1, 0}, {-1, 0}}};
    for (const auto& [dh, ds] : actions) {
      const int speed = s.speed_bin + ds;
      if (speed < 0 || speed >= cfg_.speed_bins()) continue;
      const int heading = ((s.heading_bin + dh) % H + H) % H;
      if (speed == 0) {
        if (dh == 0 && ds == 0) continue;  // idling is never useful
        fn(Transition{{s.cell, heading, 0}, rest_cost_});
        continue;
      }
      const auto [di, dj] = kHeadingSteps[heading];
      const Cell n{s.cell.i + di, s.cell.j + dj};
      if (!free(n)) continue;
      const bool diagonal = di != 0 && dj != 0;
      if (diagonal && (!free({s.cell.i + di, s.cell.j}) || !free({s.cell.i, s.cell.j + dj})))
        continue;
      fn(Transition{{n, heading, speed}, diagonal ? diagonal_cost_[speed] : straight_cost_[speed]});
    }
  }

  /// Admissible and consistent lower bound on remaining time: straight-line distance at top speed.
  CostTicks heuristic(Cell from, Cell to) const {
    const double d = std::hypot(double(from.i - to.i), double(from.j - to.j)) * blocked_.cell_size();
    const double t = d / cfg_.max_speed() * kTicksPerSecond;
    return std::max<CostTicks>(0, static_cast<CostTicks>(std::floor(t)) - 1);
  }

  std::size_t index(const PlannerState& s) const {
    return ((static_cast<std::size_t>(s.cell.j) * blocked_.width() + s.cell.i) *
                LatticeConfig::kHeadingBins + s.heading_bin) * cfg_.speed_bins() + s.speed_bin;
  }
  std::size_t state_count() const {
    return static_cast<std::size_t>(blocked_.width()) * blocked_.height() *
           LatticeConfig::kHeadingBins * cfg_.speed_bins();
  }
  PlannerState state_at(std::size_t idx) const {
    PlannerState s;
    s.speed_bin = static_cast<int>(idx % cfg_.speed_bins());
    idx /= cfg_.speed_bins();
    s.heading_bin = static_cast<int>(idx % LatticeConfig::kHeadingBins);
    idx /= LatticeConfig::kHeadingBins;
    s.cell = {static_cast<int>(idx % blocked_.width()), static_cast<int>(idx / blocked_.width())};
    return s;
  }

 private:
  OccupancyGrid blocked_;
  LatticeConfig cfg_;
  CostTicks rest_cost_ = 0;
  std::array<CostTicks, 3> straight_cost_{};
  std::array<CostTicks, 3> diagonal_cost_{};
};

struct PlanResult {
  std::vector<PlannerState> states;
  CostTicks cost = 0;
  double cost_seconds() const { return static_cast<double>(cost) / kTicksPerSecond; }
};

/// Optimal path on the lattice from `start` to any speed at `goal`.
/// Throws NoPath when the goal cannot be reached.
inline PlanResult plan_astar(const Lattice& lattice, const PlannerState& start, const PlannerGoal& goal) {
  if (!lattice.valid(start)) throw NoPath("start state is blocked or out of range");
  if (!lattice.free(goal.cell)) throw NoPath("goal cell is blocked");

  constexpr CostTicks kInf = std::numeric_limits<CostTicks>::max();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<CostTicks> g(lattice.state_count(), kInf);
  std::vector<std::size_t> parent(lattice.state_count(), kNone);

  struct Entry {
    CostTicks f;
    CostTicks g;
    std::size_t idx;
    // Ties broken on larger g, then index, for a deterministic expansion order.
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;
      return idx > o.idx;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t s0 = lattice.index(start);
  g[s0] = 0;
  open.push({lattice.heuristic(start.cell, goal.cell), 0, s0});
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (e.g != g[e.idx]) continue;  // stale
    const PlannerState s = lattice.state_at(e.idx);
    if (s.cell == goal.cell && s.heading_bin == goal.heading_bin) {
      PlanResult r;
      r.cost = e.g;
      for (std::size_t k = e.idx; k != kNone; k = parent[k]) r.states.push_back(lattice.state_at(k));
      std::reverse(r.states.begin(), r.states.end());
      return r;
    }
    lattice.for_each_successor(s, [&](const Transition& t) {
      const std::size_t n = lattice.index(t.next);
      const CostTicks ng = e.g + t.cost;
      if (ng < g[n]) {
        g[n] = ng;
        parent[n] = e.idx;
        open.push({ng + lattice.heuristic(t.next.cell, goal.cell), ng, n});
      }
    });
  }
  throw NoPath("goal unreachable on the planning lattice");
}

/// Convenience overload building the lattice from a scene.
inline PlanResult plan_astar(const Scene& scene, const PlannerState& start, const PlannerGoal& goal,
                             const LatticeConfig& cfg = {}) {
  return plan_astar(Lattice(scene.occupancy().inflated(cfg.inflation_radius), cfg), start, goal);
}

}  // namespace locoplan
