#pragma once

// Procedural locomotion data: straight walks, constant-curvature turns and
// stop/start speed ramps, with a sinusoidal gait on the toy skeleton.
//
// Every window starts at the identity ground frame. A window's random
// parameters come from one mt19937_64 stream seeded by DatasetConfig::seed,
// drawn in window order, so the dataset is a pure function of its config.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "locoplan/motion.hpp"
#include "locoplan/skeleton.hpp"

namespace locoplan {

struct WalkProfile {
  double start_speed = 0.8;  // m/s
  double end_speed = 0.8;
  double curvature = 0.0;  // rad/m
  double phase = 0.0;      // gait phase at t = 0
};

/// Root and joints at `frames` samples t = (i+1)/rate following `start`.
/// Speed ramps linearly from start_speed to end_speed over the samples.
inline GlobalTrajectory walk_trajectory(const WalkProfile& p, int frames, const Frame2D& start = {},
                                        double rate = kFrameRate) {
  GlobalTrajectory out;
  out.frame_rate = rate;
  out.frames.reserve(frames);
  const double total = frames / rate;
  constexpr int kSub = 16;
  Vec2 pos = start.position.head<2>();
  double heading = start.heading;
  double phase = p.phase;
  double t = 0.0;
  auto speed_at = [&](double time) {
    return total > 0.0 ? p.start_speed + (p.end_speed - p.start_speed) * std::min(time / total, 1.0)
                       : p.start_speed;
  };
  for (int i = 0; i < frames; ++i) {
    const double dt = 1.0 / rate / kSub;
    for (int k = 0; k < kSub; ++k) {
      const double vm = speed_at(t + 0.5 * dt);
      const double hm = heading + 0.5 * dt * p.curvature * vm;
      pos += dt * vm * Vec2(std::cos(hm), std::sin(hm));
      heading += dt * p.curvature * vm;
      phase += dt * 2.0 * kPi * skeleton::gait_frequency(vm);
      t += dt;
    }
    const double v = speed_at(t);
    TrajectoryFrame f;
    f.root_pos = Vec3(pos.x(), pos.y(), skeleton::pelvis_height(phase, v));
    f.root_rot = canonical(Quat(rot_z(heading)));
    const auto q = skeleton::gait_pose(phase, v, p.curvature * v);
    for (int j = 0; j < skeleton::kCount; ++j) f.joints.push_back(canonical(skeleton::joint_rotation(j, q[j])));
    out.frames.push_back(std::move(f));
  }
  return out;
}

/// Condition whose waypoints are the ground poses at frames N-1 and 2N-1.
inline WaypointCondition condition_from_trajectory(const GlobalTrajectory& window, const Frame2D& start,
                                                   int half = kHalfWindow) {
  return WaypointCondition::from_world(start, window.frames[half - 1].ground(),
                                       window.frames[2 * half - 1].ground());
}

struct DatasetConfig {
  int windows = 4096;
  std::uint64_t seed = 1;
  int half = kHalfWindow;
  double max_speed = 1.4;
  double max_curvature = 1.2;
  double stop_probability = 0.15;
  double straight_probability = 0.3;
};

struct Dataset {
  MotionLayout layout;
  Eigen::MatrixXd windows;     // window_dim x count
  Eigen::MatrixXd conditions;  // 18 x count

  Eigen::Index size() const { return windows.cols(); }
};

inline WalkProfile random_profile(std::mt19937_64& rng, const DatasetConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WalkProfile p;
  p.start_speed = cfg.max_speed * unit(rng);
  p.end_speed = cfg.max_speed * unit(rng);
  const double u_stop = unit(rng);
  if (u_stop < 0.5 * cfg.stop_probability) p.start_speed = 0.0;
  else if (u_stop < cfg.stop_probability) p.end_speed = 0.0;
  p.curvature = unit(rng) < cfg.straight_probability ? 0.0 : cfg.max_curvature * (2.0 * unit(rng) - 1.0);
  p.phase = 2.0 * kPi * unit(rng);
  return p;
}

inline Dataset synthesize_dataset(const DatasetConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  Dataset d;
  d.layout = {cfg.half, skeleton::kCount};
  d.windows.resize(d.layout.window_dim(), cfg.windows);
  d.conditions.resize(kConditionDim, cfg.windows);
  for (int k = 0; k < cfg.windows; ++k) {
    const WalkProfile p = random_profile(rng, cfg);
    const GlobalTrajectory traj = walk_trajectory(p, 2 * cfg.half);
    const WaypointCondition c = condition_from_trajectory(traj, {}, cfg.half);
    d.windows.col(k) = encode_window(traj, {}, c, cfg.half).flatten();
    d.conditions.col(k) = c.to_vector();
  }
  return d;
}

}  // namespace locoplan
