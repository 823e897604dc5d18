#pragma once

// Eight-joint toy skeleton shared by the motion generator and the tracker.
// Every joint is a hinge about a fixed local axis.

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "locoplan/geometry.hpp"

namespace locoplan::skeleton {

enum Joint : int { Torso, Neck, LShoulder, LElbow, RShoulder, RElbow, LHip, RHip, kCount };

inline constexpr std::array<std::string_view, kCount> kNames = {
    "torso", "neck", "l_shoulder", "l_elbow", "r_shoulder", "r_elbow", "l_hip", "r_hip"};

inline Vec3 axis(int joint) { return joint == Neck ? Vec3::UnitZ() : Vec3::UnitY(); }

inline Quat joint_rotation(int joint, double angle) { return Quat(Eigen::AngleAxisd(angle, axis(joint))); }

/// Hinge angle of a rotation about the joint's axis (the twist component).
inline double joint_angle(int joint, const Quat& q) {
  const Quat c = canonical(q);
  const double s = c.vec().dot(axis(joint));
  return 2.0 * std::atan2(s, c.w());
}

inline constexpr double kPelvisHeight = 0.92;
inline constexpr double kShoulderHeight = 0.45;  // above the pelvis
inline constexpr double kShoulderHalfWidth = 0.2;
inline constexpr double kUpperArm = 0.3;
inline constexpr double kForearm = 0.28;

inline constexpr double kHoldReach = 0.45;  // hands ahead of the root while holding a box

/// Hand position in the root's heading frame for a planar two-link arm.
inline Vec3 hand_local(double shoulder, double elbow, bool left) {
  const Vec3 base(0.0, left ? kShoulderHalfWidth : -kShoulderHalfWidth, kShoulderHeight);
  const Vec3 d1(std::sin(shoulder), 0.0, -std::cos(shoulder));
  const Vec3 d2(std::sin(shoulder + elbow), 0.0, -std::cos(shoulder + elbow));
  return base + kUpperArm * d1 + kForearm * d2;
}

/// Shoulder and elbow angles placing the hand `forward` ahead of and `up`
/// above the shoulder. Targets beyond reach are pulled in to 99% of it.
inline std::pair<double, double> arm_ik(double forward, double up) {
  double r = std::hypot(forward, up);
  const double reach = 0.99 * (kUpperArm + kForearm);
  const double shrink = r > reach ? reach / r : 1.0;
  forward *= shrink;
  up *= shrink;
  r = std::min(r, reach);
  const double c = (r * r - kUpperArm * kUpperArm - kForearm * kForearm) / (2.0 * kUpperArm * kForearm);
  const double elbow = std::acos(std::clamp(c, -1.0, 1.0));
  const double shoulder =
      std::atan2(forward, -up) - std::atan2(kForearm * std::sin(elbow), kUpperArm + kForearm * std::cos(elbow));
  return {shoulder, elbow};
}

/// World hand anchors from root pose and arm joint angles.
inline std::pair<Vec3, Vec3> hand_anchors(const Vec3& root_pos, double root_heading,
                                          const std::array<double, kCount>& angles) {
  const Frame2D f(Vec3(root_pos.x(), root_pos.y(), root_pos.z()), root_heading);
  return {from_local_point(f, hand_local(angles[LShoulder], angles[LElbow], true)),
          from_local_point(f, hand_local(angles[RShoulder], angles[RElbow], false))};
}

/// Walking pose at gait `phase` for a given speed (m/s) and turn rate (rad/s).
inline std::array<double, kCount> gait_pose(double phase, double speed, double turn_rate) {
  const double a = std::min(std::abs(speed) / 1.4, 1.0);
  const double s = std::sin(phase);
  std::array<double, kCount> q{};
  q[Torso] = 0.08 * a;
  q[Neck] = 0.25 * std::clamp(turn_rate, -1.0, 1.0);
  q[LShoulder] = 0.45 * a * s;
  q[RShoulder] = -0.45 * a * s;
  q[LElbow] = 0.25 + 0.2 * a * (0.5 + 0.5 * s);
  q[RElbow] = 0.25 + 0.2 * a * (0.5 - 0.5 * s);
  q[LHip] = -0.5 * a * s;
  q[RHip] = 0.5 * a * s;
  return q;
}

inline double gait_frequency(double speed) { return 0.9 + 0.5 * std::abs(speed); }

inline double pelvis_height(double phase, double speed) {
  const double a = std::min(std::abs(speed) / 1.4, 1.0);
  return kPelvisHeight + 0.015 * a * std::cos(2.0 * phase);
}

}  // namespace locoplan::skeleton
