#pragma once

// Rotation representations and planar frame transforms shared by every
// other module. Angles are radians, lengths meters.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "locoplan/error.hpp"

namespace locoplan {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline Mat3 rot_z(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

/// Heading of a rotation: yaw of its forward (x) axis projected onto the ground.
inline double heading_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

/// Quaternion with w >= 0 so that q and -q compare equal.
inline Quat canonical(Quat q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

/// Continuous 6D rotation encoding: the first two columns of a rotation matrix.
struct Rotation6D {
  Vec3 a1 = Vec3::UnitX();
  Vec3 a2 = Vec3::UnitY();

  static Rotation6D from_matrix(const Mat3& r) { return {r.col(0), r.col(1)}; }
  static Rotation6D from_yaw(double yaw) { return from_matrix(rot_z(yaw)); }
};

/// Gram-Schmidt decode of a 6D rotation. Throws DegenerateInput when the
/// columns are (nearly) parallel or the first column vanishes.
inline Mat3 decode6d(const Rotation6D& r) {
  const double n1 = r.a1.norm();
  const double n2 = r.a2.norm();
  if (!(n1 > 1e-8) || !(n2 > 1e-8))
    throw DegenerateInput("decode6d: zero-length column");
  const double sin_angle = r.a1.cross(r.a2).norm() / (n1 * n2);
  if (!(sin_angle >= std::sin(1e-6)))
    throw DegenerateInput("decode6d: columns nearly parallel");
  const Vec3 b1 = r.a1 / n1;
  const Vec3 u2 = r.a2 - b1.dot(r.a2) * b1;
  const Vec3 b2 = u2.normalized();
  Mat3 m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b1.cross(b2);
  return m;
}

inline Rotation6D encode6d(const Mat3& r) { return Rotation6D::from_matrix(r); }

/// Axis-angle logarithm of a * b^-1, i.e. the rotation taking b to a.
/// Magnitude lies in [0, pi]. At (or within 1e-12 of) pi the axis is chosen so its
/// first nonzero component is positive.
inline Vec3 rot_diff(const Mat3& a, const Mat3& b) {
  const Quat q = canonical(Quat(Mat3(a * b.transpose())));
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q.w());
  Vec3 axis = v / s;
  if (q.w() < 1e-12) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-9) {
        if (axis[i] < 0.0) axis = -axis;
        break;
      }
    }
  }
  return axis * angle;
}

inline Vec3 rot_diff(const Quat& a, const Quat& b) {
  return rot_diff(a.toRotationMatrix(), b.toRotationMatrix());
}

/// A planar frame: ground position plus heading about the vertical axis.
struct Frame2D {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;

  Frame2D() = default;
  Frame2D(Vec3 p, double h) : position(std::move(p)), heading(wrap_angle(h)) {}

  Mat3 rotation() const { return rot_z(heading); }

  /// World pose of `local` when `local` is expressed in this frame.
  Frame2D compose(const Frame2D& local) const {
    return {position + rotation() * local.position, heading + local.heading};
  }

  /// This frame's inverse, so that f.compose(f.inverse()) is the identity.
  Frame2D inverse() const {
    return {-(rot_z(-heading) * position), -heading};
  }

  /// `world` re-expressed relative to this frame.
  Frame2D relative(const Frame2D& world) const { return inverse().compose(world); }
};

struct LocalPose {
  Vec3 position;
  Mat3 rotation;
};

inline LocalPose to_local(const Frame2D& frame, const Vec3& world_point, const Mat3& world_rot) {
  const Mat3 inv = rot_z(-frame.heading);
  return {inv * (world_point - frame.position), inv * world_rot};
}

inline LocalPose from_local(const Frame2D& frame, const Vec3& local_point, const Mat3& local_rot) {
  const Mat3 r = frame.rotation();
  return {frame.position + r * local_point, r * local_rot};
}

inline Vec3 to_local_point(const Frame2D& frame, const Vec3& p) {
  return rot_z(-frame.heading) * (p - frame.position);
}

inline Vec3 from_local_point(const Frame2D& frame, const Vec3& p) {
  return frame.position + frame.rotation() * p;
}

/// Ground frame under a root pose: xy of the position, heading of the rotation.
inline Frame2D ground_frame(const Vec3& position, const Mat3& rotation) {
  return {Vec3(position.x(), position.y(), 0.0), heading_of(rotation)};
}

}  // namespace locoplan
