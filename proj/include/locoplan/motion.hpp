#pragma once

// Window-level motion representation. Each window holds 2N frames; the
// root is stored twice per frame, once relative to the window's ego anchor
// (the start pose, then the pose reached at frame N-1) and once relative to
// the next waypoint (c1 for the first half, c2 for the second).

#include <Eigen/Core>

#include <span>
#include <vector>

#include "locoplan/error.hpp"
#include "locoplan/geometry.hpp"

namespace locoplan {

inline constexpr int kHalfWindow = 15;
inline constexpr double kFrameRate = 30.0;
inline constexpr int kToyJoints = 8;
inline constexpr int kConditionDim = 18;

struct MotionLayout {
  int half = kHalfWindow;
  int joints = kToyJoints;

  int frame_dim() const { return 18 + 6 * joints; }
  int frames() const { return 2 * half; }
  int window_dim() const { return frames() * frame_dim(); }
  friend bool operator==(const MotionLayout&, const MotionLayout&) = default;
};

struct PoseFrame {
  Vec3 ego_pos = Vec3::Zero();
  Rotation6D ego_dir;
  Vec3 goal_pos = Vec3::Zero();
  Rotation6D goal_dir;
  std::vector<Rotation6D> joints;

  int dim() const { return 18 + 6 * static_cast<int>(joints.size()); }

  void flatten(std::span<double> out) const {
    if (static_cast<int>(out.size()) != dim()) throw ShapeMismatch("PoseFrame::flatten: size");
    std::size_t k = 0;
    auto put = [&](const Vec3& v) {
      for (int i = 0; i < 3; ++i) out[k++] = v[i];
    };
    put(ego_pos);
    put(ego_dir.a1);
    put(ego_dir.a2);
    put(goal_pos);
    put(goal_dir.a1);
    put(goal_dir.a2);
    for (const auto& j : joints) {
      put(j.a1);
      put(j.a2);
    }
  }

  static PoseFrame unflatten(std::span<const double> in, int joint_count) {
    if (static_cast<int>(in.size()) != 18 + 6 * joint_count)
      throw ShapeMismatch("PoseFrame::unflatten: size");
    std::size_t k = 0;
    auto get = [&]() {
      Vec3 v(in[k], in[k + 1], in[k + 2]);
      k += 3;
      return v;
    };
    PoseFrame f;
    f.ego_pos = get();
    f.ego_dir.a1 = get();
    f.ego_dir.a2 = get();
    f.goal_pos = get();
    f.goal_dir.a1 = get();
    f.goal_dir.a2 = get();
    f.joints.resize(joint_count);
    for (auto& j : f.joints) {
      j.a1 = get();
      j.a2 = get();
    }
    return f;
  }
};

struct MotionWindow {
  std::vector<PoseFrame> frames;
  double frame_rate = kFrameRate;

  int half() const { return static_cast<int>(frames.size()) / 2; }
  int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames.front().joints.size()); }
  MotionLayout layout() const { return {half(), joint_count()}; }

  Eigen::VectorXd flatten() const {
    const MotionLayout l = layout();
    Eigen::VectorXd v(l.window_dim());
    for (int i = 0; i < l.frames(); ++i)
      frames[i].flatten(std::span<double>(v.data() + i * l.frame_dim(), l.frame_dim()));
    return v;
  }

  static MotionWindow unflatten(const Eigen::VectorXd& v, const MotionLayout& l) {
    if (v.size() != l.window_dim()) throw ShapeMismatch("MotionWindow::unflatten: size");
    MotionWindow w;
    w.frames.reserve(l.frames());
    for (int i = 0; i < l.frames(); ++i)
      w.frames.push_back(PoseFrame::unflatten(
          std::span<const double>(v.data() + i * l.frame_dim(), l.frame_dim()), l.joints));
    return w;
  }
};

/// Two target root poses relative to the window's start frame.
struct WaypointCondition {
  Vec3 c1_pos = Vec3::Zero();
  Vec3 c2_pos = Vec3::Zero();
  Rotation6D c1_dir;
  Rotation6D c2_dir;

  Frame2D c1_frame() const { return {c1_pos, heading_of(decode6d(c1_dir))}; }
  Frame2D c2_frame() const { return {c2_pos, heading_of(decode6d(c2_dir))}; }

  /// Relative to `start`, from two world waypoints.
  static WaypointCondition from_world(const Frame2D& start, const Frame2D& w1, const Frame2D& w2) {
    const Frame2D r1 = start.relative(w1);
    const Frame2D r2 = start.relative(w2);
    return {r1.position, r2.position, Rotation6D::from_yaw(r1.heading), Rotation6D::from_yaw(r2.heading)};
  }

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd v(kConditionDim);
    v << c1_pos, c2_pos, c1_dir.a1, c1_dir.a2, c2_dir.a1, c2_dir.a2;
    return v;
  }

  static WaypointCondition from_vector(const Eigen::VectorXd& v) {
    if (v.size() != kConditionDim) throw ShapeMismatch("WaypointCondition: expected 18 values");
    WaypointCondition c;
    c.c1_pos = v.segment<3>(0);
    c.c2_pos = v.segment<3>(3);
    c.c1_dir = {v.segment<3>(6), v.segment<3>(9)};
    c.c2_dir = {v.segment<3>(12), v.segment<3>(15)};
    return c;
  }
};

struct TrajectoryFrame {
  Vec3 root_pos = Vec3::Zero();
  Quat root_rot = Quat::Identity();
  std::vector<Quat> joints;

  Frame2D ground() const { return ground_frame(root_pos, root_rot.toRotationMatrix()); }
};

/// World-space root and joint rotations sampled at a fixed rate.
struct GlobalTrajectory {
  std::vector<TrajectoryFrame> frames;
  double frame_rate = kFrameRate;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  double duration() const { return frames.size() < 2 ? 0.0 : (frames.size() - 1) / frame_rate; }

  bool finite() const {
    for (const auto& f : frames) {
      if (!f.root_pos.allFinite() || !f.root_rot.coeffs().allFinite()) return false;
      for (const auto& q : f.joints)
        if (!q.coeffs().allFinite()) return false;
    }
    return true;
  }

  GlobalTrajectory slice(std::size_t first, std::size_t count) const {
    if (first + count > frames.size()) throw LengthMismatch("slice out of range");
    GlobalTrajectory out;
    out.frame_rate = frame_rate;
    out.frames.assign(frames.begin() + first, frames.begin() + first + count);
    return out;
  }
};

/// Rigid planar transform of a whole trajectory.
inline GlobalTrajectory transformed(const GlobalTrajectory& traj, const Frame2D& frame) {
  GlobalTrajectory out = traj;
  const Mat3 r = frame.rotation();
  for (auto& f : out.frames) {
    f.root_pos = frame.position + r * f.root_pos;
    f.root_rot = canonical(Quat(r * f.root_rot.toRotationMatrix()));
  }
  return out;
}

/// Holds the final pose for `count` more frames.
inline void append_standing(GlobalTrajectory& traj, int count) {
  if (traj.empty() || count <= 0) return;
  const TrajectoryFrame last = traj.frames.back();
  for (int i = 0; i < count; ++i) traj.frames.push_back(last);
}

struct EncodeTolerance {
  double position = 1e-3;
  double heading = 1e-3;
};

/// Encodes 2N world frames that follow the `start` pose into the dual-frame
/// representation. The waypoints of `c` must match the ground poses at
/// frames N-1 and 2N-1 within tolerance.
inline MotionWindow encode_window(const GlobalTrajectory& segment, const Frame2D& start,
                                  const WaypointCondition& c, int half = kHalfWindow,
                                  EncodeTolerance tol = {}) {
  if (static_cast<int>(segment.size()) != 2 * half)
    throw LengthMismatch("encode_window: expected " + std::to_string(2 * half) + " frames, got " +
                         std::to_string(segment.size()));
  const Frame2D c1 = start.compose(c.c1_frame());
  const Frame2D c2 = start.compose(c.c2_frame());
  auto check = [&](const Frame2D& want, const TrajectoryFrame& f, const char* which) {
    const Frame2D got = f.ground();
    if ((got.position - want.position).norm() > tol.position ||
        std::abs(wrap_angle(got.heading - want.heading)) > tol.heading)
      throw WaypointMismatch(std::string("encode_window: ") + which + " inconsistent with trajectory");
  };
  check(c1, segment.frames[half - 1], "c1");
  check(c2, segment.frames[2 * half - 1], "c2");

  const Frame2D mid = segment.frames[half - 1].ground();
  MotionWindow w;
  w.frame_rate = segment.frame_rate;
  w.frames.reserve(2 * half);
  for (int i = 0; i < 2 * half; ++i) {
    const TrajectoryFrame& f = segment.frames[i];
    const Mat3 r = f.root_rot.toRotationMatrix();
    const Frame2D& ego_anchor = i < half ? start : mid;
    const Frame2D& goal_anchor = i < half ? c1 : c2;
    PoseFrame p;
    const LocalPose e = to_local(ego_anchor, f.root_pos, r);
    const LocalPose g = to_local(goal_anchor, f.root_pos, r);
    p.ego_pos = e.position;
    p.ego_dir = encode6d(e.rotation);
    p.goal_pos = g.position;
    p.goal_dir = encode6d(g.rotation);
    p.joints.reserve(f.joints.size());
    for (const auto& q : f.joints) p.joints.push_back(encode6d(q.toRotationMatrix()));
    w.frames.push_back(std::move(p));
  }
  return w;
}

enum class RootDecode { Bidirectional, Egocentric, GoalCentric };

/// Blend weight of the egocentric estimate at frame i: 1 at the start of each
/// half, falling linearly to 0 at the half's last frame.
inline double blend_lambda(int frame, int half) {
  if (half <= 1) return 0.0;
  return 1.0 - static_cast<double>(frame % half) / (half - 1);
}

namespace detail {

inline Mat3 blend_rotations(const Mat3& a, const Mat3& b, double wa) {
  if (wa >= 1.0) return a;
  if (wa <= 0.0) return b;
  const Rotation6D r{wa * a.col(0) + (1 - wa) * b.col(0), wa * a.col(1) + (1 - wa) * b.col(1)};
  try {
    return decode6d(r);
  } catch (const DegenerateInput&) {
    return wa >= 0.5 ? a : b;
  }
}

}  // namespace detail

/// Decodes a window into world frames following `start`.
inline GlobalTrajectory decode_window(const MotionWindow& w, const WaypointCondition& c, RootDecode mode,
                                      const Frame2D& start = {}) {
  const int half = w.half();
  const Frame2D c1 = start.compose(c.c1_frame());
  const Frame2D c2 = start.compose(c.c2_frame());
  GlobalTrajectory out;
  out.frame_rate = w.frame_rate;
  out.frames.reserve(w.frames.size());
  Frame2D ego_anchor = start;
  for (int i = 0; i < 2 * half; ++i) {
    if (i == half) ego_anchor = out.frames[half - 1].ground();
    const PoseFrame& p = w.frames[i];
    const Frame2D& goal_anchor = i < half ? c1 : c2;
    double lambda = 0.0;
    switch (mode) {
      case RootDecode::Bidirectional: lambda = blend_lambda(i, half); break;
      case RootDecode::Egocentric: lambda = 1.0; break;
      case RootDecode::GoalCentric: lambda = 0.0; break;
    }
    TrajectoryFrame f;
    Vec3 pos = Vec3::Zero();
    Mat3 ego_rot = Mat3::Identity(), goal_rot = Mat3::Identity();
    if (lambda > 0.0) {
      const LocalPose e = from_local(ego_anchor, p.ego_pos, decode6d(p.ego_dir));
      pos += lambda * e.position;
      ego_rot = e.rotation;
    }
    if (lambda < 1.0) {
      const LocalPose g = from_local(goal_anchor, p.goal_pos, decode6d(p.goal_dir));
      pos += (1.0 - lambda) * g.position;
      goal_rot = g.rotation;
    }
    f.root_pos = pos;
    f.root_rot = canonical(Quat(detail::blend_rotations(ego_rot, goal_rot, lambda)));
    f.joints.reserve(p.joints.size());
    for (const auto& j : p.joints) f.joints.push_back(canonical(Quat(decode6d(j))));
    out.frames.push_back(std::move(f));
  }
  return out;
}

/// Lambda-weighted average of the egocentric and goal-centric root estimates.
inline GlobalTrajectory blend_bidirectional(const MotionWindow& w, const WaypointCondition& c,
                                            const Frame2D& start = {}) {
  return decode_window(w, c, RootDecode::Bidirectional, start);
}

/// A window's planned placement: its world start pose and its condition.
struct WindowPlan {
  Frame2D start;
  WaypointCondition condition;
};

/// Splits world waypoints (element 0 is the start pose) into consecutive,
/// non-overlapping windows that share boundary waypoints. An odd tail holds
/// the last waypoint for the final half window.
inline std::vector<WindowPlan> plan_windows(std::vector<Frame2D> waypoints) {
  if (waypoints.size() < 2) throw LengthMismatch("plan_windows: need a start and at least one waypoint");
  if ((waypoints.size() - 1) % 2 == 1) waypoints.push_back(waypoints.back());
  std::vector<WindowPlan> plans;
  for (std::size_t k = 0; k + 2 < waypoints.size(); k += 2) {
    plans.push_back({waypoints[k], WaypointCondition::from_world(waypoints[k], waypoints[k + 1], waypoints[k + 2])});
  }
  return plans;
}

struct StitchResult {
  GlobalTrajectory trajectory;
  std::vector<Frame2D> anchors;        // where each window was placed
  std::vector<double> boundary_gaps;   // anchor vs previous window's final ground pose
  std::vector<std::size_t> window_offsets;
};

/// Stitches windows into one trajectory. Each window k+1 must start at the
/// world pose of window k's c2 (within 1e-6); otherwise WaypointMismatch.
/// Windows are re-anchored rigidly at the previous window's final ground pose.
inline StitchResult stitch_windows(const std::vector<MotionWindow>& windows,
                                   const std::vector<WindowPlan>& plans,
                                   RootDecode mode = RootDecode::Bidirectional, double tol = 1e-6) {
  if (windows.size() != plans.size()) throw LengthMismatch("stitch_windows: windows/plans size differ");
  for (std::size_t k = 0; k + 1 < plans.size(); ++k) {
    const Frame2D expected = plans[k].start.compose(plans[k].condition.c2_frame());
    const Frame2D& got = plans[k + 1].start;
    if ((expected.position - got.position).norm() > tol ||
        std::abs(wrap_angle(expected.heading - got.heading)) > tol)
      throw WaypointMismatch("stitch_windows: window " + std::to_string(k + 1) +
                             " does not start at window " + std::to_string(k) + "'s second waypoint");
  }
  StitchResult r;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    Frame2D anchor = plans[k].start;
    double gap = 0.0;
    if (k > 0) {
      const Frame2D end = r.trajectory.frames.back().ground();
      anchor = end;
      gap = (anchor.position - end.position).norm();
    }
    const GlobalTrajectory local = decode_window(windows[k], plans[k].condition, mode);
    const GlobalTrajectory placed = transformed(local, anchor);
    r.window_offsets.push_back(r.trajectory.size());
    r.trajectory.frame_rate = placed.frame_rate;
    r.trajectory.frames.insert(r.trajectory.frames.end(), placed.frames.begin(), placed.frames.end());
    r.anchors.push_back(anchor);
    r.boundary_gaps.push_back(gap);
  }
  return r;
}

}  // namespace locoplan
