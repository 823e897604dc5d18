#pragma once

// Toy physics tracker: a planar point-mass root with yaw, hinge joints driven
// by PD torques plus a residual correction tau_a, and boxes held by a
// spring-damper to the hand anchors. The loop runs the reference at 30 Hz,
// the controller at 60 Hz and the integrator at 120 Hz.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <tuple>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "locoplan/error.hpp"
#include "locoplan/geometry.hpp"
#include "locoplan/motion.hpp"
#include "locoplan/rewards.hpp"
#include "locoplan/skeleton.hpp"

namespace locoplan {

inline constexpr int kJoints = skeleton::kCount;
inline constexpr int kActionDim = 3 * kJoints;
inline constexpr double kMaxJointSpeed = 1e3;  // rad/s; faster counts as a blow-up

struct ToyState {
  Vec3 root_pos = Vec3(0, 0, skeleton::kPelvisHeight);
  double heading = 0.0;
  Vec3 root_vel = Vec3::Zero();
  double yaw_rate = 0.0;
  std::array<double, kJoints> q{};
  std::array<double, kJoints> qdot{};
  std::vector<BoxState> boxes;
  bool grasp = false;

  Quat root_rotation() const { return Quat(rot_z(heading)); }
  Quat joint_quat(int j) const { return skeleton::joint_rotation(j, q[j]); }
  Vec3 joint_velocity(int j) const { return qdot[j] * skeleton::axis(j); }
  std::pair<Vec3, Vec3> hands() const { return skeleton::hand_anchors(root_pos, heading, q); }

  TrajectoryFrame pose() const {
    TrajectoryFrame f;
    f.root_pos = root_pos;
    f.root_rot = canonical(root_rotation());
    for (int j = 0; j < kJoints; ++j) f.joints.push_back(canonical(joint_quat(j)));
    return f;
  }

  CarryView carry_view() const {
    const auto [l, r] = hands();
    return {l, r, heading, boxes};
  }

  /// False on NaN/inf or a joint spinning faster than kMaxJointSpeed.
  bool finite() const {
    for (int j = 0; j < kJoints; ++j)
      if (!(std::abs(qdot[j]) <= kMaxJointSpeed)) return false;
    if (!root_pos.allFinite() || !root_vel.allFinite() || !std::isfinite(heading) || !std::isfinite(yaw_rate))
      return false;
    for (int j = 0; j < kJoints; ++j)
      if (!std::isfinite(q[j]) || !std::isfinite(qdot[j])) return false;
    for (const auto& b : boxes)
      if (!b.position.allFinite() || !b.velocity.allFinite() || !b.rotation.coeffs().allFinite()) return false;
    return true;
  }
};

/// State matching `f`, with velocities from the finite difference to `next`.
inline ToyState state_from_frame(const TrajectoryFrame& f, const TrajectoryFrame* next = nullptr,
                                 double rate = kFrameRate) {
  if (static_cast<int>(f.joints.size()) != kJoints) throw ShapeMismatch("state_from_frame: skeleton mismatch");
  ToyState s;
  s.root_pos = f.root_pos;
  s.heading = heading_of(f.root_rot.toRotationMatrix());
  for (int j = 0; j < kJoints; ++j) s.q[j] = skeleton::joint_angle(j, f.joints[j]);
  if (next) {
    s.root_vel = (next->root_pos - f.root_pos) * rate;
    s.yaw_rate = wrap_angle(heading_of(next->root_rot.toRotationMatrix()) - s.heading) * rate;
    for (int j = 0; j < kJoints; ++j) s.qdot[j] = (skeleton::joint_angle(j, next->joints[j]) - s.q[j]) * rate;
  }
  return s;
}

struct ControlGains {
  std::array<double, kJoints> kp;
  std::array<double, kJoints> kd;
  double smooth_prev = 0.3;  // weight on the previous correction
  double smooth_new = 0.7;
  double root_kp = 100.0;    // per unit mass
  double root_kd = 20.0;
  double yaw_kp = 100.0;     // per unit inertia
  double yaw_kd = 20.0;

  ControlGains() {
    kp.fill(50.0);
    kd.fill(5.0);
  }

  void validate() const {
    for (int j = 0; j < kJoints; ++j)
      if (!(kp[j] >= 0.0) || !(kd[j] >= 0.0)) throw Error("gains must be non-negative");
    if (std::abs(smooth_prev + smooth_new - 1.0) > 1e-12 || smooth_prev < 0.0 || smooth_new < 0.0)
      throw Error("smoothing coefficients must be non-negative and sum to 1");
    if (!(root_kp >= 0.0 && root_kd >= 0.0 && yaw_kp >= 0.0 && yaw_kd >= 0.0))
      throw Error("root gains must be non-negative");
  }
};

inline nlohmann::json gains_to_json(const ControlGains& g) {
  return {{"kp", g.kp},           {"kd", g.kd},           {"smooth_prev", g.smooth_prev},
          {"smooth_new", g.smooth_new}, {"root_kp", g.root_kp}, {"root_kd", g.root_kd},
          {"yaw_kp", g.yaw_kp},   {"yaw_kd", g.yaw_kd}};
}

/// Reads gains; "kp"/"kd" may be a scalar applied to every joint or a per-joint array.
inline ControlGains gains_from_json(const nlohmann::json& j) {
  ControlGains g;
  auto read_joint = [&](const char* key, std::array<double, kJoints>& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_number()) out.fill(v.get<double>());
    else {
      const auto arr = v.get<std::vector<double>>();
      if (arr.size() != kJoints) throw ParseError(std::string(key) + ": expected " + std::to_string(kJoints) + " values");
      std::copy(arr.begin(), arr.end(), out.begin());
    }
  };
  try {
    read_joint("kp", g.kp);
    read_joint("kd", g.kd);
    g.smooth_prev = j.value("smooth_prev", g.smooth_prev);
    g.smooth_new = j.value("smooth_new", g.smooth_new);
    g.root_kp = j.value("root_kp", g.root_kp);
    g.root_kd = j.value("root_kd", g.root_kd);
    g.yaw_kp = j.value("yaw_kp", g.yaw_kp);
    g.yaw_kd = j.value("yaw_kd", g.yaw_kd);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("gains: ") + e.what());
  }
  g.validate();
  return g;
}

/// One joint: kp * (q_ref ⊖ q) - kd * qdot + tau_a.
inline Vec3 pd_torque(const Quat& q_ref, const Quat& q, const Vec3& qdot, const Vec3& tau_a, double kp, double kd) {
  return kp * rot_diff(q_ref, q) - kd * qdot + tau_a;
}

/// All joints; `tau_a` is 3 values per joint.
inline Eigen::VectorXd pd_torque(std::span<const Quat> q_ref, std::span<const Quat> q, std::span<const Vec3> qdot,
                                 const Eigen::VectorXd& tau_a, const ControlGains& g) {
  const std::size_t M = q.size();
  if (q_ref.size() != M || qdot.size() != M || static_cast<std::size_t>(tau_a.size()) != 3 * M || M > kJoints)
    throw ShapeMismatch("pd_torque: inconsistent joint counts");
  Eigen::VectorXd tau(3 * M);
  for (std::size_t j = 0; j < M; ++j)
    tau.segment<3>(3 * j) = pd_torque(q_ref[j], q[j], qdot[j], tau_a.segment<3>(3 * j), g.kp[j], g.kd[j]);
  return tau;
}

/// 0.3 * previous + 0.7 * new with the default gains.
inline Eigen::VectorXd smooth_action(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, const ControlGains& g = {}) {
  if (prev.size() != next.size()) throw ShapeMismatch("smooth_action: size mismatch");
  return g.smooth_prev * prev + g.smooth_new * next;
}

/// Blend across a primitive switch: lambda 0 gives the manipulation action,
/// lambda 1 the locomotion action.
inline Eigen::VectorXd blend_transition(const Eigen::VectorXd& a_manip, const Eigen::VectorXd& a_loco, double lambda) {
  if (a_manip.size() != a_loco.size()) throw ShapeMismatch("blend_transition: size mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("blend_transition: lambda outside [0, 1]");
  return (1.0 - lambda) * a_manip + lambda * a_loco;
}

struct SimParams {
  double dt = 1.0 / 120.0;
  double joint_inertia = 0.1;
  double joint_damping = 0.1;  // passive
  double root_mass = 60.0;
  double yaw_inertia = 10.0;
  double grasp_k = 500.0;  // per unit box mass
  double grasp_c = 20.0;
  double grasp_rot_k = 200.0;
  double grasp_rot_c = 20.0;
};

struct SimInput {
  Eigen::VectorXd joint_torque = Eigen::VectorXd::Zero(kActionDim);
  Vec3 root_force = Vec3::Zero();
  double yaw_torque = 0.0;
};

namespace detail {

// Backward-Euler step of a unit-mass spring-damper chasing (target, target_vel).
inline void spring_step(Vec3& x, Vec3& v, const Vec3& target, const Vec3& target_vel, double k, double c, double dt) {
  v = (v + dt * (k * (target - x) + c * target_vel)) / (1.0 + dt * c + dt * dt * k);
  x += dt * v;
}

inline void rot_spring_step(Quat& r, Vec3& w, const Quat& target, double k, double c, double dt) {
  const Vec3 err = rot_diff(target, r);
  w = (w + dt * k * err) / (1.0 + dt * c + dt * dt * k);
  const double angle = w.norm() * dt;
  if (angle > 0.0) r = Quat(Eigen::AngleAxisd(angle, w.normalized())) * r;
  r.normalize();
}

}  // namespace detail

/// One semi-implicit Euler step. Held boxes follow the hands; each box above
/// follows the top face of the one below it. Free boxes rest in place.
inline ToyState step(const ToyState& s, const SimInput& in, const SimParams& p) {
  if (in.joint_torque.size() != kActionDim) throw ShapeMismatch("step: joint torque must have 3 values per joint");
  ToyState n = s;
  const double dt = p.dt;
  for (int j = 0; j < kJoints; ++j) {
    const double tau = in.joint_torque.segment<3>(3 * j).dot(skeleton::axis(j));
    n.qdot[j] += dt * (tau - p.joint_damping * s.qdot[j]) / p.joint_inertia;
    n.q[j] += dt * n.qdot[j];
  }
  n.root_vel += dt * in.root_force / p.root_mass;
  n.root_pos += dt * n.root_vel;
  n.yaw_rate += dt * in.yaw_torque / p.yaw_inertia;
  n.heading = wrap_angle(n.heading + dt * n.yaw_rate);

  if (!n.grasp || n.boxes.empty()) {
    for (auto& b : n.boxes) {
      b.velocity.setZero();
      b.angular_velocity.setZero();
    }
    return n;
  }
  const auto [l0, r0] = s.hands();
  const auto [l1, r1] = n.hands();
  const Vec3 hand_vel = 0.5 * ((l1 - l0) + (r1 - r0)) / dt;
  const Quat upright(rot_z(n.heading));
  for (std::size_t i = 0; i < n.boxes.size(); ++i) {
    auto& b = n.boxes[i];
    Vec3 target, target_vel;
    Quat target_rot = upright;
    if (i == 0) {
      target = 0.5 * (l1 + r1) - Vec3(0, 0, 0.5 * b.width);
      target_vel = hand_vel;
    } else {
      const auto& below = n.boxes[i - 1];
      target = below.position + Vec3(0, 0, below.width);
      target_vel = below.velocity;
      target_rot = below.rotation;
    }
    detail::spring_step(b.position, b.velocity, target, target_vel, p.grasp_k, p.grasp_c, dt);
    detail::rot_spring_step(b.rotation, b.angular_velocity, target_rot, p.grasp_rot_k, p.grasp_rot_c, dt);
  }
  return n;
}

/// Kinetic energy plus the stored energy of the grasp springs.
inline double mechanical_energy(const ToyState& s, const SimParams& p) {
  double e = 0.5 * p.root_mass * s.root_vel.squaredNorm() + 0.5 * p.yaw_inertia * s.yaw_rate * s.yaw_rate;
  for (int j = 0; j < kJoints; ++j) e += 0.5 * p.joint_inertia * s.qdot[j] * s.qdot[j];
  if (!s.grasp) return e;
  const auto [l, r] = s.hands();
  for (std::size_t i = 0; i < s.boxes.size(); ++i) {
    const auto& b = s.boxes[i];
    const Vec3 target = i == 0 ? Vec3(0.5 * (l + r) - Vec3(0, 0, 0.5 * b.width))
                               : Vec3(s.boxes[i - 1].position + Vec3(0, 0, s.boxes[i - 1].width));
    e += b.mass * (0.5 * b.velocity.squaredNorm() + 0.5 * p.grasp_k * (b.position - target).squaredNorm());
  }
  return e;
}

/// Source of the residual correction tau_a, called once per control step.
using CorrectionSource = std::function<Eigen::VectorXd(const ToyState&, int control_step)>;

inline CorrectionSource zero_correction() {
  return [](const ToyState&, int) { return Eigen::VectorXd::Zero(kActionDim).eval(); };
}

/// Gaussian noise stand-in for a learned policy.
inline CorrectionSource noise_correction(std::uint64_t seed, double sigma) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, sigma](const ToyState&, int) {
    std::normal_distribution<double> n(0.0, sigma);
    Eigen::VectorXd v(kActionDim);
    for (int i = 0; i < kActionDim; ++i) v[i] = n(*rng);
    return v;
  };
}

enum class TrackMode { Locomotion, Carry, PickUp, PutDown };

struct TrackTask {
  TrackMode mode = TrackMode::Locomotion;
  std::vector<BoxState> boxes;  // initial box states, held box first
  double platform_height = 0.0;
};

struct TrackConfig {
  ControlGains gains;
  SimParams sim;
  double control_rate = 60.0;
  double sim_rate = 120.0;
  bool smooth_actions = true;
};

struct TrackResult {
  GlobalTrajectory executed;
  std::vector<RewardReport> trace;  // one per reference frame
  std::vector<double> root_error;   // |root - reference root| per frame
  std::vector<BoxState> final_boxes;
  double mean_dtau_sq = 0.0;        // mean |tau_a(t) - tau_a(t-1)|^2 over control steps
  double mean_r_smooth = 1.0;

  double mean_total() const {
    double s = 0.0;
    for (const auto& r : trace) s += r.total;
    return trace.empty() ? 0.0 : s / trace.size();
  }
  double mean_imitation_product() const {
    double s = 0.0;
    for (const auto& r : trace) s += r.imitation_product();
    return trace.empty() ? 0.0 : s / trace.size();
  }
};

namespace detail {

inline RewardReport frame_report(const TrackTask& task, const TrajectoryFrame& ref, const ToyState& s,
                                 double r_smooth, double lambda) {
  const ImitationTerms im = imitation_rewards(ref, s.pose());
  switch (task.mode) {
    case TrackMode::Locomotion: return locomotion_report(im, r_smooth);
    case TrackMode::Carry: return carry_rewards(im, s.carry_view(), s.boxes.size(), r_smooth);
    case TrackMode::PickUp:
      return manipulation_rewards(im, s.carry_view(), ManipulationTask::PickUp, lambda, task.platform_height,
                                  s.boxes.size(), r_smooth);
    case TrackMode::PutDown:
      return manipulation_rewards(im, s.carry_view(), ManipulationTask::PutDown, lambda, task.platform_height,
                                  s.boxes.size(), r_smooth);
  }
  return {};
}

inline int rate_ratio(double hi, double lo, const char* what) {
  const double r = hi / lo;
  const int k = static_cast<int>(std::lround(r));
  if (k < 1 || std::abs(r - k) > 1e-9) throw Error(std::string(what) + " must be an integer multiple");
  return k;
}

}  // namespace detail

/// Tracks `ref` from its first frame and scores every frame against it.
inline TrackResult track(const GlobalTrajectory& ref, const TrackConfig& cfg, const TrackTask& task = {},
                         CorrectionSource correction = zero_correction()) {
  if (ref.size() < 2) throw LengthMismatch("track: reference needs at least two frames");
  if (!ref.finite()) throw Error("track: reference has non-finite values");
  cfg.gains.validate();
  if (task.mode != TrackMode::Locomotion && task.boxes.empty())
    throw MissingBoxState("track: box task without box states");
  const int controls = detail::rate_ratio(cfg.control_rate, ref.frame_rate, "control rate / frame rate");
  const int substeps = detail::rate_ratio(cfg.sim_rate, cfg.control_rate, "sim rate / control rate");
  SimParams sim = cfg.sim;
  sim.dt = 1.0 / cfg.sim_rate;

  ToyState s = state_from_frame(ref.frames[0], &ref.frames[1], ref.frame_rate);
  s.boxes = task.boxes;
  s.grasp = task.mode != TrackMode::Locomotion;

  TrackResult out;
  out.executed.frame_rate = ref.frame_rate;
  const std::size_t F = ref.size();
  auto lambda_at = [&](std::size_t i) { return F > 1 ? double(i) / double(F - 1) : 1.0; };
  auto record = [&](std::size_t i, double r_smooth) {
    out.executed.frames.push_back(s.pose());
    out.trace.push_back(detail::frame_report(task, ref.frames[i], s, r_smooth, lambda_at(i)));
    out.root_error.push_back((s.root_pos - ref.frames[i].root_pos).norm());
  };
  record(0, 1.0);

  Eigen::VectorXd tau_a = Eigen::VectorXd::Zero(kActionDim);
  double dtau_sum = 0.0, smooth_sum = 0.0;
  long control_steps = 0;
  for (std::size_t k = 0; k + 1 < F; ++k) {
    const TrajectoryFrame& target = ref.frames[k + 1];
    const Vec3 v_ref = (target.root_pos - ref.frames[k].root_pos) * ref.frame_rate;
    const double target_heading = heading_of(target.root_rot.toRotationMatrix());
    const double yaw_rate_ref =
        wrap_angle(target_heading - heading_of(ref.frames[k].root_rot.toRotationMatrix())) * ref.frame_rate;
    double frame_smooth = 0.0;
    for (int c = 0; c < controls; ++c) {
      const Eigen::VectorXd raw = correction(s, static_cast<int>(control_steps));
      if (raw.size() != kActionDim) throw ShapeMismatch("track: correction must have 3 values per joint");
      const Eigen::VectorXd next = cfg.smooth_actions ? smooth_action(tau_a, raw, cfg.gains) : raw;
      const double dsq = (next - tau_a).squaredNorm();
      dtau_sum += dsq;
      const double r_smooth = std::exp(-dsq);
      smooth_sum += r_smooth;
      frame_smooth += r_smooth;
      tau_a = next;
      ++control_steps;
      for (int sub = 0; sub < substeps; ++sub) {
        std::array<Quat, kJoints> q, q_ref;
        std::array<Vec3, kJoints> qd;
        for (int j = 0; j < kJoints; ++j) {
          q[j] = s.joint_quat(j);
          q_ref[j] = target.joints[j];
          qd[j] = s.joint_velocity(j);
        }
        SimInput in;
        in.joint_torque = pd_torque(q_ref, q, qd, tau_a, cfg.gains);
        in.root_force = sim.root_mass * (cfg.gains.root_kp * (target.root_pos - s.root_pos) +
                                         cfg.gains.root_kd * (v_ref - s.root_vel));
        in.yaw_torque = sim.yaw_inertia * (cfg.gains.yaw_kp * wrap_angle(target_heading - s.heading) +
                                           cfg.gains.yaw_kd * (yaw_rate_ref - s.yaw_rate));
        s = step(s, in, sim);
        if (!s.finite())
          throw Diverged("tracker diverged at frame " + std::to_string(k + 1));
      }
    }
    record(k + 1, frame_smooth / controls);
  }
  out.final_boxes = s.boxes;
  if (control_steps > 0) {
    out.mean_dtau_sq = dtau_sum / control_steps;
    out.mean_r_smooth = smooth_sum / control_steps;
  }
  return out;
}

/// Pelvis height and arm angles that put both hands at `hand_height`,
/// skeleton::kHoldReach ahead of the root. The pelvis drops when the hands
/// go low.
struct HoldPose {
  double pelvis = skeleton::kPelvisHeight;
  double shoulder = 0.0;
  double elbow = 0.0;
};

inline HoldPose hold_pose(double hand_height) {
  HoldPose h;
  h.pelvis = std::clamp(hand_height + 0.25 - skeleton::kShoulderHeight, 0.45, skeleton::kPelvisHeight);
  std::tie(h.shoulder, h.elbow) =
      skeleton::arm_ik(skeleton::kHoldReach, hand_height - h.pelvis - skeleton::kShoulderHeight);
  return h;
}

inline void apply_hold(TrajectoryFrame& f, const HoldPose& h) {
  f.joints[skeleton::LShoulder] = canonical(skeleton::joint_rotation(skeleton::LShoulder, h.shoulder));
  f.joints[skeleton::RShoulder] = canonical(skeleton::joint_rotation(skeleton::RShoulder, h.shoulder));
  f.joints[skeleton::LElbow] = canonical(skeleton::joint_rotation(skeleton::LElbow, h.elbow));
  f.joints[skeleton::RElbow] = canonical(skeleton::joint_rotation(skeleton::RElbow, h.elbow));
}

/// Box resting in the hands of a character at `root` with heading `heading`.
inline BoxState held_box(const Vec3& root, double heading, double base_height, double width, double mass) {
  BoxState b;
  b.width = width;
  b.mass = mass;
  const Vec3 ahead = from_local_point(Frame2D(Vec3(root.x(), root.y(), 0.0), heading), Vec3(skeleton::kHoldReach, 0, 0));
  b.position = Vec3(ahead.x(), ahead.y(), base_height);
  b.rotation = Quat(rot_z(heading));
  return b;
}

/// Walking reference with the arms replaced by a hold at carrying height.
inline GlobalTrajectory with_held_box(GlobalTrajectory traj, double box_width) {
  for (auto& f : traj.frames) {
    const double hand = kTorsoHeight + 0.5 * box_width;
    HoldPose h;
    std::tie(h.shoulder, h.elbow) = skeleton::arm_ik(skeleton::kHoldReach, hand - f.root_pos.z() - skeleton::kShoulderHeight);
    apply_hold(f, h);
  }
  return traj;
}

/// Stationary pick-up or put-down reference: the box base moves linearly
/// between the platform top and kTorsoHeight over `frames` frames.
inline GlobalTrajectory manipulation_reference(const Frame2D& stance, ManipulationTask task, double platform_height,
                                               double box_width, int frames, double rate = kFrameRate) {
  if (frames < 2) throw LengthMismatch("manipulation_reference: need at least two frames");
  GlobalTrajectory out;
  out.frame_rate = rate;
  const double h_begin = task == ManipulationTask::PickUp ? platform_height : kTorsoHeight;
  const double h_end = task == ManipulationTask::PickUp ? kTorsoHeight : platform_height;
  for (int i = 0; i < frames; ++i) {
    const double lambda = double(i) / (frames - 1);
    const HoldPose h = hold_pose(lambda * h_end + (1.0 - lambda) * h_begin + 0.5 * box_width);
    TrajectoryFrame f;
    f.root_pos = Vec3(stance.position.x(), stance.position.y(), h.pelvis);
    f.root_rot = canonical(Quat(stance.rotation()));
    for (int j = 0; j < kJoints; ++j) f.joints.push_back(canonical(skeleton::joint_rotation(j, 0.0)));
    apply_hold(f, h);
    out.frames.push_back(std::move(f));
  }
  return out;
}

/// Reward trace as CSV: one row per frame.
inline std::string reward_trace_csv(const std::vector<RewardReport>& trace) {
  std::string out =
      "frame,r_joint,r_translation,r_orientation,r_smooth,r_box_hand,r_box_orientation,r_box_height,r_base,"
      "r_box_product,total,composition\n";
  char buf[512];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    double prod = 1.0;
    for (double b : r.r_box) prod *= b;
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", i, r.r_joint,
                  r.r_translation, r.r_orientation, r.r_smooth, r.r_box_hand, r.r_box_orientation, r.r_box_height,
                  r.r_base, prod, r.total, std::string(to_string(r.composition)).c_str());
    out += buf;
  }
  return out;
}

}  // namespace locoplan
