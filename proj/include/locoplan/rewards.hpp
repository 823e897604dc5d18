#pragma once

// Imitation, carry and manipulation rewards. Every exponential term lies in
// (0, 1] and equals 1 only when its squared-error argument is zero.

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "locoplan/error.hpp"
#include "locoplan/geometry.hpp"
#include "locoplan/motion.hpp"

namespace locoplan {

/// Imitation terms against the reference frame.
struct ImitationTerms {
  double r_joint = 1.0;
  double r_translation = 1.0;
  double r_orientation = 1.0;
};

inline ImitationTerms imitation_rewards(const TrajectoryFrame& ref, const TrajectoryFrame& actual) {
  if (ref.joints.size() != actual.joints.size()) throw ShapeMismatch("imitation_rewards: skeleton mismatch");
  double joint_sq = 0.0;
  for (std::size_t j = 0; j < ref.joints.size(); ++j)
    joint_sq += rot_diff(ref.joints[j], actual.joints[j]).squaredNorm();
  return {std::exp(-3.0 * joint_sq), std::exp(-(ref.root_pos - actual.root_pos).squaredNorm()),
          std::exp(-2.0 * rot_diff(ref.root_rot, actual.root_rot).squaredNorm())};
}

inline double smooth_reward(const Eigen::VectorXd& tau_next, const Eigen::VectorXd& tau_prev) {
  return std::exp(-(tau_next - tau_prev).squaredNorm());
}

/// r_joint * r_translation * r_orientation.
inline double locomotion_total(const ImitationTerms& r) { return r.r_joint * r.r_translation * r.r_orientation; }

/// Product of the imitation terms plus the smoothness term.
inline double locomotion_total(const ImitationTerms& r, double r_smooth) { return locomotion_total(r) + r_smooth; }

/// Box state. `position` is the center of the bottom face; boxes are cubes.
struct BoxState {
  Vec3 position = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  double width = 0.4;
  double mass = 5.0;

  Vec3 center() const { return position + Vec3(0, 0, 0.5 * width); }
  /// Grasp points on the box's left and right faces at its mid height.
  std::pair<Vec3, Vec3> side_points() const {
    const Vec3 lateral = rotation.toRotationMatrix().col(1);
    return {center() + 0.5 * width * lateral, center() - 0.5 * width * lateral};
  }
};

inline double r_box_hand(const Vec3& lhand, const Vec3& rhand, const BoxState& box) {
  const auto [lbox, rbox] = box.side_points();
  return std::exp(-(lhand - lbox).squaredNorm() - (rhand - rbox).squaredNorm());
}

inline double r_box_orientation(const Quat& box, const Quat& target) {
  return std::exp(-10.0 * rot_diff(box, target).squaredNorm());
}

/// Alignment of `top` with the resting spot on `bottom`'s upper face.
inline double r_box_stack(const BoxState& top, const BoxState& bottom) {
  const Vec3 rest = bottom.position + Vec3(0, 0, bottom.width);
  return std::exp(-(top.position - rest).squaredNorm());
}

/// Target height interpolates h_begin -> h_end as lambda goes 0 -> 1.
inline double r_box_height(double lambda, double h_begin, double h_end, double box_height) {
  const double e = lambda * h_end + (1.0 - lambda) * h_begin - box_height;
  return std::exp(-10.0 * e * e);
}

enum class Composition { LocomotionMultiplicative, ManipulationAdditive };

inline std::string_view to_string(Composition c) {
  return c == Composition::LocomotionMultiplicative ? "locomotion-multiplicative" : "manipulation-additive";
}

enum class ManipulationTask { PickUp, PutDown };

inline constexpr double kTorsoHeight = 1.2;  // box target height at the end of a pick-up

struct RewardReport {
  double r_joint = 1.0;
  double r_translation = 1.0;
  double r_orientation = 1.0;
  double r_smooth = 1.0;
  double r_box_hand = 0.0;
  double r_box_orientation = 0.0;
  double r_box_height = 0.0;
  std::vector<double> r_box_stack;  // boxes 1..P-1
  std::vector<double> r_box;        // boxes 1..P-1
  double r_base = 0.0;
  double total = 0.0;
  Composition composition = Composition::LocomotionMultiplicative;
  bool carrying = false;

  double imitation_product() const { return r_joint * r_translation * r_orientation; }
};

/// What the box rewards need from the simulated state.
struct CarryView {
  Vec3 lhand;
  Vec3 rhand;
  double heading = 0.0;  // character heading; boxes should stay upright and face along it
  std::span<const BoxState> boxes;
};

namespace detail {

inline void fill_box_terms(RewardReport& r, const CarryView& s, std::size_t P) {
  if (P < 1) throw MissingBoxState("box rewards need at least one box");
  if (s.boxes.size() < P)
    throw MissingBoxState("state has " + std::to_string(s.boxes.size()) + " boxes, " + std::to_string(P) +
                          " required");
  const Quat upright(rot_z(s.heading));
  r.r_box_hand = r_box_hand(s.lhand, s.rhand, s.boxes[0]);
  r.r_box_orientation = r_box_orientation(s.boxes[0].rotation, upright);
  r.r_box_stack.clear();
  r.r_box.clear();
  for (std::size_t i = 1; i < P; ++i) {
    const double stack = r_box_stack(s.boxes[i], s.boxes[i - 1]);
    r.r_box_stack.push_back(stack);
    r.r_box.push_back(r_box_orientation(s.boxes[i].rotation, upright) * stack);
  }
  r.carrying = true;
}

inline double box_product(const RewardReport& r) {
  double p = 1.0;
  for (double b : r.r_box) p *= b;
  return p;
}

}  // namespace detail

/// Walk-and-carry: r_base = r_box-hand + r_box-orientation and
/// total = r_joint * r_translation * r_orientation * r_base * prod(r_box^i) + r_smooth.
inline RewardReport carry_rewards(const ImitationTerms& im, const CarryView& s, std::size_t P, double r_smooth) {
  RewardReport r;
  r.r_joint = im.r_joint;
  r.r_translation = im.r_translation;
  r.r_orientation = im.r_orientation;
  r.r_smooth = r_smooth;
  detail::fill_box_terms(r, s, P);
  r.r_base = r.r_box_hand + r.r_box_orientation;
  r.composition = Composition::LocomotionMultiplicative;
  r.total = r.imitation_product() * r.r_base * detail::box_product(r) + r_smooth;
  return r;
}

/// Pick-up / put-down: the base term also carries r_box-height, and is added
/// rather than multiplied:
/// total = r_joint * r_translation * r_orientation + r_base * prod(r_box^i) + r_smooth.
inline RewardReport manipulation_rewards(const ImitationTerms& im, const CarryView& s, ManipulationTask task,
                                         double lambda, double platform_height, std::size_t P, double r_smooth) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("manipulation_rewards: lambda outside [0, 1]");
  if (!(platform_height >= 0.0)) throw Error("manipulation_rewards: negative platform height");
  RewardReport r;
  r.r_joint = im.r_joint;
  r.r_translation = im.r_translation;
  r.r_orientation = im.r_orientation;
  r.r_smooth = r_smooth;
  detail::fill_box_terms(r, s, P);
  const double h_begin = task == ManipulationTask::PickUp ? platform_height : kTorsoHeight;
  const double h_end = task == ManipulationTask::PickUp ? kTorsoHeight : platform_height;
  r.r_box_height = r_box_height(lambda, h_begin, h_end, s.boxes[0].position.z());
  r.r_base = r.r_box_hand + r.r_box_orientation + r.r_box_height;
  r.composition = Composition::ManipulationAdditive;
  r.total = r.imitation_product() + r.r_base * detail::box_product(r) + r_smooth;
  return r;
}

/// Plain locomotion report: total is the imitation product.
inline RewardReport locomotion_report(const ImitationTerms& im, double r_smooth) {
  RewardReport r;
  r.r_joint = im.r_joint;
  r.r_translation = im.r_translation;
  r.r_orientation = im.r_orientation;
  r.r_smooth = r_smooth;
  r.composition = Composition::LocomotionMultiplicative;
  r.total = locomotion_total(im);
  return r;
}

// Tracking rewards reported for the diffusion-generated reference (joint,
// translation, orientation). Reference values only; nothing asserts them.
inline constexpr double kReferenceDiffusionTracking[3] = {0.94, 0.92, 0.98};

}  // namespace locoplan
