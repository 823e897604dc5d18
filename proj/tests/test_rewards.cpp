#include <gtest/gtest.h>

#include <random>

#include "locoplan/rewards.hpp"
#include "locoplan/skeleton.hpp"

using namespace locoplan;

namespace {

Quat random_quat(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  const Vec3 v(n(rng), n(rng), n(rng));
  return v.norm() < 1e-12 ? Quat::Identity() : Quat(Eigen::AngleAxisd(v.norm(), v.normalized()));
}

TrajectoryFrame random_frame(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  TrajectoryFrame f;
  f.root_pos = Vec3(n(rng), n(rng), 0.9 + n(rng));
  f.root_rot = random_quat(rng, spread);
  for (int j = 0; j < 8; ++j) f.joints.push_back(random_quat(rng, spread));
  return f;
}

// Squared geodesic angle between two rotations.
double angle_sq(const Quat& a, const Quat& b) {
  const double t = Eigen::AngleAxisd(a * b.inverse()).angle();
  const double w = std::min(t, 2 * kPi - t);
  return w * w;
}

struct Oracle {
  double joint, translation, orientation;
};

Oracle oracle_imitation(const TrajectoryFrame& ref, const TrajectoryFrame& act) {
  double js = 0.0;
  for (std::size_t j = 0; j < ref.joints.size(); ++j) js += angle_sq(ref.joints[j], act.joints[j]);
  const Vec3 d = ref.root_pos - act.root_pos;
  return {std::exp(-3.0 * js), std::exp(-(d.x() * d.x() + d.y() * d.y() + d.z() * d.z())),
          std::exp(-2.0 * angle_sq(ref.root_rot, act.root_rot))};
}

BoxState yaw_box(const Vec3& p, double yaw, double w) {
  BoxState b;
  b.position = p;
  b.rotation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  b.width = w;
  return b;
}

}  // namespace

TEST(Rewards, PerfectTrackingGivesOnes) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const TrajectoryFrame f = random_frame(rng, 0.8);
    TrajectoryFrame g = f;
    for (auto& q : g.joints) q.coeffs() *= -1.0;  // same rotations, other sign
    const ImitationTerms r = imitation_rewards(f, g);
    EXPECT_DOUBLE_EQ(r.r_joint, 1.0);
    EXPECT_DOUBLE_EQ(r.r_translation, 1.0);
    EXPECT_DOUBLE_EQ(r.r_orientation, 1.0);
    EXPECT_DOUBLE_EQ(locomotion_total(r), 1.0);
  }
  const Eigen::VectorXd tau = Eigen::VectorXd::Random(24);
  EXPECT_DOUBLE_EQ(smooth_reward(tau, tau), 1.0);

  // Perfect hold, upright, stacked exactly, on the height schedule.
  const BoxState b0 = yaw_box(Vec3(1, 2, 0.7), 0.4, 0.4);
  const BoxState b1 = yaw_box(Vec3(1, 2, 1.1), 0.4, 0.3);
  const std::vector<BoxState> boxes = {b0, b1};
  const auto [l, r] = b0.side_points();
  const CarryView view{l, r, 0.4, boxes};
  EXPECT_DOUBLE_EQ(r_box_hand(l, r, b0), 1.0);
  EXPECT_DOUBLE_EQ(r_box_stack(b1, b0), 1.0);
  const RewardReport carry = carry_rewards({}, view, 2, 1.0);
  EXPECT_DOUBLE_EQ(carry.r_box_orientation, 1.0);
  EXPECT_DOUBLE_EQ(carry.total, 2.0 + 1.0);
  const double lambda = (0.7 - 0.5) / (kTorsoHeight - 0.5);
  const RewardReport pick = manipulation_rewards({}, view, ManipulationTask::PickUp, lambda, 0.5, 2, 1.0);
  EXPECT_NEAR(pick.r_box_height, 1.0, 1e-15);
  EXPECT_NEAR(pick.total, 1.0 + 3.0 + 1.0, 1e-14);
}

TEST(Rewards, ImitationMatchesIndependentFormula) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const TrajectoryFrame a = random_frame(rng, 0.6), b = random_frame(rng, 0.6);
    const ImitationTerms r = imitation_rewards(a, b);
    const Oracle o = oracle_imitation(a, b);
    EXPECT_NEAR(r.r_joint, o.joint, 1e-12);
    EXPECT_NEAR(r.r_translation, o.translation, 1e-12);
    EXPECT_NEAR(r.r_orientation, o.orientation, 1e-12);
    EXPECT_NEAR(locomotion_total(r), o.joint * o.translation * o.orientation, 1e-12);
    EXPECT_GT(r.r_joint, 0.0);
    EXPECT_LE(r.r_joint, 1.0);
  }
}

TEST(Rewards, CompositionsMatchIndependentFormulas) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const TrajectoryFrame a = random_frame(rng, 0.3), b = random_frame(rng, 0.3);
    const Oracle o = oracle_imitation(a, b);
    const double heading = 3 * u(rng);
    const std::size_t P = 1 + k % 3;
    std::vector<BoxState> boxes;
    for (std::size_t i = 0; i < P; ++i)
      boxes.push_back(yaw_box(Vec3(u(rng), u(rng), 0.6 + 0.4 * i + 0.1 * u(rng)), heading + 0.3 * u(rng),
                              0.3 + 0.1 * std::abs(u(rng))));
    const Vec3 lh(u(rng), u(rng), 1 + u(rng)), rh(u(rng), u(rng), 1 + u(rng));
    const double r_smooth = std::exp(-std::abs(u(rng)));

    // Box terms by hand: cube sides along the box's local y axis, rest on the top face.
    auto yaw_of = [](const BoxState& bx) { return 2.0 * std::atan2(bx.rotation.z(), bx.rotation.w()); };
    auto side = [&](const BoxState& bx, double sign) {
      const double y = yaw_of(bx);
      return Vec3(bx.position.x() - sign * 0.5 * bx.width * std::sin(y),
                  bx.position.y() + sign * 0.5 * bx.width * std::cos(y), bx.position.z() + 0.5 * bx.width);
    };
    auto orient = [&](const BoxState& bx) {
      const double d = wrap_angle(yaw_of(bx) - heading);
      return std::exp(-10.0 * d * d);
    };
    const double hand = std::exp(-(lh - side(boxes[0], 1)).squaredNorm() - (rh - side(boxes[0], -1)).squaredNorm());
    double prod = 1.0;
    for (std::size_t i = 1; i < P; ++i) {
      const Vec3 rest = boxes[i - 1].position + Vec3(0, 0, boxes[i - 1].width);
      prod *= orient(boxes[i]) * std::exp(-(boxes[i].position - rest).squaredNorm());
    }
    const CarryView view{lh, rh, heading, boxes};
    const ImitationTerms im{o.joint, o.translation, o.orientation};

    const RewardReport carry = carry_rewards(im, view, P, r_smooth);
    const double want_carry = o.joint * o.translation * o.orientation * (hand + orient(boxes[0])) * prod + r_smooth;
    EXPECT_NEAR(carry.total, want_carry, 1e-12);
    EXPECT_EQ(carry.composition, Composition::LocomotionMultiplicative);

    for (auto task : {ManipulationTask::PickUp, ManipulationTask::PutDown}) {
      const double lambda = 0.5 * (1 + u(rng)), plat = 0.5 * (1 + u(rng));
      const double hb = task == ManipulationTask::PickUp ? plat : 1.2;
      const double he = task == ManipulationTask::PickUp ? 1.2 : plat;
      const double e = (1 - lambda) * hb + lambda * he - boxes[0].position.z();
      const double height = std::exp(-10.0 * e * e);
      const RewardReport m = manipulation_rewards(im, view, task, lambda, plat, P, r_smooth);
      const double want = o.joint * o.translation * o.orientation + (hand + orient(boxes[0]) + height) * prod + r_smooth;
      EXPECT_NEAR(m.total, want, 1e-12);
      EXPECT_EQ(m.composition, Composition::ManipulationAdditive);
    }
  }
}

TEST(Rewards, ProductAnnihilates) {
  // Driving any one multiplicative factor to zero zeroes the product; the
  // additive manipulation total keeps the other terms.
  std::mt19937_64 rng(4);
  const TrajectoryFrame ref = random_frame(rng, 0.2);
  TrajectoryFrame far = ref;
  far.root_pos.x() += 40.0;
  const ImitationTerms t = imitation_rewards(ref, far);
  EXPECT_EQ(t.r_translation, 0.0);
  EXPECT_EQ(locomotion_total(t), 0.0);
  TrajectoryFrame twisted = ref;
  for (auto& q : twisted.joints) q = q * Quat(Eigen::AngleAxisd(3.0, Vec3::UnitX()));
  for (int k = 0; k < 30; ++k) twisted.joints.push_back(twisted.joints[0]);
  TrajectoryFrame ref_long = ref;
  for (int k = 0; k < 30; ++k) ref_long.joints.push_back(ref.joints[0]);
  EXPECT_EQ(locomotion_total(imitation_rewards(ref_long, twisted)), 0.0);

  const BoxState b0 = yaw_box(Vec3(0, 0, 0.8), 0.0, 0.4);
  BoxState fallen = yaw_box(Vec3(30, 0, 0), 0.0, 0.4);
  const std::vector<BoxState> boxes = {b0, fallen};
  const auto [l, r] = b0.side_points();
  const RewardReport carry = carry_rewards({}, {l, r, 0.0, boxes}, 2, 0.0);
  EXPECT_EQ(carry.r_box[0], 0.0);
  EXPECT_EQ(carry.total, 0.0);
  const RewardReport pick = manipulation_rewards({}, {l, r, 0.0, boxes}, ManipulationTask::PickUp, 0.5, 0.4, 2, 0.0);
  EXPECT_EQ(pick.total, 1.0);
}

TEST(Rewards, BoxHeightSchedule) {
  for (double lambda : {0.0, 0.25, 1.0}) {
    const double z = lambda * 1.2 + (1 - lambda) * 0.5;
    EXPECT_DOUBLE_EQ(r_box_height(lambda, 0.5, 1.2, z), 1.0);
    EXPECT_NEAR(r_box_height(lambda, 0.5, 1.2, z + 0.1), std::exp(-0.1), 1e-12);
  }
}

TEST(Rewards, MissingBoxes) {
  const std::vector<BoxState> one = {BoxState{}};
  const CarryView v{Vec3::Zero(), Vec3::Zero(), 0.0, one};
  EXPECT_THROW(carry_rewards({}, v, 2, 1.0), MissingBoxState);
  EXPECT_THROW(carry_rewards({}, v, 0, 1.0), MissingBoxState);
  EXPECT_THROW(manipulation_rewards({}, v, ManipulationTask::PickUp, 1.5, 0.5, 1, 1.0), Error);
  TrajectoryFrame a, b;
  a.joints.resize(2);
  EXPECT_THROW(imitation_rewards(a, b), ShapeMismatch);
}

TEST(Rewards, CompositionNames) {
  EXPECT_EQ(to_string(Composition::LocomotionMultiplicative), "locomotion-multiplicative");
  EXPECT_EQ(to_string(Composition::ManipulationAdditive), "manipulation-additive");
}
