#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

#include "locoplan/geometry.hpp"

using namespace locoplan;

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Rotation log via the trace / skew-part formula, handled separately near pi
// through the symmetric part's dominant eigenvector.
Vec3 log_oracle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(c);
  if (angle < 1e-9) return Vec3::Zero();
  if (kPi - angle > 1e-6) {
    const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return angle / (2.0 * std::sin(angle)) * w;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (r + r.transpose()));
  Vec3 axis = es.eigenvectors().col(2);
  return angle * axis;
}

}  // namespace

TEST(Geometry, SixDRoundTripRandomRotations) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 r = random_rotation(rng);
    EXPECT_LT((decode6d(encode6d(r)) - r).norm(), 1e-12);
  }
}

TEST(Geometry, DecodeOrthonormalizesPerturbedColumns) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int k = 0; k < 200; ++k) {
    Rotation6D r = encode6d(random_rotation(rng));
    r.a1 = 3.0 * r.a1 + Vec3(n(rng), n(rng), n(rng));
    r.a2 += Vec3(n(rng), n(rng), n(rng));
    const Mat3 m = decode6d(r);
    EXPECT_LT((m.transpose() * m - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
    EXPECT_LT((m.col(0) - r.a1.normalized()).norm(), 1e-12);
  }
}

TEST(Geometry, DecodeRejectsDegenerateInput) {
  EXPECT_THROW(decode6d({Vec3::Zero(), Vec3::UnitY()}), DegenerateInput);
  EXPECT_THROW(decode6d({Vec3::UnitX(), Vec3::Zero()}), DegenerateInput);
  EXPECT_THROW(decode6d({Vec3::UnitX(), 2.0 * Vec3::UnitX()}), DegenerateInput);
}

TEST(Geometry, RotDiffMatchesLogOracle) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    const Vec3 d = rot_diff(a, b);
    const Vec3 o = log_oracle(a * b.transpose());
    EXPECT_LT((d - o).norm(), 1e-8) << k;
    // Applying the difference to b recovers a.
    const Mat3 back = Eigen::AngleAxisd(d.norm(), d.normalized()).toRotationMatrix() * b;
    EXPECT_LT((back - a).norm(), 1e-9);
  }
}

TEST(Geometry, RotDiffIdentityAndAntisymmetry) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    EXPECT_LT(rot_diff(a, a).norm(), 1e-12);
    if (rot_diff(a, b).norm() < kPi - 1e-3) EXPECT_LT((rot_diff(a, b) + rot_diff(b, a)).norm(), 1e-9);
  }
}

TEST(Geometry, RotDiffAngleObeysTriangleInequality) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
    EXPECT_LE(rot_diff(a, c).norm(), rot_diff(a, b).norm() + rot_diff(b, c).norm() + 1e-9);
  }
}

TEST(Geometry, RotDiffHalfTurnIsCanonical) {
  const Mat3 flip = Eigen::AngleAxisd(kPi, Vec3(0, 0, -1)).toRotationMatrix();
  const Vec3 d = rot_diff(flip, Mat3::Identity());
  EXPECT_NEAR(d.norm(), kPi, 1e-9);
  EXPECT_GT(d.z(), 0.0);
  const Vec3 q = rot_diff(Quat(flip), Quat::Identity());
  EXPECT_LT((q - d).norm(), 1e-9);
}

TEST(Geometry, QuaternionOverloadIgnoresSign) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    const Quat a(random_rotation(rng)), b(random_rotation(rng));
    Quat nb = b;
    nb.coeffs() *= -1.0;
    EXPECT_LT((rot_diff(a, b) - rot_diff(a, nb)).norm(), 1e-9);
    EXPECT_LT((rot_diff(a, b) - rot_diff(a.toRotationMatrix(), b.toRotationMatrix())).norm(), 1e-9);
  }
}

TEST(Geometry, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(3 * kPi + 0.1), -kPi + 0.1, 1e-12);
  EXPECT_NEAR(wrap_angle(0.3), 0.3, 1e-15);
}

TEST(Geometry, FrameComposeInverse) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    const Frame2D f(Vec3(u(rng), u(rng), 0.0), u(rng));
    const Frame2D g(Vec3(u(rng), u(rng), 0.0), u(rng));
    const Frame2D id = f.compose(f.inverse());
    EXPECT_LT(id.position.norm(), 1e-12);
    EXPECT_NEAR(id.heading, 0.0, 1e-12);
    const Frame2D back = f.compose(f.relative(g));
    EXPECT_LT((back.position - g.position).norm(), 1e-12);
    EXPECT_NEAR(wrap_angle(back.heading - g.heading), 0.0, 1e-12);
  }
}

TEST(Geometry, LocalWorldRoundTrip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    const Frame2D f(Vec3(u(rng), u(rng), 0.0), u(rng));
    const Vec3 p(u(rng), u(rng), u(rng));
    const Mat3 r = random_rotation(rng);
    const LocalPose l = to_local(f, p, r);
    const LocalPose w = from_local(f, l.position, l.rotation);
    EXPECT_LT((w.position - p).norm(), 1e-12);
    EXPECT_LT((w.rotation - r).norm(), 1e-12);
    // Height is unchanged by a ground frame.
    EXPECT_NEAR(l.position.z(), p.z(), 1e-12);
  }
}

TEST(Geometry, GroundFrameDropsPitchAndRoll) {
  const Mat3 r = rot_z(0.7) * Eigen::AngleAxisd(0.2, Vec3::UnitY()).toRotationMatrix();
  const Frame2D g = ground_frame(Vec3(1, 2, 0.9), r);
  EXPECT_NEAR(g.heading, 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(g.position.z(), 0.0);
  EXPECT_DOUBLE_EQ(g.position.x(), 1.0);
}
