#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "locoplan/checkpoint.hpp"
#include "locoplan/dataset.hpp"
#include "locoplan/diffusion.hpp"

using namespace locoplan;

namespace {

DenoiserConfig small_net(int data_dim) {
  DenoiserConfig c;
  c.data_dim = data_dim;
  c.width = 48;
  c.layers = 2;
  return c;
}

Dataset small_data(int windows, std::uint64_t seed = 3) {
  DatasetConfig d;
  d.windows = windows;
  d.seed = seed;
  return synthesize_dataset(d);
}

TrainConfig quick(int steps) {
  TrainConfig t;
  t.steps = steps;
  t.batch_size = 16;
  t.seed = 11;
  t.T = 20;
  return t;
}

}  // namespace

TEST(Dataset, DeterministicAndConsistent) {
  const Dataset a = small_data(8), b = small_data(8), c = small_data(8, 4);
  EXPECT_EQ(a.windows, b.windows);
  EXPECT_NE(a.windows, c.windows);
  EXPECT_EQ(a.windows.rows(), MotionLayout{}.window_dim());
  // Each condition is the ground pose at frames N-1 and 2N-1 of its window.
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const WaypointCondition cond = WaypointCondition::from_vector(a.conditions.col(k));
    const GlobalTrajectory t = decode_window(MotionWindow::unflatten(a.windows.col(k), a.layout), cond,
                                             RootDecode::Egocentric);
    EXPECT_LT((t.frames[14].ground().position - cond.c1_pos).norm(), 1e-9);
    EXPECT_LT((t.frames[29].ground().position - cond.c2_pos).norm(), 1e-9);
  }
}

TEST(Dataset, WalkSpeedIntegrates) {
  const GlobalTrajectory t = walk_trajectory({0.8, 0.8, 0.0, 0.0}, 300);
  EXPECT_NEAR(t.frames.back().root_pos.x(), 0.8 * 10.0, 1e-9);
  EXPECT_NEAR(t.frames.back().root_pos.y(), 0.0, 1e-12);
  // Constant curvature: heading turns by kappa * arc length.
  const GlobalTrajectory c = walk_trajectory({1.0, 1.0, 0.5, 0.0}, 60);
  EXPECT_NEAR(c.frames.back().ground().heading, 0.5 * 2.0, 1e-9);
  EXPECT_NEAR(c.frames.back().root_pos.head<2>().norm(), 2.0 * std::sin(0.5) / 0.5, 1e-6);
}

TEST(Normalizer, FitAndInvert) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(4, 200, [&] { return n(rng); });
  x.row(0) = x.row(0) * 5.0 + Eigen::RowVectorXd::Constant(200, 3.0);
  x.row(3).setConstant(2.0);
  const Normalizer norm = Normalizer::fit(x);
  const Eigen::MatrixXd y = norm.apply(x);
  EXPECT_LT(y.rowwise().mean().norm(), 1e-12);
  EXPECT_NEAR(std::sqrt(y.row(0).squaredNorm() / 200), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(norm.scale[3], 1e-3);
  EXPECT_LT((norm.invert(y) - x).norm(), 1e-10);
}

TEST(Diffusion, TrainingIsDeterministic) {
  const Dataset d = small_data(32);
  const DiffusionModel a = train(d, quick(30), small_net(d.layout.window_dim()));
  const DiffusionModel b = train(d, quick(30), small_net(d.layout.window_dim()));
  EXPECT_EQ(a.net.params(), b.net.params());
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  TrainConfig other = quick(30);
  other.seed = 12;
  EXPECT_NE(train(d, other, small_net(d.layout.window_dim())).net.params(), a.net.params());
}

TEST(Diffusion, LossDecreases) {
  const Dataset d = small_data(64);
  const DiffusionModel m = train(d, quick(400), small_net(d.layout.window_dim()));
  ASSERT_EQ(m.loss_curve.size(), 400u);
  auto mean = [&](std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += m.loss_curve[i];
    return s / (to - from);
  };
  EXPECT_LT(mean(350, 400), 0.5 * mean(0, 20));
}

TEST(Diffusion, OverfitsTinyDataset) {
  const Dataset d = small_data(2);
  TrainConfig t = quick(1500);
  t.batch_size = 8;
  t.learning_rate = 2e-3;
  const DiffusionModel m = train(d, t, small_net(d.layout.window_dim()));
  std::mt19937_64 rng(3);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const WaypointCondition c = WaypointCondition::from_vector(d.conditions.col(k));
    const MotionWindow w = sample(m, c, rng);
    const double err = (w.flatten() - d.windows.col(k)).norm() / d.windows.col(k).norm();
    EXPECT_LT(err, 0.05) << "window " << k;
  }
}

TEST(Diffusion, SamplingIsSeeded) {
  const Dataset d = small_data(16);
  const DiffusionModel m = train(d, quick(10), small_net(d.layout.window_dim()));
  const WaypointCondition c = WaypointCondition::from_vector(d.conditions.col(0));
  std::mt19937_64 r1(5), r2(5), r3(6);
  EXPECT_EQ(sample(m, c, r1).flatten(), sample(m, c, r2).flatten());
  EXPECT_NE(sample(m, c, r1).flatten(), sample(m, c, r3).flatten());
}

TEST(Diffusion, RejectsBadConfigs) {
  const Dataset d = small_data(4);
  TrainConfig t = quick(1);
  t.batch_size = 0;
  EXPECT_THROW(train(d, t), ShapeMismatch);
  DenoiserConfig wrong = small_net(10);
  EXPECT_THROW(train(d, quick(1), wrong), ShapeMismatch);
  TrainConfig blowup = quick(50);
  blowup.learning_rate = 1e30;
  EXPECT_THROW(train(d, blowup, small_net(d.layout.window_dim())), Diverged);
}

TEST(Checkpoint, RoundTripReproducesSamples) {
  const Dataset d = small_data(16);
  TrainConfig t = quick(20);
  t.checkpoint_every = 10;
  int hooks = 0;
  const DiffusionModel m =
      train(d, t, small_net(d.layout.window_dim()), [&](const DiffusionModel&, int step) { hooks += step; });
  EXPECT_EQ(hooks, 30);
  const auto dir = std::filesystem::temp_directory_path() / "locoplan_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();
  save_checkpoint(m, path);
  const DiffusionModel back = load_checkpoint(path);
  EXPECT_EQ(back.net.params(), m.net.params());
  EXPECT_EQ(back.normalizer.mean, m.normalizer.mean);
  EXPECT_EQ(back.normalizer.scale, m.normalizer.scale);
  EXPECT_EQ(back.schedule.alpha_bars(), m.schedule.alpha_bars());
  EXPECT_EQ(back.net.config(), m.net.config());
  EXPECT_EQ(back.layout, m.layout);
  const WaypointCondition c = WaypointCondition::from_vector(d.conditions.col(1));
  std::mt19937_64 r1(9), r2(9);
  EXPECT_EQ(sample(m, c, r1).flatten(), sample(back, c, r2).flatten());
  EXPECT_TRUE(std::filesystem::exists(path + ".loss.csv"));

  // Corruptions.
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary);
    out << b;
  };
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  write("NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  write(bytes + "x");
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  EXPECT_THROW(load_checkpoint((dir / "missing.bin").string()), CheckpointError);
  std::filesystem::remove_all(dir);
}
