#pragma once

// Conditional diffusion over flattened motion windows: the simple
// reconstruction objective, its gradient, Adam training, and the DDPM
// ancestral sampler in the x0 parameterization.

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "locoplan/dataset.hpp"
#include "locoplan/denoiser.hpp"
#include "locoplan/error.hpp"
#include "locoplan/motion.hpp"
#include "locoplan/schedule.hpp"

namespace locoplan {

/// Per-dimension affine whitening of window vectors.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalizer identity(int dim) { return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

  static Normalizer fit(const Eigen::MatrixXd& data, double floor = 1e-3) {
    Normalizer n;
    n.mean = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - n.mean;
    n.scale = (centered.array().square().rowwise().sum() / std::max<double>(1.0, double(data.cols())))
                  .sqrt()
                  .max(floor)
                  .matrix();
    return n;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return ((x.colwise() - mean).array().colwise() / scale.array()).matrix();
  }
  Eigen::MatrixXd invert(const Eigen::MatrixXd& y) const {
    return ((y.array().colwise() * scale.array()).matrix().colwise() + mean);
  }
};

/// A batch with its noise draws fixed: clean data, conditions, steps, eps.
template <class S>
struct NoisedBatch {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  Mat x;
  Mat cond;
  std::vector<int> steps;
  Mat eps;
};

/// Draws t ~ U{1..T} and eps ~ N(0, I) per column, columns in order.
template <class S>
void draw_noise(NoisedBatch<S>& b, int T, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(1, T);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto B = b.x.cols();
  b.steps.resize(B);
  b.eps.resize(b.x.rows(), B);
  for (Eigen::Index c = 0; c < B; ++c) {
    b.steps[c] = step(rng);
    for (Eigen::Index r = 0; r < b.x.rows(); ++r) b.eps(r, c) = static_cast<S>(normal(rng));
  }
}

template <class S>
typename NoisedBatch<S>::Mat noised_inputs(const NoiseSchedule& schedule, const NoisedBatch<S>& b) {
  typename NoisedBatch<S>::Mat z(b.x.rows(), b.x.cols());
  for (Eigen::Index c = 0; c < b.x.cols(); ++c)
    z.col(c) = forward_noise(schedule, b.x.col(c), b.steps[c], b.eps.col(c));
  return z;
}

/// Mean over the batch of ||x - x_hat(z_t, t, c)||^2, times `weight`.
template <class S>
double loss_simple(const Denoiser<S>& net, const NoiseSchedule& schedule, const NoisedBatch<S>& b,
                   double weight = 1.0) {
  if (b.x.cols() == 0) throw ShapeMismatch("loss_simple: empty batch");
  const auto xhat = net.forward(noised_inputs(schedule, b), b.steps, b.cond);
  return weight * static_cast<double>((b.x - xhat).squaredNorm()) / b.x.cols();
}

/// Loss and its gradient with respect to every parameter (reverse mode).
template <class S>
std::pair<double, typename Denoiser<S>::Vec> loss_and_grad(const Denoiser<S>& net, const NoiseSchedule& schedule,
                                                          const NoisedBatch<S>& b, double weight = 1.0) {
  if (b.x.cols() == 0) throw ShapeMismatch("loss_simple: empty batch");
  typename Denoiser<S>::Cache cache;
  const auto xhat = net.forward(noised_inputs(schedule, b), b.steps, b.cond, &cache);
  const typename Denoiser<S>::Mat diff = xhat - b.x;
  const double inv_b = 1.0 / static_cast<double>(b.x.cols());
  const double loss = weight * static_cast<double>(diff.squaredNorm()) * inv_b;
  const typename Denoiser<S>::Mat d_out = static_cast<S>(2.0 * weight * inv_b) * diff;
  typename Denoiser<S>::Vec grad = Denoiser<S>::Vec::Zero(net.params().size());
  net.backward(cache, d_out, grad);
  return {loss, std::move(grad)};
}

/// Adam over a flat parameter vector.
template <class S>
class Adam {
 public:
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  void step(Vec& params, const Vec& grad) {
    ++t_;
    m_ = S(b1_) * m_ + S(1 - b1_) * grad;
    v_ = S(b2_) * v_ + S(1 - b2_) * grad.cwiseProduct(grad);
    const S c1 = S(1.0 / (1.0 - std::pow(b1_, t_)));
    const S c2 = S(1.0 / (1.0 - std::pow(b2_, t_)));
    params.array() -= S(lr_) * (m_.array() * c1) / ((v_.array() * c2).sqrt() + S(eps_));
  }

  long steps() const { return t_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_, b1_, b2_, eps_;
  Vec m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int steps = 6000;
  std::uint64_t seed = 0;
  int T = 50;
  ScheduleFamily schedule = ScheduleFamily::Cosine;
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  double lr_final_fraction = 0.1;  // cosine decay to this fraction of the initial rate
};

/// Everything needed to sample: architecture, weights, schedule, data whitening.
struct DiffusionModel {
  MotionLayout layout;
  NoiseSchedule schedule = NoiseSchedule::cosine(50);
  Normalizer normalizer;
  Denoiser<float> net;
  TrainConfig train_config;
  std::vector<double> loss_curve;  // one entry per optimizer step
};

inline DenoiserConfig default_denoiser_config(const MotionLayout& layout) {
  DenoiserConfig c;
  c.data_dim = layout.window_dim();
  return c;
}

/// Called after every `checkpoint_every` steps with the in-progress model.
using CheckpointHook = std::function<void(const DiffusionModel&, int step)>;

/// Trains a denoiser on `data`. Batches are drawn by column index from a
/// generator seeded with cfg.seed, so reordering the dataset changes the run;
/// identical (data, configs) give bit-identical weights.
inline DiffusionModel train(const Dataset& data, const TrainConfig& cfg, DenoiserConfig net_cfg = {},
                            const CheckpointHook& hook = {}) {
  if (data.size() == 0) throw ShapeMismatch("train: empty dataset");
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.steps < 1 || cfg.T < 1)
    throw ShapeMismatch("train: configuration values must be positive");
  if (net_cfg.data_dim == 0) net_cfg = default_denoiser_config(data.layout);
  if (net_cfg.data_dim != data.layout.window_dim()) throw ShapeMismatch("train: data dimension mismatch");

  DiffusionModel model;
  model.layout = data.layout;
  model.schedule = NoiseSchedule::make(cfg.schedule, cfg.T);
  model.normalizer = Normalizer::fit(data.windows);
  // Stored as f32 in checkpoints; round now so a saved model reloads identically.
  model.normalizer.mean = model.normalizer.mean.cast<float>().cast<double>();
  model.normalizer.scale = model.normalizer.scale.cast<float>().cast<double>();
  model.net = Denoiser<float>(net_cfg);
  model.train_config = cfg;

  std::mt19937_64 rng(cfg.seed);
  model.net.initialize(rng());
  const Eigen::MatrixXf x_all = model.normalizer.apply(data.windows).cast<float>();
  const Eigen::MatrixXf c_all = data.conditions.cast<float>();

  Adam<float> adam(model.net.params().size(), cfg.learning_rate);
  std::uniform_int_distribution<Eigen::Index> pick(0, data.size() - 1);
  NoisedBatch<float> batch;
  batch.x.resize(x_all.rows(), cfg.batch_size);
  batch.cond.resize(c_all.rows(), cfg.batch_size);
  model.loss_curve.reserve(cfg.steps);
  for (int step = 1; step <= cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch_size; ++b) {
      const Eigen::Index k = pick(rng);
      batch.x.col(b) = x_all.col(k);
      batch.cond.col(b) = c_all.col(k);
    }
    draw_noise(batch, cfg.T, rng);
    auto [loss, grad] = loss_and_grad(model.net, model.schedule, batch);
    if (!std::isfinite(loss) || !grad.allFinite())
      throw Diverged("training diverged at step " + std::to_string(step));
    model.loss_curve.push_back(loss);
    const double progress = static_cast<double>(step - 1) / cfg.steps;
    const double lr = cfg.learning_rate * (cfg.lr_final_fraction +
                                           (1.0 - cfg.lr_final_fraction) * 0.5 * (1.0 + std::cos(kPi * progress)));
    adam.set_learning_rate(lr);
    adam.step(model.net.params(), grad);
    if (hook && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) hook(model, step);
  }
  return model;
}

/// x_hat for one normalized latent.
inline Eigen::VectorXd denoise(const DiffusionModel& model, const Eigen::VectorXd& z, int t,
                               const WaypointCondition& c) {
  model.schedule.check_step(t);
  const Eigen::MatrixXf out = model.net.forward(z.cast<float>(), {t}, c.to_vector().cast<float>());
  return out.col(0).cast<double>();
}

/// Ancestral sampling of one normalized window per condition (one column each).
/// Noise is drawn column by column from `rng`, so results depend only on the seed.
inline Eigen::MatrixXd sample_normalized(const DiffusionModel& model, const std::vector<WaypointCondition>& conds,
                                         std::mt19937_64& rng) {
  const auto B = static_cast<Eigen::Index>(conds.size());
  const int D = model.net.config().data_dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXf cond(kConditionDim, B);
  for (Eigen::Index b = 0; b < B; ++b) cond.col(b) = conds[b].to_vector().cast<float>();
  Eigen::MatrixXd z(D, B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (int r = 0; r < D; ++r) z(r, b) = normal(rng);
  const NoiseSchedule& s = model.schedule;
  for (int t = s.steps(); t >= 1; --t) {
    const Eigen::MatrixXd xhat =
        model.net.forward(z.cast<float>(), std::vector<int>(B, t), cond).cast<double>();
    if (t == 1) return xhat;
    const double ab_t = s.alpha_bar(t), ab_prev = s.alpha_bar(t - 1);
    const double c_x = std::sqrt(ab_prev) * s.beta(t) / (1.0 - ab_t);
    const double c_z = std::sqrt(s.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab_t);
    const double sigma = std::sqrt(s.posterior_variance(t));
    Eigen::MatrixXd noise(D, B);
    for (Eigen::Index b = 0; b < B; ++b)
      for (int r = 0; r < D; ++r) noise(r, b) = normal(rng);
    z = c_x * xhat + c_z * z + sigma * noise;
  }
  return z;
}

inline std::vector<MotionWindow> sample_batch(const DiffusionModel& model, const std::vector<WaypointCondition>& conds,
                                              std::mt19937_64& rng) {
  const Eigen::MatrixXd x = model.normalizer.invert(sample_normalized(model, conds, rng));
  std::vector<MotionWindow> out;
  out.reserve(conds.size());
  for (Eigen::Index b = 0; b < x.cols(); ++b) out.push_back(MotionWindow::unflatten(x.col(b), model.layout));
  return out;
}

inline MotionWindow sample(const DiffusionModel& model, const WaypointCondition& c, std::mt19937_64& rng) {
  return sample_batch(model, {c}, rng).front();
}

/// Long-form generation: splits world waypoints (element 0 is the start pose)
/// into windows sharing boundary waypoints, samples them as one batch, then
/// decodes and stitches.
inline StitchResult generate_long(const DiffusionModel& model, const std::vector<Frame2D>& waypoints,
                                  std::uint64_t seed, RootDecode mode = RootDecode::Bidirectional) {
  const std::vector<WindowPlan> plans = plan_windows(waypoints);
  std::vector<WaypointCondition> conds;
  conds.reserve(plans.size());
  for (const auto& p : plans) conds.push_back(p.condition);
  std::mt19937_64 rng(seed);
  const std::vector<MotionWindow> windows = sample_batch(model, conds, rng);
  return stitch_windows(windows, plans, mode);
}

}  // namespace locoplan
