#pragma once

// FiLM-modulated MLP denoiser x_hat(z_t, t, c) with a hand-written reverse
// pass. Batches are stored column-wise: one sample per column.
//
//   e     = [sinusoid(t) ; W_c c + b_c]
//   h_0   = z_t
//   h_l   = silu(gamma_l(e) * (W_l h_{l-1}) + beta_l(e))      l = 1..L
//   x_hat = W_out h_L + b_out
//
// gamma_l(e) = G_l e + g_l and beta_l(e) = B_l e + b_l are the FiLM scale and
// shift. All weights live in one flat vector addressed through a layout.

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "locoplan/error.hpp"

namespace locoplan {

struct DenoiserConfig {
  int data_dim = 0;
  int cond_dim = 18;
  int cond_embed = 18;
  int time_embed = 32;
  int width = 256;
  int layers = 4;

  int embed_dim() const { return time_embed + cond_embed; }
  friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

struct TensorSlot {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Named tensors packed contiguously (column-major) into a flat vector.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const DenoiserConfig& cfg) {
    if (cfg.data_dim < 1 || cfg.cond_dim < 1 || cfg.cond_embed < 0 || cfg.time_embed < 0 ||
        cfg.time_embed % 2 != 0 || cfg.width < 1 || cfg.layers < 1)
      throw ShapeMismatch("invalid denoiser configuration");
    const int E = cfg.embed_dim();
    add("cond.W", cfg.cond_embed, cfg.cond_dim);
    add("cond.b", cfg.cond_embed, 1);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string p = "layer" + std::to_string(l) + ".";
      add(p + "W", cfg.width, l == 0 ? cfg.data_dim : cfg.width);
      add(p + "gamma.W", cfg.width, E);
      add(p + "gamma.b", cfg.width, 1);
      add(p + "beta.W", cfg.width, E);
      add(p + "beta.b", cfg.width, 1);
    }
    add("out.W", cfg.data_dim, cfg.width);
    add("out.b", cfg.data_dim, 1);
  }

  const std::vector<TensorSlot>& slots() const { return slots_; }
  std::size_t total() const { return total_; }

  // Slot indices for the fixed ordering above.
  static constexpr int cond_W() { return 0; }
  static constexpr int cond_b() { return 1; }
  static constexpr int layer_W(int l) { return 2 + 5 * l; }
  static constexpr int gamma_W(int l) { return 3 + 5 * l; }
  static constexpr int gamma_b(int l) { return 4 + 5 * l; }
  static constexpr int beta_W(int l) { return 5 + 5 * l; }
  static constexpr int beta_b(int l) { return 6 + 5 * l; }
  int out_W() const { return static_cast<int>(slots_.size()) - 2; }
  int out_b() const { return static_cast<int>(slots_.size()) - 1; }

 private:
  void add(std::string name, int rows, int cols) {
    slots_.push_back({std::move(name), rows, cols, total_});
    total_ += static_cast<std::size_t>(rows) * cols;
  }

  std::vector<TensorSlot> slots_;
  std::size_t total_ = 0;
};

/// Sinusoidal embedding of diffusion steps, one column per step.
template <class S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> timestep_embedding(const std::vector<int>& steps, int dim) {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> e(dim, static_cast<Eigen::Index>(steps.size()));
  const int half = dim / 2;
  for (std::size_t b = 0; b < steps.size(); ++b) {
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(1000.0) * k / std::max(half, 1));
      e(k, b) = static_cast<S>(std::sin(steps[b] * freq));
      e(k + half, b) = static_cast<S>(std::cos(steps[b] * freq));
    }
  }
  return e;
}

template <class S>
class Denoiser {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  Denoiser() = default;
  explicit Denoiser(const DenoiserConfig& cfg)
      : cfg_(cfg), layout_(cfg), params_(Vec::Zero(static_cast<Eigen::Index>(layout_.total()))) {}

  const DenoiserConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  const Vec& params() const { return params_; }
  Vec& params() { return params_; }

  ConstMatMap tensor(int slot) const { return view(params_, slot); }
  MatMap tensor(int slot) { return view(params_, slot); }

  ConstMatMap view(const Vec& flat, int slot) const {
    const TensorSlot& s = layout_.slots()[slot];
    return ConstMatMap(flat.data() + s.offset, s.rows, s.cols);
  }
  MatMap view(Vec& flat, int slot) const {
    const TensorSlot& s = layout_.slots()[slot];
    return MatMap(flat.data() + s.offset, s.rows, s.cols);
  }

  /// Fan-in scaled Gaussian weights; FiLM starts at scale 1, shift 0.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < layout_.slots().size(); ++k) {
      const TensorSlot& s = layout_.slots()[k];
      auto m = tensor(static_cast<int>(k));
      const bool bias = s.cols == 1;
      const bool film = s.name.find("gamma") != std::string::npos || s.name.find("beta") != std::string::npos;
      double stddev = bias ? 0.0 : 1.0 / std::sqrt(static_cast<double>(s.cols));
      if (film && !bias) stddev *= 0.1;
      if (static_cast<int>(k) == layout_.out_W()) stddev *= 0.5;
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<S>(stddev * normal(rng));
      if (bias && s.name.find("gamma") != std::string::npos) m.setOnes();
    }
  }

  struct Cache {
    Mat embed;                // E x B
    Mat cond;                 // cond_dim x B
    std::vector<Mat> inputs;  // h_{l-1}
    std::vector<Mat> pre;     // W_l h_{l-1}
    std::vector<Mat> gamma;
    std::vector<Mat> act_in;  // gamma * pre + beta
    Mat last;                 // h_L
  };

  /// x_hat for a batch. `z` is data_dim x B, `cond` is cond_dim x B.
  Mat forward(const Mat& z, const std::vector<int>& steps, const Mat& cond, Cache* cache = nullptr) const {
    check_shapes(z, steps, cond);
    const Eigen::Index B = z.cols();
    Mat e(cfg_.embed_dim(), B);
    if (cfg_.time_embed > 0) e.topRows(cfg_.time_embed) = timestep_embedding<S>(steps, cfg_.time_embed);
    if (cfg_.cond_embed > 0)
      e.bottomRows(cfg_.cond_embed) =
          (tensor(ParamLayout::cond_W()) * cond).colwise() + tensor(ParamLayout::cond_b()).col(0);

    if (cache) {
      cache->embed = e;
      cache->cond = cond;
      cache->inputs.clear();
      cache->pre.clear();
      cache->gamma.clear();
      cache->act_in.clear();
    }
    Mat h = z;
    for (int l = 0; l < cfg_.layers; ++l) {
      Mat pre = tensor(ParamLayout::layer_W(l)) * h;
      Mat gamma = (tensor(ParamLayout::gamma_W(l)) * e).colwise() + tensor(ParamLayout::gamma_b(l)).col(0);
      Mat u = (gamma.array() * pre.array()).matrix();
      u += (tensor(ParamLayout::beta_W(l)) * e).colwise() + tensor(ParamLayout::beta_b(l)).col(0);
      Mat next = silu(u);
      if (cache) {
        cache->inputs.push_back(std::move(h));
        cache->pre.push_back(std::move(pre));
        cache->gamma.push_back(std::move(gamma));
        cache->act_in.push_back(std::move(u));
      }
      h = std::move(next);
    }
    Mat out = (tensor(layout_.out_W()) * h).colwise() + tensor(layout_.out_b()).col(0);
    if (cache) cache->last = std::move(h);
    return out;
  }

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(x_hat).
  void backward(const Cache& cache, const Mat& d_out, Vec& grad) const {
    if (grad.size() != params_.size()) grad = Vec::Zero(params_.size());
    view(grad, layout_.out_W()).noalias() += d_out * cache.last.transpose();
    view(grad, layout_.out_b()).col(0) += d_out.rowwise().sum();
    Mat dh = tensor(layout_.out_W()).transpose() * d_out;
    Mat de = Mat::Zero(cfg_.embed_dim(), d_out.cols());
    for (int l = cfg_.layers - 1; l >= 0; --l) {
      const Mat& u = cache.act_in[l];
      const Mat du = (dh.array() * silu_grad(u).array()).matrix();
      const Mat d_gamma = (du.array() * cache.pre[l].array()).matrix();
      const Mat d_pre = (du.array() * cache.gamma[l].array()).matrix();
      view(grad, ParamLayout::gamma_W(l)).noalias() += d_gamma * cache.embed.transpose();
      view(grad, ParamLayout::gamma_b(l)).col(0) += d_gamma.rowwise().sum();
      view(grad, ParamLayout::beta_W(l)).noalias() += du * cache.embed.transpose();
      view(grad, ParamLayout::beta_b(l)).col(0) += du.rowwise().sum();
      de.noalias() += tensor(ParamLayout::gamma_W(l)).transpose() * d_gamma;
      de.noalias() += tensor(ParamLayout::beta_W(l)).transpose() * du;
      view(grad, ParamLayout::layer_W(l)).noalias() += d_pre * cache.inputs[l].transpose();
      if (l > 0) dh = tensor(ParamLayout::layer_W(l)).transpose() * d_pre;
    }
    if (cfg_.cond_embed > 0) {
      const Mat dc = de.bottomRows(cfg_.cond_embed);
      view(grad, ParamLayout::cond_W()).noalias() += dc * cache.cond.transpose();
      view(grad, ParamLayout::cond_b()).col(0) += dc.rowwise().sum();
    }
  }

  template <class T>
  Denoiser<T> cast() const {
    Denoiser<T> out(cfg_);
    out.params() = params_.template cast<T>();
    return out;
  }

 private:
  static Mat silu(const Mat& u) {
    return (u.array() / (S(1) + (-u.array()).exp())).matrix();
  }
  static Mat silu_grad(const Mat& u) {
    const auto sig = (S(1) / (S(1) + (-u.array()).exp()));
    return (sig * (S(1) + u.array() * (S(1) - sig))).matrix();
  }

  void check_shapes(const Mat& z, const std::vector<int>& steps, const Mat& cond) const {
    if (z.rows() != cfg_.data_dim) throw ShapeMismatch("denoiser: z has wrong dimension");
    if (cond.rows() != cfg_.cond_dim) throw ShapeMismatch("denoiser: condition has wrong dimension");
    if (cond.cols() != z.cols() || static_cast<Eigen::Index>(steps.size()) != z.cols())
      throw ShapeMismatch("denoiser: batch sizes differ");
  }

  DenoiserConfig cfg_;
  ParamLayout layout_;
  Vec params_;
};

}  // namespace locoplan
