#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "locoplan/error.hpp"

namespace locoplan {

enum class ScheduleFamily { Cosine, Linear };

inline std::string to_string(ScheduleFamily f) { return f == ScheduleFamily::Cosine ? "cosine" : "linear"; }

inline ScheduleFamily schedule_family_from_string(const std::string& s) {
  if (s == "cosine") return ScheduleFamily::Cosine;
  if (s == "linear") return ScheduleFamily::Linear;
  throw InvalidSchedule("unknown schedule family '" + s + "'");
}

/// Cumulative signal fractions alpha_bar[0..T]; alpha_bar[0] is the clean data.
class NoiseSchedule {
 public:
  static constexpr double kMaxBeta = 0.99999;

  explicit NoiseSchedule(std::vector<double> alpha_bar) : alpha_bar_(std::move(alpha_bar)) {
    if (alpha_bar_.size() < 2) throw InvalidSchedule("schedule needs at least one step");
    if (!(alpha_bar_.front() >= 0.999 && alpha_bar_.front() <= 1.0))
      throw InvalidSchedule("alpha_bar[0] must lie in [0.999, 1]");
    for (std::size_t t = 1; t < alpha_bar_.size(); ++t)
      if (!(alpha_bar_[t] < alpha_bar_[t - 1]) || !(alpha_bar_[t] > 0.0))
        throw InvalidSchedule("alpha_bar must be positive and strictly decreasing (step " +
                              std::to_string(t) + ")");
    if (!(alpha_bar_.back() <= 1e-4))
      throw InvalidSchedule("alpha_bar[T] must be <= 1e-4 so the last latent is ~N(0, I)");
  }

  /// Cosine schedule with offset s; betas clipped at kMaxBeta.
  static NoiseSchedule cosine(int T, double s = 0.008) {
    if (T < 1) throw InvalidSchedule("T must be >= 1");
    auto f = [&](double t) {
      const double c = std::cos((t / T + s) / (1.0 + s) * M_PI / 2.0);
      return c * c;
    };
    std::vector<double> ab(T + 1);
    ab[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double beta = std::min(1.0 - f(t) / f(t - 1), kMaxBeta);
      ab[t] = ab[t - 1] * (1.0 - beta);
    }
    return NoiseSchedule(std::move(ab));
  }

  /// Linear betas spanning [1e-4, 0.02] at T = 1000, rescaled to T steps.
  static NoiseSchedule linear(int T) {
    if (T < 1) throw InvalidSchedule("T must be >= 1");
    const double scale = 1000.0 / T;
    const double b0 = std::min(scale * 1e-4, kMaxBeta), b1 = std::min(scale * 0.02, kMaxBeta);
    std::vector<double> ab(T + 1);
    ab[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double beta = T == 1 ? b1 : b0 + (b1 - b0) * (t - 1) / (T - 1);
      ab[t] = ab[t - 1] * (1.0 - beta);
    }
    return NoiseSchedule(std::move(ab));
  }

  static NoiseSchedule make(ScheduleFamily family, int T) {
    return family == ScheduleFamily::Cosine ? cosine(T) : linear(T);
  }

  int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int t) const { return alpha_bar_.at(t); }
  double beta(int t) const { return 1.0 - alpha_bar_.at(t) / alpha_bar_.at(t - 1); }
  double alpha(int t) const { return 1.0 - beta(t); }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

  /// Variance of the ancestral step from t to t-1.
  double posterior_variance(int t) const {
    return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
  }

  void check_step(int t) const {
    if (t < 1 || t > steps())
      throw StepOutOfRange("step " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }

 private:
  std::vector<double> alpha_bar_;
};

/// Samples q(z_t | x) = N(sqrt(alpha_bar_t) x, (1 - alpha_bar_t) I) given standard-normal `eps`.
template <class Derived, class DerivedEps>
auto forward_noise(const NoiseSchedule& schedule, const Eigen::MatrixBase<Derived>& x, int t,
                   const Eigen::MatrixBase<DerivedEps>& eps) {
  schedule.check_step(t);
  if (x.rows() != eps.rows() || x.cols() != eps.cols()) throw ShapeMismatch("forward_noise: x/eps shape");
  using S = typename Derived::Scalar;
  const S a = static_cast<S>(std::sqrt(schedule.alpha_bar(t)));
  const S b = static_cast<S>(std::sqrt(1.0 - schedule.alpha_bar(t)));
  return typename Derived::PlainObject(a * x + b * eps);
}

}  // namespace locoplan
