#include "optinit/reward_transform.hpp"

#include <cmath>
#include <stdexcept>

namespace optinit {

RewardTransform::RewardTransform(double gamma, OptimismMode mode, bool shift_active)
    : gamma_(gamma), mode_(mode), shift_active_(shift_active) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (mode == OptimismMode::strong && gamma == 1.0) {
    throw std::invalid_argument("strong optimism needs gamma < 1");
  }
}

void RewardTransform::capture(double raw) {
  if (!first_magnitude_ && raw != 0.0) first_magnitude_ = std::abs(raw);
}

double RewardTransform::normalize(double raw) const {
  // Before |r1st| is captured the raw reward is necessarily 0.
  if (!first_magnitude_) return 0.0;
  const double scaled = raw / *first_magnitude_;
  return mode_ == OptimismMode::strong ? (1.0 - gamma_) * scaled : scaled;
}

double RewardTransform::observe_reward(double raw) {
  capture(raw);
  return normalize(raw) + shift();
}

double RewardTransform::observe_terminal_reward(double raw, const EpisodeClock& clock) {
  capture(raw);
  if (!shift_active_) return normalize(raw);
  return normalize(raw) + termination_reward(clock, gamma_);
}

double RewardTransform::implied_initial_value() const {
  if (!shift_active_) return 0.0;
  const double normalized = mode_ == OptimismMode::strong ? 1.0 / (1.0 - gamma_) : 1.0;
  return first_magnitude_ ? normalized * *first_magnitude_ : normalized;
}

double termination_reward(const EpisodeClock& clock, double gamma) {
  if (clock.k < 1 || clock.k > clock.T) {
    throw std::logic_error("termination reward needs 1 <= k <= T");
  }
  return std::pow(gamma, static_cast<double>(clock.T - clock.k + 1)) - 1.0;
}

}  // namespace optinit
