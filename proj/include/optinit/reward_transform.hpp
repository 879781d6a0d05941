#pragma once

#include <cstddef>
#include <optional>

namespace optinit {

/// Step counter of the current episode: k steps elapsed out of at most T.
struct EpisodeClock {
  std::size_t k = 0;
  std::size_t T = 0;

  bool operator==(const EpisodeClock&) const = default;
};

enum class OptimismMode {
  /// Zero weights encode value |r1st| (1 in normalized units).
  mild,
  /// Zero weights encode |r1st| / (1 - gamma): as if |r1st| arrived every step.
  strong,
};

/**
 * Reward-stream transformer that makes zero-initialized value weights
 * optimistic without knowing the reward scale.
 *
 * Every raw reward r is divided by the magnitude of the first nonzero reward
 * seen, |r1st|, and shifted down by gamma - 1:
 *
 *     r~ = r / |r1st| + (gamma - 1)
 *
 * Since the shift contributes sum_k gamma^k (gamma - 1) = -1 to any discounted
 * return, q~ = q / |r1st| - 1 and a zero value function corresponds to
 * q = |r1st|. Before any nonzero reward the raw reward is 0, which normalizes
 * to 0 under any scale, so the shift is exact from the first step.
 *
 * One instance belongs to one agent run.
 */
class RewardTransform {
 public:
  /// Throws std::invalid_argument for gamma outside (0, 1] or strong mode
  /// with gamma = 1 (1 / (1 - gamma) is undefined).
  explicit RewardTransform(double gamma, OptimismMode mode = OptimismMode::mild,
                           bool shift_active = true);

  /// Transforms one nonterminal reward, capturing |r1st| on the first
  /// nonzero raw value.
  double observe_reward(double raw);

  /// Transforms the reward of the step that ends the episode at clock.k.
  /// The termination reward gamma^(T-k+1) - 1 stands for the shift over
  /// steps k..T and takes the place of this step's own gamma - 1, so the
  /// discounted return equals that of the episode zero-padded to T steps.
  double observe_terminal_reward(double raw, const EpisodeClock& clock);

  /// Value that zero weights encode: in raw reward units once |r1st| is
  /// known, in normalized units before. 0 when the shift is inactive.
  double implied_initial_value() const;

  /// gamma - 1, or 0 when the shift is inactive.
  double shift() const { return shift_active_ ? gamma_ - 1.0 : 0.0; }

  double gamma() const { return gamma_; }
  OptimismMode mode() const { return mode_; }
  bool shift_active() const { return shift_active_; }
  std::optional<double> first_reward_magnitude() const { return first_magnitude_; }

 private:
  void capture(double raw);
  double normalize(double raw) const;

  double gamma_;
  OptimismMode mode_;
  bool shift_active_;
  std::optional<double> first_magnitude_;
};

/// gamma^(T-k+1) - 1, in [-1, 0]. Throws std::logic_error unless 1 <= k <= T.
double termination_reward(const EpisodeClock& clock, double gamma);

}  // namespace optinit
