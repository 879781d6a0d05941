#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optinit/features.hpp"
#include "optinit/reward_transform.hpp"
#include "optinit/rng.hpp"

namespace optinit {

enum class InitStrategy {
  zero,                   ///< theta = 0 on raw rewards.
  constant_norm_weights,  ///< theta_i = 1/|phi| for features of constant norm.
  stacked,                ///< theta_i = 1/|phi| on [phi, not phi]; the caller stacks.
  shift_optimistic,       ///< theta = 0 with the normalizing, shifting reward transform.
  shift_optimistic_strong,
};

enum class TraceKind { replacing, accumulating };

std::string_view to_string(InitStrategy s);
/// Throws std::invalid_argument for an unknown name.
InitStrategy parse_init_strategy(std::string_view name);
std::string_view to_string(TraceKind k);
TraceKind parse_trace_kind(std::string_view name);

/// True for the strategies that need a constant feature norm at construction.
bool needs_feature_norm(InitStrategy s);
bool uses_reward_transform(InitStrategy s);

struct SarsaConfig {
  double alpha = 0.01;
  double gamma = 0.99;
  double lambda = 0.9;
  double epsilon = 0.05;
  TraceKind trace_kind = TraceKind::replacing;
  double trace_cutoff = 1e-8;
  InitStrategy init_strategy = InitStrategy::zero;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/**
 * Sarsa(lambda) over sparse binary features with epsilon-greedy control.
 *
 * Q(s, a) = theta^T phi(s, a). Each update computes the TD error
 *   delta = r + gamma Q(s', a') - Q(s, a)   (bootstrap dropped on termination),
 * raises the traces of phi(s, a), applies theta += alpha delta e and then
 * decays e by gamma lambda, dropping entries below the cutoff. Shift
 * strategies feed r through a RewardTransform; the rest use the raw reward.
 */
class SarsaAgent {
 public:
  /// feature_norm is the guaranteed |phi| and is required by
  /// constant_norm_weights and stacked (where dim is already doubled).
  SarsaAgent(std::size_t dim, const SarsaConfig& config,
             std::optional<std::size_t> feature_norm = std::nullopt);

  double q_value(const SparseBinaryFeatures& phi) const;

  /// Epsilon-greedy over one feature vector per action; greedy ties are
  /// broken uniformly at random. Throws std::invalid_argument if empty.
  std::size_t select_action(std::span<const SparseBinaryFeatures> features_per_action);

  /// One Sarsa(lambda) update. phi_next is null iff the episode ended on
  /// this step, in which case the traces are cleared afterwards.
  /// Returns the TD error.
  double step_update(const SparseBinaryFeatures& phi_t, double raw_reward,
                     const SparseBinaryFeatures* phi_next, const EpisodeClock& clock);

  /// Drops all eligibility (for episodes cut short by the caller).
  void clear_traces();

  std::span<const double> weights() const { return weights_; }
  void set_weights(std::span<const double> w);
  std::size_t dim() const { return weights_.size(); }
  const SarsaConfig& config() const { return config_; }
  const RewardTransform* transform() const { return transform_ ? &*transform_ : nullptr; }

  std::size_t trace_count() const { return trace_indices_.size(); }
  double trace(FeatureIndex i) const { return trace_values_[i]; }
  /// Active trace indices in insertion order.
  std::span<const FeatureIndex> trace_indices() const { return trace_indices_; }

 private:
  void check_dim(const SparseBinaryFeatures& phi) const;

  SarsaConfig config_;
  std::vector<double> weights_;
  std::vector<double> trace_values_;
  std::vector<FeatureIndex> trace_indices_;
  std::vector<std::uint8_t> in_trace_;
  std::optional<RewardTransform> transform_;
  Rng rng_;
  std::vector<std::size_t> ties_;
};

// Weight snapshot format: a header line "optinit-weights 1 <dim>" followed by
// one value per line printed with 17 significant digits (exact round trip).
void write_weights(std::ostream& out, std::span<const double> weights);
std::vector<double> read_weights(std::istream& in);
void save_weights(const std::filesystem::path& path, std::span<const double> weights);
std::vector<double> load_weights(const std::filesystem::path& path);

}  // namespace optinit
