#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace optinit {

using FeatureIndex = std::uint32_t;

/// Binary feature vector phi stored as the sorted set of its active indices.
class SparseBinaryFeatures {
 public:
  SparseBinaryFeatures() = default;

  /// active must be strictly increasing and below total.
  SparseBinaryFeatures(std::size_t total, std::vector<FeatureIndex> active, bool stacked = false);

  /// Sorts and deduplicates before validating.
  static SparseBinaryFeatures from_unsorted(std::size_t total, std::vector<FeatureIndex> active);

  std::size_t total() const { return total_; }
  std::span<const FeatureIndex> active() const { return active_; }
  /// Number of active entries, |phi|.
  std::size_t norm() const { return active_.size(); }
  bool contains(FeatureIndex i) const;
  /// True when produced by stack_with_negation (dimensionality doubled).
  bool stacked() const { return stacked_; }

  bool operator==(const SparseBinaryFeatures&) const = default;

 private:
  std::size_t total_ = 0;
  std::vector<FeatureIndex> active_;
  bool stacked_ = false;
};

/// [phi, not phi]: total 2n, index i active iff i in phi, n + i active iff
/// i not in phi. The result always has norm n.
SparseBinaryFeatures stack_with_negation(const SparseBinaryFeatures& f);

/// theta^T phi in O(|phi|). Throws std::invalid_argument on length mismatch.
double dot(std::span<const double> weights, const SparseBinaryFeatures& f);

struct GridFeatureSpec {
  std::size_t tiles_x = 0;
  std::size_t tiles_y = 0;
  std::size_t channels = 0;
  std::size_t actions = 0;

  /// Features per action: tiles_x * tiles_y * channels.
  std::size_t block_size() const { return tiles_x * tiles_y * channels; }
  std::size_t total() const { return block_size() * actions; }
};

struct TileActivation {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t channel = 0;
};

/// Action-block encoding of per-tile channel activations:
/// index = action * block_size + (y * tiles_x + x) * channels + channel.
/// Throws std::out_of_range for an invalid tile, channel or action.
SparseBinaryFeatures grid_features(const GridFeatureSpec& spec,
                                   std::span<const TileActivation> occupancy, std::size_t action);

/// One-hot (state, action) encoding with action blocks: index = action * n_states + state.
SparseBinaryFeatures state_action_one_hot(std::size_t n_states, std::size_t n_actions,
                                          std::size_t state, std::size_t action);

}  // namespace optinit
