#include "optinit/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace optinit {

SparseBinaryFeatures::SparseBinaryFeatures(std::size_t total, std::vector<FeatureIndex> active,
                                           bool stacked)
    : total_(total), active_(std::move(active)), stacked_(stacked) {
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i] >= total_) throw std::invalid_argument("feature index out of range");
    if (i > 0 && active_[i] <= active_[i - 1]) {
      throw std::invalid_argument("active feature indices must be strictly increasing");
    }
  }
}

SparseBinaryFeatures SparseBinaryFeatures::from_unsorted(std::size_t total,
                                                         std::vector<FeatureIndex> active) {
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  return SparseBinaryFeatures(total, std::move(active));
}

bool SparseBinaryFeatures::contains(FeatureIndex i) const {
  return std::binary_search(active_.begin(), active_.end(), i);
}

SparseBinaryFeatures stack_with_negation(const SparseBinaryFeatures& f) {
  const std::size_t n = f.total();
  std::vector<FeatureIndex> out(f.active().begin(), f.active().end());
  out.reserve(n);
  auto next_active = f.active().begin();
  for (std::size_t i = 0; i < n; ++i) {
    if (next_active != f.active().end() && *next_active == i) {
      ++next_active;
    } else {
      out.push_back(static_cast<FeatureIndex>(n + i));
    }
  }
  return SparseBinaryFeatures(2 * n, std::move(out), true);
}

double dot(std::span<const double> weights, const SparseBinaryFeatures& f) {
  if (weights.size() != f.total()) {
    throw std::invalid_argument("weight length does not match feature dimensionality");
  }
  double sum = 0.0;
  for (FeatureIndex i : f.active()) sum += weights[i];
  return sum;
}

SparseBinaryFeatures grid_features(const GridFeatureSpec& spec,
                                   std::span<const TileActivation> occupancy, std::size_t action) {
  if (action >= spec.actions) throw std::out_of_range("action out of range");
  const std::size_t base = action * spec.block_size();
  std::vector<FeatureIndex> active;
  active.reserve(occupancy.size());
  for (const TileActivation& t : occupancy) {
    if (t.x >= spec.tiles_x || t.y >= spec.tiles_y || t.channel >= spec.channels) {
      throw std::out_of_range("tile activation out of range");
    }
    active.push_back(static_cast<FeatureIndex>(
        base + (t.y * spec.tiles_x + t.x) * spec.channels + t.channel));
  }
  return SparseBinaryFeatures::from_unsorted(spec.total(), std::move(active));
}

SparseBinaryFeatures state_action_one_hot(std::size_t n_states, std::size_t n_actions,
                                          std::size_t state, std::size_t action) {
  if (state >= n_states || action >= n_actions) throw std::out_of_range("state/action out of range");
  return SparseBinaryFeatures(n_states * n_actions,
                              {static_cast<FeatureIndex>(action * n_states + state)});
}

}  // namespace optinit
