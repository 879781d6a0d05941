#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "optinit/features.hpp"
#include "optinit/rng.hpp"

using namespace optinit;

namespace {

std::vector<FeatureIndex> as_vector(const SparseBinaryFeatures& f) {
  return {f.active().begin(), f.active().end()};
}

std::vector<double> dense(const SparseBinaryFeatures& f) {
  std::vector<double> x(f.total(), 0.0);
  for (FeatureIndex i : f.active()) x[i] = 1.0;
  return x;
}

SparseBinaryFeatures random_features(Rng& rng, std::size_t n, double p) {
  std::vector<FeatureIndex> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(p)) active.push_back(static_cast<FeatureIndex>(i));
  }
  return SparseBinaryFeatures(n, active);
}

}  // namespace

TEST_CASE("construction validates the active set") {
  const SparseBinaryFeatures f(5, {0, 2, 4});
  CHECK(f.norm() == 3);
  CHECK(f.contains(2));
  CHECK_FALSE(f.contains(3));
  CHECK_FALSE(f.stacked());
  CHECK_THROWS_AS(SparseBinaryFeatures(5, {1, 5}), std::invalid_argument);
  CHECK_THROWS_AS(SparseBinaryFeatures(5, {2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SparseBinaryFeatures(5, {2, 2}), std::invalid_argument);
  CHECK(as_vector(SparseBinaryFeatures::from_unsorted(6, {4, 1, 4, 0})) ==
        std::vector<FeatureIndex>{0, 1, 4});
}

TEST_CASE("stack_with_negation examples") {
  const SparseBinaryFeatures s = stack_with_negation(SparseBinaryFeatures(3, {1}));
  CHECK(s.total() == 6);
  CHECK(as_vector(s) == std::vector<FeatureIndex>{1, 3, 5});
  CHECK(s.norm() == 3);
  CHECK(s.stacked());

  const SparseBinaryFeatures empty = stack_with_negation(SparseBinaryFeatures(4, {}));
  CHECK(as_vector(empty) == std::vector<FeatureIndex>{4, 5, 6, 7});

  const SparseBinaryFeatures full = stack_with_negation(SparseBinaryFeatures(3, {0, 1, 2}));
  CHECK(as_vector(full) == std::vector<FeatureIndex>{0, 1, 2});

  const SparseBinaryFeatures none = stack_with_negation(SparseBinaryFeatures(0, {}));
  CHECK(none.total() == 0);
  CHECK(none.norm() == 0);
}

TEST_CASE("stacked vectors have norm n and exactly one of i, n + i active") {
  Rng rng(11);
  const std::size_t n = 50;
  const std::vector<double> theta(2 * n, 1.0 / static_cast<double>(n));
  for (int trial = 0; trial < 1000; ++trial) {
    const SparseBinaryFeatures f = random_features(rng, n, rng.uniform01());
    const SparseBinaryFeatures s = stack_with_negation(f);
    CHECK(s.norm() == n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<FeatureIndex>(i);
      CHECK(s.contains(idx) == f.contains(idx));
      CHECK(s.contains(static_cast<FeatureIndex>(n + i)) != f.contains(idx));
    }
    CHECK(std::abs(dot(theta, s) - 1.0) <= 1e-12);
  }
}

TEST_CASE("sparse dot matches a dense reference") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(300);
    const SparseBinaryFeatures f = random_features(rng, n, 0.2);
    std::vector<double> w(n);
    for (double& x : w) x = rng.uniform(-3.0, 3.0);
    const std::vector<double> x = dense(f);
    double reference = 0.0;
    for (std::size_t i = 0; i < n; ++i) reference += w[i] * x[i];
    CHECK(std::abs(dot(w, f) - reference) <= 1e-12);
  }
}

TEST_CASE("dot is linear in the weights") {
  Rng rng(9);
  const SparseBinaryFeatures f = random_features(rng, 40, 0.4);
  std::vector<double> a(40), b(40), mix(40);
  for (std::size_t i = 0; i < 40; ++i) {
    a[i] = rng.uniform(-1.0, 1.0);
    b[i] = rng.uniform(-1.0, 1.0);
    mix[i] = 2.5 * a[i] - 0.75 * b[i];
  }
  CHECK(dot(mix, f) == doctest::Approx(2.5 * dot(a, f) - 0.75 * dot(b, f)).epsilon(1e-12));
  const std::vector<double> short_w(39, 0.0);
  CHECK_THROWS_AS(dot(short_w, f), std::invalid_argument);
}

TEST_CASE("grid feature dimensions") {
  const GridFeatureSpec spec{14, 16, 128, 18};
  CHECK(spec.block_size() == 28672);
  CHECK(spec.total() == 28672 * 18);

  const GridFeatureSpec tiny{1, 1, 1, 1};
  const std::vector<TileActivation> one{{0, 0, 0}};
  CHECK(as_vector(grid_features(tiny, one, 0)) == std::vector<FeatureIndex>{0});
}

TEST_CASE("grid features: action blocks are disjoint and the encoding is injective") {
  const GridFeatureSpec spec{4, 3, 2, 3};
  std::set<FeatureIndex> seen;
  for (std::size_t a = 0; a < spec.actions; ++a) {
    for (std::size_t y = 0; y < spec.tiles_y; ++y) {
      for (std::size_t x = 0; x < spec.tiles_x; ++x) {
        for (std::size_t c = 0; c < spec.channels; ++c) {
          const std::vector<TileActivation> one{{x, y, c}};
          const SparseBinaryFeatures f = grid_features(spec, one, a);
          REQUIRE(f.norm() == 1);
          const FeatureIndex i = f.active()[0];
          CHECK(i / spec.block_size() == a);
          CHECK(i == a * spec.block_size() + (y * spec.tiles_x + x) * spec.channels + c);
          CHECK(seen.insert(i).second);
        }
      }
    }
  }
  CHECK(seen.size() == spec.total());

  const std::vector<TileActivation> dup{{1, 1, 0}, {1, 1, 0}, {0, 2, 1}};
  CHECK(grid_features(spec, dup, 1).norm() == 2);
}

TEST_CASE("grid features reject out-of-range input") {
  const GridFeatureSpec spec{4, 3, 2, 3};
  const std::vector<TileActivation> ok{{0, 0, 0}};
  CHECK_THROWS_AS(grid_features(spec, ok, 3), std::out_of_range);
  for (const TileActivation& bad : {TileActivation{4, 0, 0}, TileActivation{0, 3, 0},
                                    TileActivation{0, 0, 2}}) {
    const std::vector<TileActivation> v{bad};
    CHECK_THROWS_AS(grid_features(spec, v, 0), std::out_of_range);
  }
}

TEST_CASE("state-action one-hot") {
  const SparseBinaryFeatures f = state_action_one_hot(5, 2, 3, 1);
  CHECK(f.total() == 10);
  CHECK(as_vector(f) == std::vector<FeatureIndex>{8});
  CHECK_THROWS_AS(state_action_one_hot(5, 2, 5, 0), std::out_of_range);
  CHECK_THROWS_AS(state_action_one_hot(5, 2, 0, 2), std::out_of_range);
}
