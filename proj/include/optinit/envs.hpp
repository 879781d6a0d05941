#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "optinit/features.hpp"
#include "optinit/mdp.hpp"
#include "optinit/reward_transform.hpp"
#include "optinit/rng.hpp"

namespace optinit {

/// Environment-specific state descriptor; each environment documents its layout.
struct Observation {
  std::vector<std::int32_t> values;

  bool operator==(const Observation&) const = default;
};

struct EnvStep {
  Observation observation;
  double raw_reward = 0.0;
  bool terminal = false;
  EpisodeClock clock;
};

/// Raised when export_tabular is called on an environment without an exact MDP.
class NotExportable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/**
 * Episodic environment. The base class owns the episode clock: every step
 * advances k, and the T-th step is terminal regardless of the state.
 * Stepping before reset or after a terminal step throws std::logic_error.
 */
class Environment {
 public:
  explicit Environment(std::size_t max_steps);
  virtual ~Environment() = default;

  EnvStep reset();
  EnvStep step(std::size_t action);

  std::size_t max_steps() const { return max_steps_; }
  const EpisodeClock& clock() const { return clock_; }

  virtual std::string name() const = 0;
  virtual std::size_t n_actions() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual SparseBinaryFeatures features_for(const Observation& obs, std::size_t action) const = 0;
  /// |phi(s, a)| when it is the same for every state and action.
  virtual std::optional<std::size_t> constant_feature_norm() const = 0;

  virtual bool exportable() const { return false; }
  /// Exact MDP of the dynamics (ignoring the step cap). Throws NotExportable.
  virtual TabularMDP export_tabular(double gamma) const;
  /// Row of the exported MDP for an observation.
  virtual std::size_t state_index(const Observation& obs) const;

 protected:
  struct Outcome {
    Observation observation;
    double raw_reward = 0.0;
    bool terminal = false;
  };
  virtual Observation do_reset() = 0;
  virtual Outcome do_step(std::size_t action) = 0;

 private:
  std::size_t max_steps_;
  EpisodeClock clock_;
  bool running_ = false;
};

struct Lane {
  /// +1 moves right, -1 moves left.
  int direction = 1;
  /// A car advances one cell every `period` steps.
  std::size_t period = 1;
  std::size_t cars = 1;
};

struct CrossingParams {
  std::size_t width = 10;
  std::size_t height = 10;
  /// 3 = {up, down, noop}; more actions are accepted and act as noop.
  std::size_t n_actions = 3;
  std::size_t max_steps = 500;
  double reward_on_cross = 1.0;
  /// Rows 1..height-2 from the top; empty means default_lanes(height).
  std::vector<Lane> lanes;
  std::uint64_t seed = 0;

  static std::vector<Lane> default_lanes(std::size_t height);
};

/**
 * Street-crossing world. The agent walks a fixed column from the bottom row
 * to the top row through car lanes. Reaching the top scores reward_on_cross
 * and returns the agent to the bottom; a collision sends it back to the
 * bottom with no reward. Episodes always last max_steps.
 *
 * Observation layout: [agent_x, agent_y, car_x for each car, lane by lane].
 * Features: width x height tiles with channels {agent, car}, action blocks.
 */
class CrossingWorld final : public Environment {
 public:
  static constexpr std::size_t kUp = 0;
  static constexpr std::size_t kDown = 1;
  static constexpr std::size_t kNoop = 2;
  static constexpr std::size_t kAgentChannel = 0;
  static constexpr std::size_t kCarChannel = 1;

  explicit CrossingWorld(CrossingParams params = {});

  std::string name() const override { return "crossing"; }
  std::size_t n_actions() const override { return params_.n_actions; }
  std::size_t feature_dim() const override { return grid_.total(); }
  SparseBinaryFeatures features_for(const Observation& obs, std::size_t action) const override;
  std::optional<std::size_t> constant_feature_norm() const override;

  const CrossingParams& params() const { return params_; }
  const GridFeatureSpec& grid() const { return grid_; }

 protected:
  Observation do_reset() override;
  Outcome do_step(std::size_t action) override;

 private:
  Observation observe() const;
  bool car_at(std::size_t x, std::size_t y) const;
  void advance_cars();

  struct Car {
    std::size_t lane;
    std::size_t x;
  };

  CrossingParams params_;
  GridFeatureSpec grid_;
  Rng rng_;
  std::size_t agent_x_ = 0;
  std::size_t agent_y_ = 0;
  std::size_t tick_ = 0;
  std::vector<Car> cars_;
};

struct CorridorParams {
  std::size_t length = 60;
  std::vector<std::size_t> intermediate_cells = {20, 40};
  double intermediate_reward = 100.0;
  std::vector<std::size_t> hazard_cells = {10, 30, 50};
  double hazard_reward = -25.0;
  /// Stand-in for a goal reward much larger than the intermediate ones.
  double goal_reward = 1000.0;
  std::size_t max_steps = 300;
};

/**
 * One-dimensional corridor: start at cell 0, goal (terminal) at the last
 * cell. Intermediate cells pay once per episode; hazard cells pay their
 * negative reward on every entry. Actions: 0 = left, 1 = right.
 *
 * Observation layout: [position, consumed-intermediate bitmask].
 * Features: position one-hot, action blocks.
 */
class CorridorWorld final : public Environment {
 public:
  static constexpr std::size_t kLeft = 0;
  static constexpr std::size_t kRight = 1;

  explicit CorridorWorld(CorridorParams params = {});

  std::string name() const override { return "corridor"; }
  std::size_t n_actions() const override { return 2; }
  std::size_t feature_dim() const override { return params_.length * 2; }
  SparseBinaryFeatures features_for(const Observation& obs, std::size_t action) const override;
  std::optional<std::size_t> constant_feature_norm() const override { return 1; }

  /// Dense export is limited to this many states.
  static constexpr std::size_t kMaxExportStates = 4096;

  bool exportable() const override;
  /// States are (position, consumed mask); goal states are terminal.
  TabularMDP export_tabular(double gamma) const override;
  std::size_t state_index(const Observation& obs) const override;

  const CorridorParams& params() const { return params_; }

 protected:
  Observation do_reset() override;
  Outcome do_step(std::size_t action) override;

 private:
  struct Move {
    std::size_t position;
    std::uint32_t mask;
    double reward;
    bool terminal;
  };
  Move transition(std::size_t position, std::uint32_t mask, std::size_t action) const;

  CorridorParams params_;
  std::size_t position_ = 0;
  std::uint32_t consumed_ = 0;
};

/**
 * Samples an explicit TabularMDP from a fixed start state. Entering a
 * terminal state ends the episode.
 *
 * Observation layout: [state]. Features: (state, action) one-hot.
 */
class TabularEnv final : public Environment {
 public:
  TabularEnv(TabularMDP mdp, std::size_t start_state, std::size_t max_steps, std::uint64_t seed,
             std::string name = "tabular");

  std::string name() const override { return name_; }
  std::size_t n_actions() const override { return mdp_.n_actions(); }
  std::size_t feature_dim() const override { return mdp_.n_states() * mdp_.n_actions(); }
  SparseBinaryFeatures features_for(const Observation& obs, std::size_t action) const override;
  std::optional<std::size_t> constant_feature_norm() const override { return 1; }

  bool exportable() const override { return true; }
  /// The wrapped MDP with its discount replaced by gamma.
  TabularMDP export_tabular(double gamma) const override;
  std::size_t state_index(const Observation& obs) const override;

  const TabularMDP& mdp() const { return mdp_; }

 protected:
  Observation do_reset() override;
  Outcome do_step(std::size_t action) override;

 private:
  TabularMDP mdp_;
  std::size_t start_;
  std::string name_;
  Rng rng_;
  std::size_t state_ = 0;
};

/// n-state chain: actions 0 = left, 1 = right; walls clamp; entering the last
/// state pays 1 and is terminal.
TabularMDP chain_mdp(std::size_t n_states, double gamma);

/// Every transition pays 0; a random dense MDP with no terminals.
TabularMDP zero_reward_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                           std::uint64_t seed);

}  // namespace optinit
