#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace optinit {

/// Raised when successive approximation does not reach the requested
/// tolerance within the sweep cap (typically gamma = 1 with an improper policy).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Finite MDP with dense (s, a, s') tables of transition probabilities and
 * expected rewards. Terminal states are absorbing self-loops with zero
 * reward, so the same solvers handle episodic and continuing problems.
 *
 * Instances are immutable; build them with MdpBuilder.
 */
class TabularMDP {
 public:
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }

  double prob(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[offset(s, a) + next];
  }
  double reward(std::size_t s, std::size_t a, std::size_t next) const {
    return reward_[offset(s, a) + next];
  }
  bool is_terminal(std::size_t s) const { return terminal_[s] != 0; }
  std::vector<std::size_t> terminal_states() const;

  /// Flat row-major (s, a, s') views, length n_states * n_actions * n_states.
  const std::vector<double>& transition_table() const { return transition_; }
  const std::vector<double>& reward_table() const { return reward_; }

  bool operator==(const TabularMDP&) const = default;

 private:
  friend class MdpBuilder;
  TabularMDP() = default;

  std::size_t offset(std::size_t s, std::size_t a) const {
    return (s * n_actions_ + a) * n_states_;
  }

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  double gamma_ = 1.0;
  std::vector<double> transition_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> terminal_;
};

class MdpBuilder {
 public:
  MdpBuilder(std::size_t n_states, std::size_t n_actions, double gamma);

  /// Sets P(next | s, a) and the expected reward R(s, a, next).
  MdpBuilder& set(std::size_t s, std::size_t a, std::size_t next, double prob, double reward = 0.0);
  MdpBuilder& set_reward(std::size_t s, std::size_t a, std::size_t next, double reward);
  /// Makes s absorbing: every action self-loops with probability 1, reward 0.
  MdpBuilder& mark_terminal(std::size_t s);

  /// Validates and returns the MDP. Throws std::invalid_argument when a row
  /// does not sum to 1 within 1e-12, a probability is negative, a reward is
  /// not finite, or gamma is outside (0, 1].
  TabularMDP build() const;

  /// Builder seeded with an existing MDP's tables.
  static MdpBuilder from(const TabularMDP& mdp);

 private:
  void check_index(std::size_t s, std::size_t a, std::size_t next) const;
  TabularMDP mdp_;
};

struct DeterministicPolicy {
  std::vector<std::size_t> action_for;

  bool operator==(const DeterministicPolicy&) const = default;
};

/// q(s, a) stored row-major by state.
class ActionValueTable {
 public:
  ActionValueTable() = default;
  ActionValueTable(std::size_t n_states, std::size_t n_actions, double fill = 0.0)
      : n_states_(n_states), n_actions_(n_actions), q_(n_states * n_actions, fill) {}

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  double& operator()(std::size_t s, std::size_t a) { return q_[s * n_actions_ + a]; }
  double operator()(std::size_t s, std::size_t a) const { return q_[s * n_actions_ + a]; }

  std::vector<double>& values() { return q_; }
  const std::vector<double>& values() const { return q_; }

  bool operator==(const ActionValueTable&) const = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> q_;
};

struct SolverOptions {
  /// Target accuracy. The solvers stop once the a-posteriori bound on the
  /// distance to the fixed point (gamma/(1-gamma) times the last sweep's
  /// max-norm change, or the change itself when gamma = 1) is within it;
  /// the Bellman residual is then also within it.
  double tolerance = 1e-10;
  std::size_t max_sweeps = 1'000'000;
};

enum class TieBreak { lowest_index, seeded_uniform };

/// Exact q^pi by successive approximation from q = 0 (OpenMP-parallel sweeps).
ActionValueTable policy_evaluation(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                   const SolverOptions& options = {});

/// Optimal q* by value iteration from q = 0 (OpenMP-parallel sweeps).
ActionValueTable value_iteration(const TabularMDP& mdp, const SolverOptions& options = {});

/// Per-state argmax. seed is used only for TieBreak::seeded_uniform.
DeterministicPolicy greedy_policy(const ActionValueTable& q,
                                  TieBreak tie_rule = TieBreak::lowest_index,
                                  std::uint64_t seed = 0);

/// Copy with every nonterminal reward mapped to reward / scale + shift.
TabularMDP transform_mdp_rewards(const TabularMDP& mdp, double scale, double shift);

/// max over (s, a) of |q(s,a) - sum_s' P (R + gamma q(s', pi(s')))|.
double policy_bellman_residual(const TabularMDP& mdp, const DeterministicPolicy& policy,
                               const ActionValueTable& q);
/// max over (s, a) of |q(s,a) - sum_s' P (R + gamma max_a' q(s', a'))|.
double optimality_bellman_residual(const TabularMDP& mdp, const ActionValueTable& q);

struct RandomMdpOptions {
  double reward_scale = 1.0;
  /// Fraction of (s, a, s') entries given a nonzero probability.
  double density = 0.5;
  std::size_t n_terminal = 0;
};

/// Random MDP fixture; deterministic in seed.
TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                      std::uint64_t seed, const RandomMdpOptions& options = {});

DeterministicPolicy random_policy(std::size_t n_states, std::size_t n_actions,
                                  std::uint64_t seed);

// Text serialization. Schema (JSON object):
//   {"n_states": S, "n_actions": A, "gamma": g,
//    "transition": [S*A*S numbers, row-major (s, a, s')],
//    "reward":     [S*A*S numbers, same layout],
//    "terminal_states": [state indices]}
std::string to_text(const TabularMDP& mdp);
TabularMDP mdp_from_text(const std::string& text);
void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path);
TabularMDP load_mdp(const std::filesystem::path& path);

}  // namespace optinit
