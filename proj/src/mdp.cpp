#include "optinit/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "optinit/rng.hpp"

namespace optinit {

namespace {

constexpr double kRowSumTolerance = 1e-12;

// Below this many states the fork/join cost outweighs a sweep.
constexpr std::size_t kParallelStateThreshold = 64;

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
}

void check_policy(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  if (policy.action_for.size() != mdp.n_states()) {
    throw std::invalid_argument("policy size does not match the number of states");
  }
  for (std::size_t a : policy.action_for) {
    if (a >= mdp.n_actions()) throw std::invalid_argument("policy action index out of range");
  }
}

// delta is the max-norm change of the last sweep, magnitude the max |q|.
// Either the a-posteriori error bound is within tolerance, or delta has hit
// the rounding floor of doubles while the residual (<= delta) is within it.
bool converged(double gamma, double delta, double magnitude, double tolerance) {
  const double bound = gamma < 1.0 ? delta * gamma / (1.0 - gamma) : delta;
  if (bound <= tolerance) return true;
  constexpr double kFloor = 16.0 * std::numeric_limits<double>::epsilon();
  return delta <= tolerance && delta <= kFloor * magnitude;
}

}  // namespace

std::vector<std::size_t> TabularMDP::terminal_states() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < n_states_; ++s) {
    if (terminal_[s]) out.push_back(s);
  }
  return out;
}

MdpBuilder::MdpBuilder(std::size_t n_states, std::size_t n_actions, double gamma) {
  if (n_states == 0 || n_actions == 0) {
    throw std::invalid_argument("MDP needs at least one state and one action");
  }
  check_gamma(gamma);
  mdp_.n_states_ = n_states;
  mdp_.n_actions_ = n_actions;
  mdp_.gamma_ = gamma;
  mdp_.transition_.assign(n_states * n_actions * n_states, 0.0);
  mdp_.reward_.assign(n_states * n_actions * n_states, 0.0);
  mdp_.terminal_.assign(n_states, 0);
}

void MdpBuilder::check_index(std::size_t s, std::size_t a, std::size_t next) const {
  if (s >= mdp_.n_states_ || next >= mdp_.n_states_ || a >= mdp_.n_actions_) {
    throw std::out_of_range("MDP index out of range");
  }
}

MdpBuilder& MdpBuilder::set(std::size_t s, std::size_t a, std::size_t next, double prob,
                            double reward) {
  check_index(s, a, next);
  mdp_.transition_[mdp_.offset(s, a) + next] = prob;
  mdp_.reward_[mdp_.offset(s, a) + next] = reward;
  return *this;
}

MdpBuilder& MdpBuilder::set_reward(std::size_t s, std::size_t a, std::size_t next,
                                   double reward) {
  check_index(s, a, next);
  mdp_.reward_[mdp_.offset(s, a) + next] = reward;
  return *this;
}

MdpBuilder& MdpBuilder::mark_terminal(std::size_t s) {
  check_index(s, 0, s);
  mdp_.terminal_[s] = 1;
  for (std::size_t a = 0; a < mdp_.n_actions_; ++a) {
    const std::size_t base = mdp_.offset(s, a);
    std::fill_n(mdp_.transition_.begin() + static_cast<std::ptrdiff_t>(base), mdp_.n_states_, 0.0);
    std::fill_n(mdp_.reward_.begin() + static_cast<std::ptrdiff_t>(base), mdp_.n_states_, 0.0);
    mdp_.transition_[base + s] = 1.0;
  }
  return *this;
}

TabularMDP MdpBuilder::build() const {
  const std::size_t S = mdp_.n_states_;
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < mdp_.n_actions_; ++a) {
      const std::size_t base = mdp_.offset(s, a);
      double sum = 0.0;
      for (std::size_t n = 0; n < S; ++n) {
        const double p = mdp_.transition_[base + n];
        if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN transition probability");
        if (!std::isfinite(mdp_.reward_[base + n])) {
          throw std::invalid_argument("reward must be finite");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg << "transition row (" << s << ", " << a << ") sums to " << sum;
        throw std::invalid_argument(msg.str());
      }
      if (mdp_.terminal_[s] &&
          (mdp_.transition_[base + s] != 1.0 ||
           std::any_of(mdp_.reward_.begin() + static_cast<std::ptrdiff_t>(base),
                       mdp_.reward_.begin() + static_cast<std::ptrdiff_t>(base + S),
                       [](double r) { return r != 0.0; }))) {
        throw std::invalid_argument("terminal state must self-loop with reward 0");
      }
    }
  }
  return mdp_;
}

MdpBuilder MdpBuilder::from(const TabularMDP& mdp) {
  MdpBuilder b(mdp.n_states(), mdp.n_actions(), mdp.gamma());
  b.mdp_ = mdp;
  return b;
}

ActionValueTable policy_evaluation(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                   const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_policy(mdp, policy);

  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  const double gamma = mdp.gamma();
  const double* P = mdp.transition_table().data();
  const double* R = mdp.reward_table().data();
  const std::size_t* pi = policy.action_for.data();

  ActionValueTable q(S, A), next(S, A);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double* cur = q.values().data();
    double* out = next.values().data();
    double delta = 0.0;
    double magnitude = 0.0;

#pragma omp parallel for reduction(max : delta, magnitude) schedule(static) if (S >= kParallelStateThreshold)
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        const std::size_t base = (s * A + a) * S;
        double acc = 0.0;
        for (std::size_t n = 0; n < S; ++n) {
          acc += P[base + n] * (R[base + n] + gamma * cur[n * A + pi[n]]);
        }
        out[s * A + a] = acc;
        delta = std::max(delta, std::abs(acc - cur[s * A + a]));
        magnitude = std::max(magnitude, std::abs(acc));
      }
    }

    std::swap(q, next);
    if (converged(gamma, delta, magnitude, options.tolerance)) return q;
  }
  throw ConvergenceError("policy evaluation did not converge within the sweep cap");
}

ActionValueTable value_iteration(const TabularMDP& mdp, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  const double gamma = mdp.gamma();
  const double* P = mdp.transition_table().data();
  const double* R = mdp.reward_table().data();

  ActionValueTable q(S, A), next(S, A);
  std::vector<double> state_value(S, 0.0);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double* cur = q.values().data();
    double* out = next.values().data();
    double* v = state_value.data();
    double delta = 0.0;
    double magnitude = 0.0;

#pragma omp parallel if (S >= kParallelStateThreshold)
    {
#pragma omp for schedule(static)
      for (std::size_t s = 0; s < S; ++s) {
        double best = cur[s * A];
        for (std::size_t a = 1; a < A; ++a) best = std::max(best, cur[s * A + a]);
        v[s] = best;
      }

#pragma omp for reduction(max : delta, magnitude) schedule(static)
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
          const std::size_t base = (s * A + a) * S;
          double acc = 0.0;
          for (std::size_t n = 0; n < S; ++n) {
            acc += P[base + n] * (R[base + n] + gamma * v[n]);
          }
          out[s * A + a] = acc;
          delta = std::max(delta, std::abs(acc - cur[s * A + a]));
        magnitude = std::max(magnitude, std::abs(acc));
        }
      }
    }

    std::swap(q, next);
    if (converged(gamma, delta, magnitude, options.tolerance)) return q;
  }
  throw ConvergenceError("value iteration did not converge within the sweep cap");
}

DeterministicPolicy greedy_policy(const ActionValueTable& q, TieBreak tie_rule,
                                  std::uint64_t seed) {
  Rng rng(seed);
  DeterministicPolicy policy;
  policy.action_for.resize(q.n_states());
  std::vector<std::size_t> best;
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    best.clear();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.n_actions(); ++a) {
      const double v = q(s, a);
      if (v > top) {
        top = v;
        best.assign(1, a);
      } else if (v == top) {
        best.push_back(a);
      }
    }
    if (best.empty()) best.push_back(0);
    policy.action_for[s] =
        tie_rule == TieBreak::lowest_index ? best.front() : best[rng.index(best.size())];
  }
  return policy;
}

TabularMDP transform_mdp_rewards(const TabularMDP& mdp, double scale, double shift) {
  if (!(scale > 0.0)) throw std::invalid_argument("reward scale must be positive");
  MdpBuilder b = MdpBuilder::from(mdp);
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    if (mdp.is_terminal(s)) continue;
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      for (std::size_t n = 0; n < mdp.n_states(); ++n) {
        b.set_reward(s, a, n, mdp.reward(s, a, n) / scale + shift);
      }
    }
  }
  return b.build();
}

double policy_bellman_residual(const TabularMDP& mdp, const DeterministicPolicy& policy,
                               const ActionValueTable& q) {
  check_policy(mdp, policy);
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double backup = 0.0;
      for (std::size_t n = 0; n < mdp.n_states(); ++n) {
        backup += mdp.prob(s, a, n) *
                  (mdp.reward(s, a, n) + mdp.gamma() * q(n, policy.action_for[n]));
      }
      worst = std::max(worst, std::abs(q(s, a) - backup));
    }
  }
  return worst;
}

double optimality_bellman_residual(const TabularMDP& mdp, const ActionValueTable& q) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double backup = 0.0;
      for (std::size_t n = 0; n < mdp.n_states(); ++n) {
        double best = q(n, 0);
        for (std::size_t b = 1; b < mdp.n_actions(); ++b) best = std::max(best, q(n, b));
        backup += mdp.prob(s, a, n) * (mdp.reward(s, a, n) + mdp.gamma() * best);
      }
      worst = std::max(worst, std::abs(q(s, a) - backup));
    }
  }
  return worst;
}

TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                      std::uint64_t seed, const RandomMdpOptions& options) {
  if (options.n_terminal >= n_states) {
    throw std::invalid_argument("random MDP needs at least one nonterminal state");
  }
  Rng rng(seed);
  MdpBuilder b(n_states, n_actions, gamma);
  std::vector<double> weights(n_states);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (std::size_t n = 0; n < n_states; ++n) {
        weights[n] = rng.bernoulli(options.density) ? rng.uniform01() + 1e-3 : 0.0;
        total += weights[n];
      }
      if (total == 0.0) {
        const std::size_t n = rng.index(n_states);
        weights[n] = 1.0;
        total = 1.0;
      }
      // Normalize, then push the rounding remainder onto the largest entry so
      // the row sums to 1 as tightly as doubles allow.
      std::size_t largest = 0;
      double sum = 0.0;
      for (std::size_t n = 0; n < n_states; ++n) {
        weights[n] /= total;
        sum += weights[n];
        if (weights[n] > weights[largest]) largest = n;
      }
      weights[largest] += 1.0 - sum;
      for (std::size_t n = 0; n < n_states; ++n) {
        b.set(s, a, n, weights[n],
              rng.uniform(-options.reward_scale, options.reward_scale));
      }
    }
  }
  for (std::size_t t = 0; t < options.n_terminal; ++t) b.mark_terminal(n_states - 1 - t);
  return b.build();
}

DeterministicPolicy random_policy(std::size_t n_states, std::size_t n_actions,
                                  std::uint64_t seed) {
  Rng rng(seed);
  DeterministicPolicy p;
  p.action_for.resize(n_states);
  for (auto& a : p.action_for) a = rng.index(n_actions);
  return p;
}

std::string to_text(const TabularMDP& mdp) {
  nlohmann::json j;
  j["n_states"] = mdp.n_states();
  j["n_actions"] = mdp.n_actions();
  j["gamma"] = mdp.gamma();
  j["transition"] = mdp.transition_table();
  j["reward"] = mdp.reward_table();
  j["terminal_states"] = mdp.terminal_states();
  return j.dump(1) + "\n";
}

TabularMDP mdp_from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed MDP file: ") + e.what());
  }
  const auto S = j.at("n_states").get<std::size_t>();
  const auto A = j.at("n_actions").get<std::size_t>();
  const auto P = j.at("transition").get<std::vector<double>>();
  const auto R = j.at("reward").get<std::vector<double>>();
  if (P.size() != S * A * S || R.size() != S * A * S) {
    throw std::invalid_argument("MDP table length does not match n_states * n_actions * n_states");
  }
  MdpBuilder b(S, A, j.at("gamma").get<double>());
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t n = 0; n < S; ++n) {
        const std::size_t i = (s * A + a) * S + n;
        b.set(s, a, n, P[i], R[i]);
      }
    }
  }
  for (auto s : j.value("terminal_states", std::vector<std::size_t>{})) b.mark_terminal(s);
  TabularMDP mdp = b.build();
  if (mdp.transition_table() != P || mdp.reward_table() != R) {
    throw std::invalid_argument("terminal states must self-loop with probability 1 and reward 0");
  }
  return mdp;
}

void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_text(mdp);
}

TabularMDP load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mdp_from_text(buf.str());
}

}  // namespace optinit
