#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "optinit/serial.hpp"

namespace optinit::serial {

namespace {

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

ActionValueTable policy_evaluation(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                   const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (policy.action_for.size() != mdp.n_states()) {
    throw std::invalid_argument("policy size does not match the number of states");
  }
  for (std::size_t a : policy.action_for) {
    if (a >= mdp.n_actions()) throw std::invalid_argument("policy action index out of range");
  }

  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  ActionValueTable q(S, A), next(S, A);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double delta = 0.0;
    double magnitude = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double acc = 0.0;
        for (std::size_t n = 0; n < S; ++n) {
          acc += mdp.prob(s, a, n) *
                 (mdp.reward(s, a, n) + mdp.gamma() * q(n, policy.action_for[n]));
        }
        next(s, a) = acc;
        delta = std::max(delta, std::abs(acc - q(s, a)));
        magnitude = std::max(magnitude, std::abs(acc));
      }
    }
    std::swap(q, next);
    if (converged(mdp.gamma(), delta, magnitude, options.tolerance)) return q;
  }
  throw ConvergenceError("policy evaluation did not converge within the sweep cap");
}

ActionValueTable value_iteration(const TabularMDP& mdp, const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  const std::size_t S = mdp.n_states();
  const std::size_t A = mdp.n_actions();
  ActionValueTable q(S, A), next(S, A);
  std::vector<double> v(S);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t s = 0; s < S; ++s) {
      v[s] = q(s, 0);
      for (std::size_t a = 1; a < A; ++a) v[s] = std::max(v[s], q(s, a));
    }
    double delta = 0.0;
    double magnitude = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double acc = 0.0;
        for (std::size_t n = 0; n < S; ++n) {
          acc += mdp.prob(s, a, n) * (mdp.reward(s, a, n) + mdp.gamma() * v[n]);
        }
        next(s, a) = acc;
        delta = std::max(delta, std::abs(acc - q(s, a)));
        magnitude = std::max(magnitude, std::abs(acc));
      }
    }
    std::swap(q, next);
    if (converged(mdp.gamma(), delta, magnitude, options.tolerance)) return q;
  }
  throw ConvergenceError("value iteration did not converge within the sweep cap");
}

}  // namespace optinit::serial
