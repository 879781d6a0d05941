#include "optinit/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "optinit/features.hpp"
#include "optinit/mdp.hpp"
#include "optinit/reward_transform.hpp"
#include "optinit/rng.hpp"
#include "optinit/serial.hpp"

namespace optinit {

namespace {

constexpr double kGammas[] = {0.5, 0.9, 0.99};

// Magnitude of the first nonzero reward met on a random walk through mdp,
// captured the same way an agent would see it.
double first_reward_scale(const TabularMDP& mdp, Rng& rng) {
  RewardTransform tr(mdp.gamma());
  std::size_t s = 0;
  for (int step = 0; step < 10000 && !tr.first_reward_magnitude(); ++step) {
    const std::size_t a = rng.index(mdp.n_actions());
    const double u = rng.uniform01();
    double c = 0.0;
    std::size_t next = mdp.n_states() - 1;
    for (std::size_t n = 0; n < mdp.n_states(); ++n) {
      c += mdp.prob(s, a, n);
      if (u < c) {
        next = n;
        break;
      }
    }
    tr.observe_reward(mdp.reward(s, a, next));
    s = next;
  }
  if (!tr.first_reward_magnitude()) throw std::runtime_error("walk saw no nonzero reward");
  return *tr.first_reward_magnitude();
}

// Dense Gaussian elimination with partial pivoting; solves A x = b in place.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
    }
    if (A[pivot * n + col] == 0.0) throw std::runtime_error("singular system");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r * n + col] / A[col * n + col];
      for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= A[i * n + c] * x[c];
    x[i] = acc / A[i * n + i];
  }
  return x;
}

ActionValueTable direct_policy_q(const TabularMDP& mdp, const DeterministicPolicy& pi) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  const double g = mdp.gamma();
  std::vector<double> M(S * S, 0.0), r(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    M[s * S + s] = 1.0;
    for (std::size_t n = 0; n < S; ++n) {
      const double p = mdp.prob(s, pi.action_for[s], n);
      M[s * S + n] -= g * p;
      r[s] += p * mdp.reward(s, pi.action_for[s], n);
    }
  }
  const std::vector<double> v = solve_dense(M, r);
  ActionValueTable q(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double acc = 0.0;
      for (std::size_t n = 0; n < S; ++n) {
        acc += mdp.prob(s, a, n) * (mdp.reward(s, a, n) + g * v[n]);
      }
      q(s, a) = acc;
    }
  }
  return q;
}

OracleResult check_shift_identity(Rng& rng) {
  OracleResult res{"shift identity q~ = q/|r1st| - 1 (120 random MDPs)", false, 0.0, 1e-8, ""};
  const SolverOptions opts{1e-10, 1'000'000};
  for (int i = 0; i < 120; ++i) {
    const double gamma = kGammas[i % 3];
    const TabularMDP mdp =
        random_mdp(10, 3, gamma, rng.next(), RandomMdpOptions{rng.uniform(0.5, 2.0), 0.5, 0});
    const DeterministicPolicy pi = random_policy(10, 3, rng.next());
    const double scale = first_reward_scale(mdp, rng);
    // The reference side is solved exactly: an iterative raw solve would have
    // its tolerance magnified by 1/|r1st|.
    const ActionValueTable q = direct_policy_q(mdp, pi);
    const ActionValueTable qt =
        policy_evaluation(transform_mdp_rewards(mdp, scale, gamma - 1.0), pi, opts);
    for (std::size_t k = 0; k < q.values().size(); ++k) {
      res.worst = std::max(res.worst, std::abs(qt.values()[k] - (q.values()[k] / scale - 1.0)));
    }
  }
  res.passed = res.worst <= res.bound;
  return res;
}

OracleResult check_termination_padding(Rng& rng) {
  OracleResult res{"termination reward == zero padding to T (1000 episodes)", false, 0.0, 1e-12,
                   ""};
  const double gammas[] = {0.9, 0.99, 1.0};
  for (int i = 0; i < 1000; ++i) {
    const double gamma = gammas[i % 3];
    const std::size_t T = 1 + rng.index(200);
    const std::size_t k = 1 + rng.index(T);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 3.0));
    std::vector<double> raw(k, 0.0);
    for (double& r : raw) {
      if (rng.bernoulli(0.15)) r = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(1.0, 10.0) * scale;
    }

    RewardTransform ended(gamma), padded(gamma);
    double g_end = 0.0, g_pad = 0.0, discount = 1.0;
    for (std::size_t t = 1; t <= T; ++t) {
      if (t < k) {
        g_end += discount * ended.observe_reward(raw[t - 1]);
      } else if (t == k) {
        g_end += discount * ended.observe_terminal_reward(raw[t - 1], EpisodeClock{k, T});
      }
      g_pad += discount * padded.observe_reward(t <= k ? raw[t - 1] : 0.0);
      discount *= gamma;
    }
    res.worst = std::max(res.worst, std::abs(g_end - g_pad));
  }
  res.passed = res.worst <= res.bound;
  return res;
}

OracleResult check_argmax_invariance(Rng& rng) {
  OracleResult res{"greedy policy invariant under c*q + d (200 tables)", false, 0.0, 0.0, ""};
  for (int i = 0; i < 200; ++i) {
    const std::size_t S = 1 + rng.index(20), A = 1 + rng.index(6);
    ActionValueTable q(S, A);
    // Coarse grid values so ties are common.
    for (double& v : q.values()) v = static_cast<double>(static_cast<int>(rng.index(17)) - 8) / 4.0;
    const double c = std::pow(10.0, rng.uniform(-2.0, 2.0));
    const double d = rng.uniform(-100.0, 100.0);
    ActionValueTable mapped = q;
    for (double& v : mapped.values()) v = c * v + d;
    if (!(greedy_policy(q) == greedy_policy(mapped))) res.worst += 1.0;
  }
  res.passed = res.worst == 0.0;
  return res;
}

OracleResult check_stacking(Rng& rng) {
  OracleResult res{"stacked features have norm n and theta = 1/n gives 1 (1000 vectors)", false,
                   0.0, 1e-12, ""};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(128);
    std::vector<FeatureIndex> active;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.bernoulli(0.3)) active.push_back(static_cast<FeatureIndex>(j));
    }
    const SparseBinaryFeatures stacked = stack_with_negation(SparseBinaryFeatures(n, active));
    if (stacked.norm() != n) {
      res.detail = "stacked norm " + std::to_string(stacked.norm()) + " != " + std::to_string(n);
      return res;
    }
    const std::vector<double> theta(2 * n, 1.0 / static_cast<double>(n));
    res.worst = std::max(res.worst, std::abs(dot(theta, stacked) - 1.0));
  }
  res.passed = res.worst <= res.bound;
  return res;
}

OracleResult check_linear_solve(Rng& rng) {
  OracleResult res{"iterative policy evaluation == direct linear solve (30 MDPs)", false, 0.0,
                   1e-9, ""};
  for (int i = 0; i < 30; ++i) {
    const TabularMDP mdp = random_mdp(10, 3, kGammas[i % 3], rng.next());
    const DeterministicPolicy pi = random_policy(10, 3, rng.next());
    const ActionValueTable q = policy_evaluation(mdp, pi, SolverOptions{1e-11, 1'000'000});
    const ActionValueTable exact = direct_policy_q(mdp, pi);
    for (std::size_t k = 0; k < q.values().size(); ++k) {
      res.worst = std::max(res.worst, std::abs(q.values()[k] - exact.values()[k]));
    }
  }
  res.passed = res.worst <= res.bound;
  return res;
}

OracleResult check_parallel_matches_serial(Rng& rng) {
  OracleResult res{"parallel sweeps == serial reference, bitwise (10 MDPs, 200 states)", false,
                   0.0, 0.0, ""};
  for (int i = 0; i < 10; ++i) {
    const TabularMDP mdp = random_mdp(200, 4, 0.95, rng.next(), RandomMdpOptions{1.0, 0.1, 0});
    const DeterministicPolicy pi = random_policy(200, 4, rng.next());
    const SolverOptions opts{1e-8, 1'000'000};
    if (!(policy_evaluation(mdp, pi, opts) == serial::policy_evaluation(mdp, pi, opts))) {
      res.worst += 1.0;
    }
    if (!(value_iteration(mdp, opts) == serial::value_iteration(mdp, opts))) res.worst += 1.0;
  }
  res.passed = res.worst == 0.0;
  return res;
}

}  // namespace

std::vector<OracleResult> run_oracle_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<OracleResult> out;
  out.push_back(check_shift_identity(rng));
  out.push_back(check_termination_padding(rng));
  out.push_back(check_argmax_invariance(rng));
  out.push_back(check_stacking(rng));
  out.push_back(check_linear_solve(rng));
  out.push_back(check_parallel_matches_serial(rng));
  return out;
}

bool print_oracle_results(const std::vector<OracleResult>& results, std::ostream& out) {
  bool all = true;
  char buf[64];
  for (const OracleResult& r : results) {
    all = all && r.passed;
    std::snprintf(buf, sizeof buf, "worst=%.3e bound=%.1e", r.worst, r.bound);
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << buf << ")";
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
  }
  return all;
}

}  // namespace optinit
