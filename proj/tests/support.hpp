#pragma once

#include <cstddef>
#include <vector>

#include "optinit/envs.hpp"
#include "optinit/sarsa.hpp"

namespace optinit::testing {

/// Plain Sarsa(lambda) episode loop over env's own features. Returns the
/// number of environment steps taken.
inline std::size_t train(Environment& env, SarsaAgent& agent, std::size_t episodes) {
  std::size_t steps = 0;
  std::vector<SparseBinaryFeatures> phi, next_phi;
  auto fill = [&](const Observation& obs, std::vector<SparseBinaryFeatures>& out) {
    out.clear();
    for (std::size_t a = 0; a < env.n_actions(); ++a) out.push_back(env.features_for(obs, a));
  };
  for (std::size_t e = 0; e < episodes; ++e) {
    fill(env.reset().observation, phi);
    std::size_t action = agent.select_action(phi);
    while (true) {
      const EnvStep step = env.step(action);
      ++steps;
      if (step.terminal) {
        agent.step_update(phi[action], step.raw_reward, nullptr, step.clock);
        break;
      }
      fill(step.observation, next_phi);
      const std::size_t next_action = agent.select_action(next_phi);
      agent.step_update(phi[action], step.raw_reward, &next_phi[next_action], step.clock);
      std::swap(phi, next_phi);
      action = next_action;
    }
  }
  return steps;
}

}  // namespace optinit::testing
