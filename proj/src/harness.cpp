#include "optinit/harness.hpp"

#include <bit>
#include <exception>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "optinit/rng.hpp"

namespace optinit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

SarsaConfig cell_config(const ExperimentSpec& spec, const Cell& cell) {
  SarsaConfig config = spec.agent;
  config.alpha = cell.alpha;
  config.init_strategy = cell.strategy;
  config.seed = derive_run_seed(spec.base_seed, cell.strategy, cell.alpha, cell.run);
  return config;
}

SarsaAgent make_agent(const Environment& env, const SarsaConfig& config) {
  if (config.init_strategy == InitStrategy::stacked) {
    return SarsaAgent(2 * env.feature_dim(), config, env.feature_dim());
  }
  if (config.init_strategy == InitStrategy::constant_norm_weights) {
    const auto norm = env.constant_feature_norm();
    if (!norm) {
      throw std::invalid_argument(env.name() + " features have no constant norm");
    }
    return SarsaAgent(env.feature_dim(), config, *norm);
  }
  return SarsaAgent(env.feature_dim(), config);
}

void fill_features(const Environment& env, const Observation& obs, bool stacked,
                   std::vector<SparseBinaryFeatures>& out) {
  out.clear();
  for (std::size_t a = 0; a < env.n_actions(); ++a) {
    SparseBinaryFeatures phi = env.features_for(obs, a);
    out.push_back(stacked ? stack_with_negation(phi) : std::move(phi));
  }
}

}  // namespace

std::string env_id(const EnvConfig& env) {
  return std::visit(Overloaded{[](const CrossingParams&) { return std::string("crossing"); },
                               [](const CorridorParams&) { return std::string("corridor"); },
                               [](const ChainParams&) { return std::string("chain"); }},
                    env);
}

std::unique_ptr<Environment> make_environment(const EnvConfig& env, std::uint64_t seed) {
  return std::visit(
      Overloaded{[&](const CrossingParams& p) -> std::unique_ptr<Environment> {
                   CrossingParams seeded = p;
                   seeded.seed = seed;
                   return std::make_unique<CrossingWorld>(seeded);
                 },
                 [&](const CorridorParams& p) -> std::unique_ptr<Environment> {
                   return std::make_unique<CorridorWorld>(p);
                 },
                 [&](const ChainParams& p) -> std::unique_ptr<Environment> {
                   // The discount here is irrelevant to the simulated dynamics.
                   return std::make_unique<TabularEnv>(chain_mdp(p.n_states, 1.0), 0, p.max_steps,
                                                       seed, "chain");
                 }},
      env);
}

void ExperimentSpec::validate() const {
  if (n_runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (strategies.empty()) throw std::invalid_argument("at least one strategy is required");
  if (alphas.empty()) throw std::invalid_argument("at least one alpha is required");
  std::set<InitStrategy> unique_strategies(strategies.begin(), strategies.end());
  std::set<double> unique_alphas(alphas.begin(), alphas.end());
  if (unique_strategies.size() != strategies.size() || unique_alphas.size() != alphas.size()) {
    throw std::invalid_argument("strategies and alphas must not repeat");
  }

  auto probe = make_environment(env, 0);
  std::set<std::uint64_t> seeds;
  for (InitStrategy s : strategies) {
    for (double alpha : alphas) {
      make_agent(*probe, cell_config(*this, Cell{s, alpha, 0}));
      for (std::size_t r = 0; r < n_runs; ++r) {
        seeds.insert(derive_run_seed(base_seed, s, alpha, r));
      }
    }
  }
  if (seeds.size() != strategies.size() * alphas.size() * n_runs) {
    throw std::invalid_argument("derived run seeds collide; choose another base seed");
  }
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, InitStrategy strategy, double alpha,
                              std::size_t run) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ fnv1a(to_string(strategy)));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(alpha));
  return mix64(h ^ static_cast<std::uint64_t>(run));
}

std::uint64_t derive_env_seed(std::uint64_t base_seed, std::size_t run) {
  return mix64(mix64(base_seed ^ fnv1a("environment")) ^ static_cast<std::uint64_t>(run));
}

std::vector<Cell> enumerate_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  cells.reserve(spec.strategies.size() * spec.alphas.size() * spec.n_runs);
  for (InitStrategy s : spec.strategies) {
    for (double alpha : spec.alphas) {
      for (std::size_t r = 0; r < spec.n_runs; ++r) cells.push_back(Cell{s, alpha, r});
    }
  }
  return cells;
}

RunRecord run_cell(const ExperimentSpec& spec, const Cell& cell) {
  const SarsaConfig config = cell_config(spec, cell);
  auto env = make_environment(spec.env, derive_env_seed(spec.base_seed, cell.run));
  SarsaAgent agent = make_agent(*env, config);
  const bool stacked = config.init_strategy == InitStrategy::stacked;

  RunRecord record{cell.strategy, cell.alpha, cell.run, config.seed, {}};
  record.scores.reserve(spec.episodes);

  std::vector<SparseBinaryFeatures> features, next_features;
  for (std::size_t episode = 0; episode < spec.episodes; ++episode) {
    EnvStep step = env->reset();
    fill_features(*env, step.observation, stacked, features);
    std::size_t action = agent.select_action(features);
    double score = 0.0;

    while (true) {
      step = env->step(action);
      score += step.raw_reward;
      if (step.terminal) {
        agent.step_update(features[action], step.raw_reward, nullptr, step.clock);
        break;
      }
      fill_features(*env, step.observation, stacked, next_features);
      const std::size_t next_action = agent.select_action(next_features);
      agent.step_update(features[action], step.raw_reward, &next_features[next_action],
                        step.clock);
      std::swap(features, next_features);
      action = next_action;
    }
    record.scores.push_back(score);
  }
  return record;
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<Cell> cells = enumerate_cells(spec);
  std::vector<RunRecord> records(cells.size());
  std::exception_ptr failure;

#ifdef _OPENMP
  const int threads =
      spec.workers > 0 ? static_cast<int>(spec.workers) : omp_get_max_threads();
#endif
  const auto n = static_cast<std::ptrdiff_t>(cells.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      records[static_cast<std::size_t>(i)] = run_cell(spec, cells[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(optinit_run_failure)
      if (!failure) failure = std::current_exception();
    }
  }

  if (failure) std::rethrow_exception(failure);
  return records;
}

namespace serial {

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<RunRecord> records;
  for (const Cell& cell : enumerate_cells(spec)) records.push_back(run_cell(spec, cell));
  return records;
}

}  // namespace serial

}  // namespace optinit
