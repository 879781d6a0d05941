#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "optinit/harness.hpp"

namespace optinit {

namespace {

using nlohmann::json;

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

EnvConfig parse_env(const json& j) {
  const std::string id = j.value("id", std::string("crossing"));
  if (id == "crossing") {
    CrossingParams p;
    read(j, "width", p.width);
    read(j, "height", p.height);
    read(j, "n_actions", p.n_actions);
    read(j, "max_steps", p.max_steps);
    read(j, "reward_on_cross", p.reward_on_cross);
    if (j.contains("lanes")) {
      for (const json& l : j.at("lanes")) {
        p.lanes.push_back(Lane{l.value("direction", 1), l.value("period", std::size_t{1}),
                               l.value("cars", std::size_t{1})});
      }
    }
    return p;
  }
  if (id == "corridor") {
    CorridorParams p;
    read(j, "length", p.length);
    read(j, "intermediate_cells", p.intermediate_cells);
    read(j, "intermediate_reward", p.intermediate_reward);
    read(j, "hazard_cells", p.hazard_cells);
    read(j, "hazard_reward", p.hazard_reward);
    read(j, "goal_reward", p.goal_reward);
    read(j, "max_steps", p.max_steps);
    return p;
  }
  if (id == "chain") {
    ChainParams p;
    read(j, "n_states", p.n_states);
    read(j, "max_steps", p.max_steps);
    return p;
  }
  throw std::invalid_argument("unknown environment id: " + id);
}

json env_to_json(const EnvConfig& env) {
  if (const auto* p = std::get_if<CrossingParams>(&env)) {
    json lanes = json::array();
    for (const Lane& l :
         p->lanes.empty() ? CrossingParams::default_lanes(p->height) : p->lanes) {
      lanes.push_back({{"direction", l.direction}, {"period", l.period}, {"cars", l.cars}});
    }
    return {{"id", "crossing"},         {"width", p->width},
            {"height", p->height},      {"n_actions", p->n_actions},
            {"max_steps", p->max_steps}, {"reward_on_cross", p->reward_on_cross},
            {"lanes", lanes}};
  }
  if (const auto* p = std::get_if<CorridorParams>(&env)) {
    return {{"id", "corridor"},
            {"length", p->length},
            {"intermediate_cells", p->intermediate_cells},
            {"intermediate_reward", p->intermediate_reward},
            {"hazard_cells", p->hazard_cells},
            {"hazard_reward", p->hazard_reward},
            {"goal_reward", p->goal_reward},
            {"max_steps", p->max_steps}};
  }
  const auto& p = std::get<ChainParams>(env);
  return {{"id", "chain"}, {"n_states", p.n_states}, {"max_steps", p.max_steps}};
}

}  // namespace

ExperimentSpec parse_experiment(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed experiment file: ") + e.what());
  }

  ExperimentSpec spec;
  try {
    if (j.contains("env")) spec.env = parse_env(j.at("env"));
    if (j.contains("agent")) {
      const json& a = j.at("agent");
      read(a, "gamma", spec.agent.gamma);
      read(a, "lambda", spec.agent.lambda);
      read(a, "epsilon", spec.agent.epsilon);
      read(a, "trace_cutoff", spec.agent.trace_cutoff);
      if (a.contains("trace_kind")) {
        spec.agent.trace_kind = parse_trace_kind(a.at("trace_kind").get<std::string>());
      }
    }
    if (j.contains("strategies")) {
      spec.strategies.clear();
      for (const auto& s : j.at("strategies")) {
        spec.strategies.push_back(parse_init_strategy(s.get<std::string>()));
      }
    }
    read(j, "alphas", spec.alphas);
    read(j, "runs", spec.n_runs);
    read(j, "episodes", spec.episodes);
    read(j, "window", spec.window);
    read(j, "seed", spec.base_seed);
    read(j, "workers", spec.workers);
    if (j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad experiment field: ") + e.what());
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

std::string experiment_to_json(const ExperimentSpec& spec) {
  json strategies = json::array();
  for (InitStrategy s : spec.strategies) strategies.push_back(std::string(to_string(s)));
  const json j = {
      {"env", env_to_json(spec.env)},
      {"agent",
       {{"gamma", spec.agent.gamma},
        {"lambda", spec.agent.lambda},
        {"epsilon", spec.agent.epsilon},
        {"trace_kind", std::string(to_string(spec.agent.trace_kind))},
        {"trace_cutoff", spec.agent.trace_cutoff}}},
      {"strategies", strategies},
      {"alphas", spec.alphas},
      {"runs", spec.n_runs},
      {"episodes", spec.episodes},
      {"window", spec.window},
      {"seed", spec.base_seed},
      {"output_dir", spec.output_dir.string()},
  };
  return j.dump(2) + "\n";
}

}  // namespace optinit
