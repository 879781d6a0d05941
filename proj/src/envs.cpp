#include "optinit/envs.hpp"

#include <algorithm>
#include <utility>

namespace optinit {

Environment::Environment(std::size_t max_steps) : max_steps_(max_steps) {
  if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
}

EnvStep Environment::reset() {
  clock_ = EpisodeClock{0, max_steps_};
  running_ = true;
  return EnvStep{do_reset(), 0.0, false, clock_};
}

EnvStep Environment::step(std::size_t action) {
  if (!running_) throw std::logic_error("step called on a terminated or un-reset environment");
  if (action >= n_actions()) throw std::out_of_range("action out of range");
  Outcome out = do_step(action);
  ++clock_.k;
  const bool terminal = out.terminal || clock_.k >= max_steps_;
  running_ = !terminal;
  return EnvStep{std::move(out.observation), out.raw_reward, terminal, clock_};
}

TabularMDP Environment::export_tabular(double) const {
  throw NotExportable(name() + " has no exact tabular export");
}

std::size_t Environment::state_index(const Observation&) const {
  throw NotExportable(name() + " has no tabular state index");
}

// ---------------------------------------------------------------------------
// CrossingWorld

std::vector<Lane> CrossingParams::default_lanes(std::size_t height) {
  static const std::size_t kPeriods[] = {1, 2, 1, 3, 2, 1, 3, 2};
  std::vector<Lane> lanes;
  for (std::size_t i = 0; i + 2 < height; ++i) {
    lanes.push_back(Lane{i % 2 == 0 ? 1 : -1, kPeriods[i % std::size(kPeriods)], 2});
  }
  return lanes;
}

CrossingWorld::CrossingWorld(CrossingParams params)
    : Environment(params.max_steps), params_(std::move(params)), rng_(params_.seed) {
  if (params_.width < 1 || params_.height < 3) {
    throw std::invalid_argument("crossing world needs width >= 1 and height >= 3");
  }
  if (params_.n_actions < 3) throw std::invalid_argument("crossing world needs at least 3 actions");
  if (params_.lanes.empty()) params_.lanes = CrossingParams::default_lanes(params_.height);
  if (params_.lanes.size() != params_.height - 2) {
    throw std::invalid_argument("crossing world needs one lane per interior row");
  }
  for (const Lane& lane : params_.lanes) {
    if (lane.period == 0 || (lane.direction != 1 && lane.direction != -1) ||
        lane.cars > params_.width) {
      throw std::invalid_argument("invalid lane configuration");
    }
  }
  grid_ = GridFeatureSpec{params_.width, params_.height, 2, params_.n_actions};
}

Observation CrossingWorld::do_reset() {
  agent_x_ = params_.width / 2;
  agent_y_ = params_.height - 1;
  tick_ = 0;
  cars_.clear();
  // Cars within a lane are evenly spaced, so they never share a cell.
  for (std::size_t l = 0; l < params_.lanes.size(); ++l) {
    const std::size_t phase = rng_.index(params_.width);
    for (std::size_t c = 0; c < params_.lanes[l].cars; ++c) {
      cars_.push_back(Car{l, (phase + c * params_.width / params_.lanes[l].cars) % params_.width});
    }
  }
  return observe();
}

bool CrossingWorld::car_at(std::size_t x, std::size_t y) const {
  if (y == 0 || y + 1 >= params_.height) return false;
  return std::any_of(cars_.begin(), cars_.end(),
                     [&](const Car& c) { return c.lane + 1 == y && c.x == x; });
}

void CrossingWorld::advance_cars() {
  ++tick_;
  const std::size_t w = params_.width;
  for (Car& c : cars_) {
    const Lane& lane = params_.lanes[c.lane];
    if (tick_ % lane.period != 0) continue;
    c.x = lane.direction > 0 ? (c.x + 1) % w : (c.x + w - 1) % w;
  }
}

CrossingWorld::Outcome CrossingWorld::do_step(std::size_t action) {
  const std::size_t start_row = params_.height - 1;
  if (action == kUp && agent_y_ > 0) {
    --agent_y_;
  } else if (action == kDown && agent_y_ < start_row) {
    ++agent_y_;
  }

  double reward = 0.0;
  if (agent_y_ == 0) {
    reward = params_.reward_on_cross;
    agent_y_ = start_row;
    advance_cars();
  } else {
    bool hit = car_at(agent_x_, agent_y_);
    advance_cars();
    hit = hit || car_at(agent_x_, agent_y_);
    if (hit) agent_y_ = start_row;
  }
  return Outcome{observe(), reward, false};
}

Observation CrossingWorld::observe() const {
  Observation obs;
  obs.values.reserve(2 + cars_.size());
  obs.values.push_back(static_cast<std::int32_t>(agent_x_));
  obs.values.push_back(static_cast<std::int32_t>(agent_y_));
  for (const Car& c : cars_) obs.values.push_back(static_cast<std::int32_t>(c.x));
  return obs;
}

SparseBinaryFeatures CrossingWorld::features_for(const Observation& obs, std::size_t action) const {
  std::vector<TileActivation> tiles;
  tiles.reserve(obs.values.size() - 1);
  tiles.push_back(TileActivation{static_cast<std::size_t>(obs.values.at(0)),
                                 static_cast<std::size_t>(obs.values.at(1)), kAgentChannel});
  std::size_t i = 2;
  for (std::size_t l = 0; l < params_.lanes.size(); ++l) {
    for (std::size_t c = 0; c < params_.lanes[l].cars; ++c, ++i) {
      tiles.push_back(TileActivation{static_cast<std::size_t>(obs.values.at(i)), l + 1, kCarChannel});
    }
  }
  return grid_features(grid_, tiles, action);
}

std::optional<std::size_t> CrossingWorld::constant_feature_norm() const {
  std::size_t cars = 0;
  for (const Lane& lane : params_.lanes) cars += lane.cars;
  return 1 + cars;
}

// ---------------------------------------------------------------------------
// CorridorWorld

CorridorWorld::CorridorWorld(CorridorParams params)
    : Environment(params.max_steps), params_(std::move(params)) {
  if (params_.length < 2) throw std::invalid_argument("corridor needs at least 2 cells");
  if (params_.intermediate_cells.size() > 16) {
    throw std::invalid_argument("corridor supports at most 16 intermediate cells");
  }
  auto inside = [&](std::size_t c) { return c > 0 && c + 1 < params_.length; };
  for (std::size_t c : params_.intermediate_cells) {
    if (!inside(c)) throw std::invalid_argument("intermediate cell must be interior");
  }
  for (std::size_t c : params_.hazard_cells) {
    if (!inside(c)) throw std::invalid_argument("hazard cell must be interior");
    if (std::find(params_.intermediate_cells.begin(), params_.intermediate_cells.end(), c) !=
        params_.intermediate_cells.end()) {
      throw std::invalid_argument("a cell cannot be both hazard and intermediate");
    }
  }
}

CorridorWorld::Move CorridorWorld::transition(std::size_t position, std::uint32_t mask,
                                              std::size_t action) const {
  std::size_t next = position;
  if (action == kLeft && position > 0) --next;
  if (action == kRight && position + 1 < params_.length) ++next;

  Move m{next, mask, 0.0, false};
  if (next == position) return m;
  if (next + 1 == params_.length) {
    m.reward = params_.goal_reward;
    m.terminal = true;
    return m;
  }
  const auto& mids = params_.intermediate_cells;
  for (std::size_t i = 0; i < mids.size(); ++i) {
    if (mids[i] == next && !(mask & (1u << i))) {
      m.reward = params_.intermediate_reward;
      m.mask |= 1u << i;
    }
  }
  if (std::find(params_.hazard_cells.begin(), params_.hazard_cells.end(), next) !=
      params_.hazard_cells.end()) {
    m.reward = params_.hazard_reward;
  }
  return m;
}

Observation CorridorWorld::do_reset() {
  position_ = 0;
  consumed_ = 0;
  return Observation{{0, 0}};
}

CorridorWorld::Outcome CorridorWorld::do_step(std::size_t action) {
  const Move m = transition(position_, consumed_, action);
  position_ = m.position;
  consumed_ = m.mask;
  return Outcome{Observation{{static_cast<std::int32_t>(position_),
                              static_cast<std::int32_t>(consumed_)}},
                 m.reward, m.terminal};
}

SparseBinaryFeatures CorridorWorld::features_for(const Observation& obs, std::size_t action) const {
  return state_action_one_hot(params_.length, 2, static_cast<std::size_t>(obs.values.at(0)),
                              action);
}

std::size_t CorridorWorld::state_index(const Observation& obs) const {
  const auto position = static_cast<std::size_t>(obs.values.at(0));
  const auto mask = static_cast<std::size_t>(obs.values.at(1));
  return mask * params_.length + position;
}

bool CorridorWorld::exportable() const {
  return (std::size_t{1} << params_.intermediate_cells.size()) * params_.length <= kMaxExportStates;
}

TabularMDP CorridorWorld::export_tabular(double gamma) const {
  if (!exportable()) throw NotExportable("corridor state space exceeds the export cap");
  const std::size_t masks = std::size_t{1} << params_.intermediate_cells.size();
  const std::size_t S = masks * params_.length;
  MdpBuilder b(S, 2, gamma);
  for (std::size_t mask = 0; mask < masks; ++mask) {
    for (std::size_t pos = 0; pos < params_.length; ++pos) {
      const std::size_t s = mask * params_.length + pos;
      if (pos + 1 == params_.length) {
        b.mark_terminal(s);
        continue;
      }
      for (std::size_t a = 0; a < 2; ++a) {
        const Move m = transition(pos, static_cast<std::uint32_t>(mask), a);
        b.set(s, a, m.mask * params_.length + m.position, 1.0, m.reward);
      }
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// TabularEnv

TabularEnv::TabularEnv(TabularMDP mdp, std::size_t start_state, std::size_t max_steps,
                       std::uint64_t seed, std::string name)
    : Environment(max_steps),
      mdp_(std::move(mdp)),
      start_(start_state),
      name_(std::move(name)),
      rng_(seed) {
  if (start_ >= mdp_.n_states()) throw std::invalid_argument("start state out of range");
}

Observation TabularEnv::do_reset() {
  state_ = start_;
  return Observation{{static_cast<std::int32_t>(state_)}};
}

TabularEnv::Outcome TabularEnv::do_step(std::size_t action) {
  const double u = rng_.uniform01();
  const std::size_t S = mdp_.n_states();
  std::size_t next = S;
  double cumulative = 0.0;
  std::size_t last_possible = 0;
  for (std::size_t n = 0; n < S; ++n) {
    const double p = mdp_.prob(state_, action, n);
    if (p <= 0.0) continue;
    last_possible = n;
    cumulative += p;
    if (u < cumulative) {
      next = n;
      break;
    }
  }
  if (next == S) next = last_possible;  // rounding at the top of the row

  const double reward = mdp_.reward(state_, action, next);
  state_ = next;
  return Outcome{Observation{{static_cast<std::int32_t>(next)}}, reward, mdp_.is_terminal(next)};
}

SparseBinaryFeatures TabularEnv::features_for(const Observation& obs, std::size_t action) const {
  return state_action_one_hot(mdp_.n_states(), mdp_.n_actions(),
                              static_cast<std::size_t>(obs.values.at(0)), action);
}

std::size_t TabularEnv::state_index(const Observation& obs) const {
  return static_cast<std::size_t>(obs.values.at(0));
}

TabularMDP TabularEnv::export_tabular(double gamma) const {
  MdpBuilder b(mdp_.n_states(), mdp_.n_actions(), gamma);
  for (std::size_t s = 0; s < mdp_.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp_.n_actions(); ++a) {
      for (std::size_t n = 0; n < mdp_.n_states(); ++n) {
        b.set(s, a, n, mdp_.prob(s, a, n), mdp_.reward(s, a, n));
      }
    }
    if (mdp_.is_terminal(s)) b.mark_terminal(s);
  }
  return b.build();
}

TabularMDP chain_mdp(std::size_t n_states, double gamma) {
  if (n_states < 2) throw std::invalid_argument("chain needs at least 2 states");
  MdpBuilder b(n_states, 2, gamma);
  const std::size_t goal = n_states - 1;
  for (std::size_t s = 0; s < goal; ++s) {
    const std::size_t left = s == 0 ? 0 : s - 1;
    b.set(s, 0, left, 1.0, 0.0);
    b.set(s, 1, s + 1, 1.0, s + 1 == goal ? 1.0 : 0.0);
  }
  b.mark_terminal(goal);
  return b.build();
}

TabularMDP zero_reward_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                           std::uint64_t seed) {
  return random_mdp(n_states, n_actions, gamma, seed, RandomMdpOptions{0.0, 0.5, 0});
}

}  // namespace optinit
