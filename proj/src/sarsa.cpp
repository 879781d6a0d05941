#include "optinit/sarsa.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace optinit {

namespace {

constexpr std::array<std::pair<InitStrategy, std::string_view>, 5> kStrategyNames{{
    {InitStrategy::zero, "zero"},
    {InitStrategy::constant_norm_weights, "constant_norm_weights"},
    {InitStrategy::stacked, "stacked"},
    {InitStrategy::shift_optimistic, "shift_optimistic"},
    {InitStrategy::shift_optimistic_strong, "shift_optimistic_strong"},
}};

}  // namespace

std::string_view to_string(InitStrategy s) {
  for (const auto& [value, name] : kStrategyNames) {
    if (value == s) return name;
  }
  return "unknown";
}

InitStrategy parse_init_strategy(std::string_view name) {
  for (const auto& [value, n] : kStrategyNames) {
    if (n == name) return value;
  }
  throw std::invalid_argument("unknown init strategy: " + std::string(name));
}

std::string_view to_string(TraceKind k) {
  return k == TraceKind::replacing ? "replacing" : "accumulating";
}

TraceKind parse_trace_kind(std::string_view name) {
  if (name == "replacing") return TraceKind::replacing;
  if (name == "accumulating") return TraceKind::accumulating;
  throw std::invalid_argument("unknown trace kind: " + std::string(name));
}

bool needs_feature_norm(InitStrategy s) {
  return s == InitStrategy::constant_norm_weights || s == InitStrategy::stacked;
}

bool uses_reward_transform(InitStrategy s) {
  return s == InitStrategy::shift_optimistic || s == InitStrategy::shift_optimistic_strong;
}

void SarsaConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  if (!(trace_cutoff >= 0.0)) throw std::invalid_argument("trace_cutoff must be nonnegative");
  if (init_strategy == InitStrategy::shift_optimistic_strong && gamma == 1.0) {
    throw std::invalid_argument("strong optimism needs gamma < 1");
  }
}

SarsaAgent::SarsaAgent(std::size_t dim, const SarsaConfig& config,
                       std::optional<std::size_t> feature_norm)
    : config_(config), rng_(config.seed) {
  config_.validate();
  if (dim == 0) throw std::invalid_argument("feature dimensionality must be positive");
  if (dim > std::numeric_limits<FeatureIndex>::max()) {
    throw std::invalid_argument("feature dimensionality too large");
  }

  double initial = 0.0;
  if (needs_feature_norm(config_.init_strategy)) {
    if (!feature_norm || *feature_norm == 0) {
      throw std::invalid_argument(std::string(to_string(config_.init_strategy)) +
                                  " needs a positive constant feature norm");
    }
    initial = 1.0 / static_cast<double>(*feature_norm);
  }
  weights_.assign(dim, initial);
  trace_values_.assign(dim, 0.0);
  in_trace_.assign(dim, 0);

  if (config_.init_strategy == InitStrategy::shift_optimistic) {
    transform_.emplace(config_.gamma, OptimismMode::mild);
  } else if (config_.init_strategy == InitStrategy::shift_optimistic_strong) {
    transform_.emplace(config_.gamma, OptimismMode::strong);
  }
}

void SarsaAgent::check_dim(const SparseBinaryFeatures& phi) const {
  if (phi.total() != weights_.size()) {
    throw std::invalid_argument("feature dimensionality does not match the agent");
  }
}

double SarsaAgent::q_value(const SparseBinaryFeatures& phi) const { return dot(weights_, phi); }

std::size_t SarsaAgent::select_action(std::span<const SparseBinaryFeatures> features_per_action) {
  if (features_per_action.empty()) throw std::invalid_argument("no actions to choose from");
  const std::size_t n = features_per_action.size();
  if (rng_.uniform01() < config_.epsilon) return rng_.index(n);

  ties_.clear();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    const double q = q_value(features_per_action[a]);
    if (q > best) {
      best = q;
      ties_.assign(1, a);
    } else if (q == best) {
      ties_.push_back(a);
    }
  }
  if (ties_.empty()) return rng_.index(n);  // every estimate NaN
  return ties_.size() == 1 ? ties_.front() : ties_[rng_.index(ties_.size())];
}

double SarsaAgent::step_update(const SparseBinaryFeatures& phi_t, double raw_reward,
                               const SparseBinaryFeatures* phi_next, const EpisodeClock& clock) {
  check_dim(phi_t);
  if (phi_next) check_dim(*phi_next);

  double reward = raw_reward;
  if (transform_) {
    reward = phi_next ? transform_->observe_reward(raw_reward)
                      : transform_->observe_terminal_reward(raw_reward, clock);
  }
  const double bootstrap = phi_next ? config_.gamma * q_value(*phi_next) : 0.0;
  const double delta = reward + bootstrap - q_value(phi_t);

  for (FeatureIndex i : phi_t.active()) {
    if (!in_trace_[i]) {
      in_trace_[i] = 1;
      trace_indices_.push_back(i);
    }
    if (config_.trace_kind == TraceKind::replacing) {
      trace_values_[i] = 1.0;
    } else {
      trace_values_[i] += 1.0;
    }
  }

  const double step = config_.alpha * delta;
  for (FeatureIndex i : trace_indices_) weights_[i] += step * trace_values_[i];

  if (!phi_next) {
    clear_traces();
    return delta;
  }

  const double decay = config_.gamma * config_.lambda;
  std::size_t kept = 0;
  for (FeatureIndex i : trace_indices_) {
    const double e = trace_values_[i] * decay;
    if (e != 0.0 && std::abs(e) >= config_.trace_cutoff) {
      trace_values_[i] = e;
      trace_indices_[kept++] = i;
    } else {
      trace_values_[i] = 0.0;
      in_trace_[i] = 0;
    }
  }
  trace_indices_.resize(kept);
  return delta;
}

void SarsaAgent::clear_traces() {
  for (FeatureIndex i : trace_indices_) {
    trace_values_[i] = 0.0;
    in_trace_[i] = 0;
  }
  trace_indices_.clear();
}

void SarsaAgent::set_weights(std::span<const double> w) {
  if (w.size() != weights_.size()) throw std::invalid_argument("weight length mismatch");
  weights_.assign(w.begin(), w.end());
}

void write_weights(std::ostream& out, std::span<const double> weights) {
  out << "optinit-weights 1 " << weights.size() << '\n';
  char buf[32];
  for (double w : weights) {
    std::snprintf(buf, sizeof buf, "%.17g\n", w);
    out << buf;
  }
}

std::vector<double> read_weights(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t n = 0;
  if (!(in >> magic >> version >> n) || magic != "optinit-weights" || version != 1) {
    throw std::invalid_argument("not an optinit weight snapshot");
  }
  std::vector<double> w(n);
  std::string token;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> token)) throw std::invalid_argument("weight snapshot truncated");
    std::size_t used = 0;
    w[i] = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("malformed weight value: " + token);
  }
  return w;
}

void save_weights(const std::filesystem::path& path, std::span<const double> weights) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_weights(out, weights);
}

std::vector<double> load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_weights(in);
}

}  // namespace optinit
