#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "optinit/envs.hpp"
#include "optinit/sarsa.hpp"

namespace optinit {

struct ChainParams {
  std::size_t n_states = 5;
  std::size_t max_steps = 100;
};

using EnvConfig = std::variant<CrossingParams, CorridorParams, ChainParams>;

std::string env_id(const EnvConfig& env);

/// Builds the environment for one run. The seed only affects stochastic
/// parts of the dynamics (car phases, sampled transitions).
std::unique_ptr<Environment> make_environment(const EnvConfig& env, std::uint64_t seed);

struct ExperimentSpec {
  EnvConfig env = CrossingParams{};
  /// Shared agent settings; alpha, init_strategy and seed are set per cell.
  SarsaConfig agent;
  std::vector<InitStrategy> strategies = {InitStrategy::zero, InitStrategy::shift_optimistic};
  std::vector<double> alphas = {0.01, 0.5};
  std::size_t n_runs = 30;
  std::size_t episodes = 100;
  std::size_t window = 10;
  std::uint64_t base_seed = 1;
  std::filesystem::path output_dir = "results";
  /// 0 = OpenMP default.
  std::size_t workers = 0;

  /// Checks ranges and builds one environment and agent per strategy so that
  /// bad parameters fail before any run starts. Throws std::invalid_argument.
  void validate() const;
};

/// Stable run seed: splitmix64 chained over the base seed, the FNV-1a hash of
/// the strategy name, the IEEE-754 bits of alpha, and the run index.
std::uint64_t derive_run_seed(std::uint64_t base_seed, InitStrategy strategy, double alpha,
                              std::size_t run);

/// Environment seed for a run index. Independent of strategy and alpha, so
/// every strategy faces the same dynamics in run i.
std::uint64_t derive_env_seed(std::uint64_t base_seed, std::size_t run);

struct RunRecord {
  InitStrategy strategy = InitStrategy::zero;
  double alpha = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  /// Undiscounted episode returns in the environment's raw reward scale.
  std::vector<double> scores;

  bool operator==(const RunRecord&) const = default;
};

struct Cell {
  InitStrategy strategy;
  double alpha;
  std::size_t run;
};

/// Cells in canonical order: strategy, then alpha, then run.
std::vector<Cell> enumerate_cells(const ExperimentSpec& spec);

/// Executes one (strategy, alpha, run) cell from its derived seed.
RunRecord run_cell(const ExperimentSpec& spec, const Cell& cell);

/// Runs every cell, in parallel over spec.workers threads. Records come back
/// in enumerate_cells order whatever the scheduling.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

namespace serial {
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);
}

/// Point e is the mean of scores[max(0, e - window + 1) .. e].
std::vector<double> sliding_window_curve(const std::vector<double>& scores, std::size_t window);

/// First episode whose cumulative score is nonzero; scores.size() if none.
std::size_t first_score_episode(const std::vector<double>& scores);

struct CurveRow {
  std::size_t episode = 0;
  double mean_score = 0.0;
  double std_error = 0.0;
  double window_mean = 0.0;
  double window_std_error = 0.0;
};

struct StrategyCurve {
  InitStrategy strategy;
  double alpha;
  std::vector<CurveRow> rows;
  double median_first_score_episode = 0.0;
};

/// Mean and standard error across runs for every (strategy, alpha).
/// Throws std::invalid_argument if any cell is missing or has the wrong
/// number of episodes.
std::vector<StrategyCurve> aggregate(const std::vector<RunRecord>& records,
                                     const ExperimentSpec& spec);

// Output files written into spec.output_dir:
//   experiment.json                     resolved experiment (input to `report`)
//   records.csv                         strategy,alpha,run,seed,episode,score
//   curve_<env>_<strategy>_alpha<a>.csv episode,mean_score,std_error,window_mean,window_std_error
//   summary.csv                         env,strategy,alpha,runs,median_first_score_episode,
//                                       final_window_mean,final_window_std_error
//   plot_<env>_alpha<a>.svg             window_mean curves, one line per strategy
/// Writes everything except records.csv and experiment.json. Returns the paths.
std::vector<std::filesystem::path> emit_reports(const std::vector<RunRecord>& records,
                                                const ExperimentSpec& spec);
void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Parses the JSON experiment schema (see README). Missing keys keep defaults.
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::filesystem::path& path);
std::string experiment_to_json(const ExperimentSpec& spec);

/// Population mean and standard error (sample sd / sqrt(n), 0 for n < 2).
/// Computed on data shifted by the first value, so constant input gives
/// exactly that value and 0.
std::pair<double, double> mean_and_std_error(const std::vector<double>& xs);

std::string format_alpha(double alpha);

}  // namespace optinit
