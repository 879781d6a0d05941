// Experiment CLI:
//   optinit run <config.json> [overrides]   run all cells, write records and reports
//   optinit report <records-dir>            re-aggregate an existing records directory
//   optinit oracle-check                    exact-solver identity suite

#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optinit/harness.hpp"
#include "optinit/oracle_check.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::size_t>& runs,
            const std::optional<std::size_t>& episodes, const std::optional<std::uint64_t>& seed,
            const std::optional<std::size_t>& window, const std::optional<std::size_t>& workers,
            const std::optional<std::string>& out_dir, const std::vector<double>& alphas,
            const std::vector<std::string>& strategies) {
  optinit::ExperimentSpec spec = optinit::load_experiment(config_path);
  if (runs) spec.n_runs = *runs;
  if (episodes) spec.episodes = *episodes;
  if (seed) spec.base_seed = *seed;
  if (window) spec.window = *window;
  if (workers) spec.workers = *workers;
  if (out_dir) spec.output_dir = *out_dir;
  if (!alphas.empty()) spec.alphas = alphas;
  if (!strategies.empty()) {
    spec.strategies.clear();
    for (const auto& s : strategies) spec.strategies.push_back(optinit::parse_init_strategy(s));
  }
  spec.validate();

  const auto start = std::chrono::steady_clock::now();
  const auto records = optinit::run_experiment(spec);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(spec.output_dir);
  {
    std::ofstream out(spec.output_dir / "experiment.json", std::ios::binary);
    out << optinit::experiment_to_json(spec);
  }
  optinit::write_records(records, spec.output_dir / "records.csv");
  const auto files = optinit::emit_reports(records, spec);

  std::cout << records.size() << " runs of " << spec.episodes << " episodes on "
            << optinit::env_id(spec.env) << " in " << seconds << " s\n";
  std::ifstream summary(spec.output_dir / "summary.csv");
  std::cout << summary.rdbuf();
  std::cout << "wrote " << files.size() + 2 << " files to " << spec.output_dir.string() << '\n';
  return EXIT_SUCCESS;
}

int cmd_report(const std::string& dir) {
  const std::filesystem::path root(dir);
  optinit::ExperimentSpec spec = optinit::load_experiment(root / "experiment.json");
  spec.output_dir = root;
  const auto records = optinit::read_records(root / "records.csv");
  const auto files = optinit::emit_reports(records, spec);
  for (const auto& f : files) std::cout << f.string() << '\n';
  return EXIT_SUCCESS;
}

int cmd_oracle_check(std::uint64_t seed) {
  const auto results = optinit::run_oracle_checks(seed);
  return optinit::print_oracle_results(results, std::cout) ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic-initialization Sarsa(lambda) experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config file");
  std::string config_path;
  std::optional<std::size_t> runs, episodes, window, workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<double> alphas;
  std::vector<std::string> strategies;
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--runs", runs, "Runs per (strategy, alpha)");
  run->add_option("--episodes", episodes, "Episodes per run");
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--window", window, "Sliding-window size");
  run->add_option("--workers", workers, "Worker threads (0 = OpenMP default)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--alphas", alphas, "Step sizes")->delimiter(',');
  run->add_option("--strategies", strategies, "Init strategies")->delimiter(',');

  auto* report = app.add_subcommand("report", "Re-aggregate records.csv in a results directory");
  std::string records_dir;
  report->add_option("records-dir", records_dir)->required()->check(CLI::ExistingDirectory);

  auto* oracle = app.add_subcommand("oracle-check", "Run the exact-solver identity suite");
  std::uint64_t oracle_seed = 7;
  oracle->add_option("--seed", oracle_seed, "Seed for the random fixtures");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(config_path, runs, episodes, seed, window, workers, out_dir, alphas,
                     strategies);
    }
    if (*report) return cmd_report(records_dir);
    if (*oracle) return cmd_oracle_check(oracle_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return EXIT_FAILURE;
}
