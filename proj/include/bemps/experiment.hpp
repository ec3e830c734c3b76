#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bemps/evaluation.hpp"
#include "bemps/model_space.hpp"
#include "bemps/simulator.hpp"

namespace bemps {

/// A full experiment: one family, a strategy list, and a seed per repetition.
/// Parsed from a flat key = value config file; every field has a config key.
struct ExperimentConfig {
  RunConfig run;  // strategy field ignored; strategies below drive the runs
  std::vector<std::string> strategies = {"core_mse"};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string family_file;  // when empty, the generator spec below is used
  GeneratorSpec family_spec{10, 50, 3, 1.0, 0.05, 200};
  std::uint64_t family_seed = 1;
  /// Oracle's true model; negative = derive per run seed.
  long long true_model = -1;
  std::string out_dir = "out";
};

/// Parses and validates; errors carry file:line and the offending key.
ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::string& filename);
ExperimentConfig load_experiment_config(const std::string& path);

struct RunOutcome {
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t true_model = 0;
  std::string file;
  bool truncated = false;
  std::size_t iterations = 0;
  double final_max_score = 0.0;
  double seconds_total = 0.0;
  std::string error;  // non-empty marks a failed run
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  bool ok = true;
};

/// Executes all (strategy x seed) runs with a bounded worker pool, writing
/// one trajectory CSV per run plus manifest.json into out_dir. Re-running
/// with the same config overwrites the same bytes.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::size_t workers = 1);

/// Builds the comparison matrix across run directories; each directory is
/// one dataset. Curves are seed-averaged per strategy before testing.
ComparisonMatrix compare_run_dirs(const std::vector<std::string>& dirs,
                                  std::size_t spacing,
                                  const std::string& metric,
                                  CurveTable* curves_out = nullptr);

}  // namespace bemps
