#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bemps/common.hpp"
#include "bemps/model_space.hpp"

namespace bemps {

/// Labelling oracle: samples classes from the designated true model's
/// conditional rows. Deterministic per (seed, query counter).
struct Oracle {
  std::size_t true_model = 0;
  std::uint64_t seed = 0;
  std::uint64_t queries = 0;
};

/// Validates that the prior puts positive mass on the true model.
Oracle make_oracle(const ModelFamily& family, std::size_t true_model,
                   std::uint64_t seed);

int oracle_label(Oracle& oracle, const ModelFamily& family, InputId x);

enum class EnsembleMode { exact, dynamic_vs, constant_vs, no_vs };

EnsembleMode ensemble_mode_from(const std::string& name);
std::string to_string(EnsembleMode mode);

struct RunConfig {
  std::string strategy = "core_mse";
  std::size_t batch_size = 50;
  std::size_t budget = 326;
  std::size_t initial_labeled = 26;
  std::size_t estimation_pool = 600;  // clamped to the initial pool size
  std::size_t pool_size = 5000;
  std::size_t test_size = 1000;
  EnsembleMode mode = EnsembleMode::exact;
  std::size_t ensemble_size = 5;
  double train_fraction = 0.7;
  double top_fraction = 0.5;
  std::size_t kmeans_max_iters = 100;
  bool diversify = true;  // false = plain top-B by score
  double wmocu_k = 64.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError naming the offending field
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t labelled_count = 0;
  std::vector<InputId> acquired;  // empty on the initial row
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  double posterior_mass_true = 0.0;  // NaN outside exact mode
  double seconds = 0.0;
};

struct Trajectory {
  std::vector<IterationRecord> records;
  bool truncated = false;        // pool exhausted before the budget
  double final_max_score = 0.0;  // max pool score under the final fit; NaN if pool empty
};

/// Full AL loop: refit from scratch each iteration (exact Bayes posterior or
/// ensemble), score the pool, acquire a batch, query the oracle.
/// Deterministic given (config.seed, oracle.seed).
Trajectory run_active_learning(const RunConfig& config,
                               const ModelFamily& family, Oracle& oracle);

/// One ensemble member: a fitted predictive table plus the smoothing level
/// its validation split selected.
struct EnsembleFit {
  std::vector<ConditionalTable> members;
  std::vector<double> weights;  // uniform 1/E
  std::vector<double> smoothing;
};

/// Dirichlet-smoothed empirical tables. Only the family's input space and
/// class count are read here, never its probabilities. dynamic_vs refits each
/// member on its own fresh split; constant_vs shares one split; no_vs trains
/// on everything with fixed smoothing.
EnsembleFit ensemble_fit(const LabeledSet& labelled, const ModelFamily& family,
                         EnsembleMode mode, std::size_t ensemble_size,
                         double train_fraction, std::uint64_t seed);

/// Smoothing levels searched by the validation split, in selection order.
std::vector<double> smoothing_grid();

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

struct MetricSeries {
  std::vector<std::size_t> labelled;
  std::vector<double> weighted_f1;
  std::vector<double> accuracy;
  std::vector<double> posterior_mass_true;
};

MetricSeries read_trajectory_csv(std::istream& in);

}  // namespace bemps
