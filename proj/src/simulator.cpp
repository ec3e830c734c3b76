#include "bemps/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "bemps/acquisition.hpp"
#include "bemps/batch_diversity.hpp"
#include "bemps/evaluation.hpp"
#include "bemps/numeric.hpp"
#include "bemps/rng.hpp"

namespace bemps {

Oracle make_oracle(const ModelFamily& family, std::size_t true_model,
                   std::uint64_t seed) {
  if (true_model >= family.num_models())
    throw std::invalid_argument("make_oracle: true model index out of range");
  if (!(family.prior()[true_model] > 0.0))
    throw std::invalid_argument(
        "make_oracle: prior mass on the true model must be positive");
  return Oracle{true_model, seed, 0};
}

int oracle_label(Oracle& oracle, const ModelFamily& family, InputId x) {
  const auto row = family.model(oracle.true_model).row(family.row_of(x));
  const double u = uniform01_from_key(mix64(oracle.seed, oracle.queries++));
  double cum = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    cum += row[y];
    if (u < cum) return static_cast<int>(y);
  }
  return static_cast<int>(row.size()) - 1;  // guard against row-sum round-off
}

EnsembleMode ensemble_mode_from(const std::string& name) {
  if (name == "exact") return EnsembleMode::exact;
  if (name == "dynamic_vs") return EnsembleMode::dynamic_vs;
  if (name == "constant_vs") return EnsembleMode::constant_vs;
  if (name == "no_vs") return EnsembleMode::no_vs;
  throw ConfigError("unknown ensemble mode '" + name + "'");
}

std::string to_string(EnsembleMode mode) {
  switch (mode) {
    case EnsembleMode::exact: return "exact";
    case EnsembleMode::dynamic_vs: return "dynamic_vs";
    case EnsembleMode::constant_vs: return "constant_vs";
    case EnsembleMode::no_vs: return "no_vs";
  }
  return "?";
}

void RunConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size: must be positive");
  if (budget < initial_labeled)
    throw ConfigError("budget: must be at least initial_labeled");
  if (pool_size <= initial_labeled)
    throw ConfigError("pool_size: must exceed initial_labeled");
  if (!(top_fraction > 0.0) || top_fraction > 1.0)
    throw ConfigError("top_fraction: must lie in (0, 1]");
  if (mode != EnsembleMode::exact) {
    if (ensemble_size == 0) throw ConfigError("ensemble_size: must be positive");
    if (initial_labeled == 0)
      throw ConfigError("initial_labeled: ensembles need initial data");
    const bool needs_split = mode != EnsembleMode::no_vs;
    if (needs_split && (!(train_fraction > 0.0) || !(train_fraction < 1.0)))
      throw ConfigError("train_fraction: must lie in (0, 1)");
  }
  if (!(wmocu_k > 0.0) || !std::isfinite(wmocu_k))
    throw ConfigError("wmocu_k: must be positive and finite");
  if (test_size == 0) throw ConfigError("test_size: must be positive");
}

std::vector<double> smoothing_grid() {
  return {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
}

namespace {

constexpr double kNoVsSmoothing = 1.0;

ConditionalTable fit_member(const ModelFamily& family,
                            const std::vector<std::pair<InputId, int>>& train,
                            double alpha) {
  const std::size_t n = family.num_inputs();
  const std::size_t k = family.num_classes();
  std::vector<double> counts(n * k, 0.0);
  for (const auto& [x, y] : train)
    counts[family.row_of(x) * k + static_cast<std::size_t>(y)] += 1.0;
  ConditionalTable t;
  t.num_inputs = n;
  t.num_classes = k;
  t.probs.resize(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    double row_total = 0.0;
    for (std::size_t y = 0; y < k; ++y) row_total += counts[r * k + y];
    const double denom = row_total + alpha * static_cast<double>(k);
    for (std::size_t y = 0; y < k; ++y)
      t.probs[r * k + y] = (counts[r * k + y] + alpha) / denom;
  }
  return t;
}

double heldout_log_score(const ModelFamily& family, const ConditionalTable& t,
                         const std::vector<std::pair<InputId, int>>& val) {
  double s = 0.0;
  for (const auto& [x, y] : val)
    s += std::log(std::max(t.at(family.row_of(x), static_cast<std::size_t>(y)),
                           kLogFloor));
  return s;
}

}  // namespace

EnsembleFit ensemble_fit(const LabeledSet& labelled, const ModelFamily& family,
                         EnsembleMode mode, std::size_t ensemble_size,
                         double train_fraction, std::uint64_t seed) {
  if (mode == EnsembleMode::exact)
    throw ConfigError("ensemble_fit: exact mode has no ensemble");
  if (labelled.size() == 0) throw ConfigError("ensemble_fit: no labelled data");
  if (ensemble_size == 0) throw ConfigError("ensemble_fit: empty ensemble");

  const std::size_t n = labelled.size();
  EnsembleFit fit;
  fit.weights.assign(ensemble_size, 1.0 / static_cast<double>(ensemble_size));

  if (mode == EnsembleMode::no_vs) {
    const ConditionalTable t = fit_member(family, labelled.pairs, kNoVsSmoothing);
    for (std::size_t e = 0; e < ensemble_size; ++e) {
      fit.members.push_back(t);
      fit.smoothing.push_back(kNoVsSmoothing);
    }
    return fit;
  }

  const std::size_t train_n =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (train_n == 0)
    throw ConfigError("ensemble_fit: split leaves an empty training set");
  if (train_n == n)
    throw ConfigError("ensemble_fit: split leaves an empty validation set");

  // constant_vs: one split for every member; dynamic_vs: a fresh one each.
  std::vector<std::size_t> shared_perm;
  if (mode == EnsembleMode::constant_vs) {
    Rng rng(derive_seed(seed, "shared_split"));
    shared_perm = rng.sample_without_replacement(n, n);
  }

  const std::vector<double> grid = smoothing_grid();
  for (std::size_t e = 0; e < ensemble_size; ++e) {
    std::vector<std::size_t> perm;
    if (mode == EnsembleMode::dynamic_vs) {
      Rng rng(derive_seed(seed, "member_split", e));
      perm = rng.sample_without_replacement(n, n);
    } else {
      perm = shared_perm;
    }
    std::vector<std::pair<InputId, int>> train, val;
    train.reserve(train_n);
    val.reserve(n - train_n);
    for (std::size_t i = 0; i < n; ++i)
      (i < train_n ? train : val).push_back(labelled.pairs[perm[i]]);

    double best_alpha = grid.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (double alpha : grid) {
      const ConditionalTable t = fit_member(family, train, alpha);
      const double s = heldout_log_score(family, t, val);
      if (s > best_score) {
        best_score = s;
        best_alpha = alpha;
      }
    }
    fit.members.push_back(fit_member(family, train, best_alpha));
    fit.smoothing.push_back(best_alpha);
  }
  return fit;
}

namespace {

struct FittedModel {
  // Either the exact family + Bayes posterior, or an ensemble pseudo-family
  // with uniform member weights. `family` points at `storage` in the latter
  // case.
  const ModelFamily* family = nullptr;
  Posterior posterior = Posterior::uniform(1);
  std::unique_ptr<ModelFamily> storage;
};

FittedModel fit_model(const RunConfig& config, const ModelFamily& family,
                      const LabeledSet& labelled, std::uint64_t iteration_seed) {
  FittedModel fm;
  if (config.mode == EnsembleMode::exact) {
    fm.family = &family;
    fm.posterior = posterior_from(family, labelled);
    return fm;
  }
  EnsembleFit fit = ensemble_fit(labelled, family, config.mode,
                                 config.ensemble_size, config.train_fraction,
                                 iteration_seed);
  FamilyOptions opts;
  opts.require_identifiable = false;  // fitted members may coincide
  fm.storage = std::make_unique<ModelFamily>(ModelFamily::create(
      std::move(fit.members), family.input_space(), std::move(fit.weights),
      opts));
  fm.family = fm.storage.get();
  fm.posterior = Posterior::uniform(config.ensemble_size);
  return fm;
}

struct TestSet {
  std::vector<InputId> inputs;
  std::vector<int> labels;
};

TestSet make_test_set(const ModelFamily& family, std::size_t true_model,
                      std::size_t size, std::uint64_t seed) {
  TestSet ts;
  ts.inputs.reserve(size);
  ts.labels.reserve(size);
  Rng rng(derive_seed(seed, "test_set"));
  const auto& ids = family.input_space();
  for (std::size_t i = 0; i < size; ++i) {
    const InputId x = ids[rng.uniform_index(ids.size())];
    const auto row = family.model(true_model).row(family.row_of(x));
    const double u = rng.uniform01();
    double cum = 0.0;
    int y = static_cast<int>(row.size()) - 1;
    for (std::size_t c = 0; c < row.size(); ++c) {
      cum += row[c];
      if (u < cum) {
        y = static_cast<int>(c);
        break;
      }
    }
    ts.inputs.push_back(x);
    ts.labels.push_back(y);
  }
  return ts;
}

void test_metrics(const FittedModel& fm, const TestSet& ts, double& f1,
                  double& acc) {
  std::vector<int> preds(ts.inputs.size());
  for (std::size_t i = 0; i < ts.inputs.size(); ++i) {
    const std::vector<double> q =
        posterior_predictive(fm.posterior, *fm.family, ts.inputs[i]);
    preds[i] = static_cast<int>(argmax_index(q));
  }
  const int k = static_cast<int>(fm.family->num_classes());
  f1 = weighted_f1(preds, ts.labels, k);
  acc = accuracy(preds, ts.labels);
}

}  // namespace

Trajectory run_active_learning(const RunConfig& config,
                               const ModelFamily& family, Oracle& oracle) {
  config.validate();
  const std::uint64_t master = config.seed;
  using clock = std::chrono::steady_clock;

  // Pool: a multiset over the input space, so informative inputs can be
  // queried more than once.
  Rng init_rng(derive_seed(master, "init"));
  std::vector<InputId> pool(config.pool_size);
  const auto& ids = family.input_space();
  for (auto& x : pool) x = ids[init_rng.uniform_index(ids.size())];

  LabeledSet labelled;
  {
    auto picks =
        init_rng.sample_without_replacement(pool.size(), config.initial_labeled);
    std::sort(picks.begin(), picks.end(), std::greater<>());
    for (std::size_t p : picks) {
      const InputId x = pool[p];
      labelled.add(x, oracle_label(oracle, family, x));
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(p));
    }
  }

  // Estimation pool: fixed random subset of the initial unlabelled data;
  // never pruned, even when its elements get labelled later.
  std::vector<InputId> estimation;
  {
    const std::size_t nx = std::min(config.estimation_pool, pool.size());
    Rng est_rng(derive_seed(master, "estimation"));
    for (std::size_t p : est_rng.sample_without_replacement(pool.size(), nx))
      estimation.push_back(pool[p]);
  }

  const TestSet test_set = make_test_set(family, oracle.true_model,
                                         config.test_size, master);

  const Strategy strategy = make_strategy(
      config.strategy,
      StrategyParams{config.wmocu_k, derive_seed(master, "random_baseline")});
  const bool diverse_batch = config.batch_size > 1 && config.diversify &&
                             strategy_supports_vectors(strategy.kind);

  Trajectory traj;
  FittedModel fm;
  const std::size_t n_iters =
      (config.budget - config.initial_labeled) / config.batch_size;

  for (std::size_t t = 0; t <= n_iters; ++t) {
    const auto t0 = clock::now();
    std::vector<InputId> acquired;
    if (t > 0) {
      if (pool.size() < config.batch_size) {
        traj.truncated = true;
        break;
      }
      AcquisitionContext ctx =
          make_context(*fm.family, fm.posterior, pool, estimation,
                       strategy.rule, t - 1);
      std::vector<std::size_t> positions;
      if (config.batch_size == 1) {
        const AcquisitionScores scores = score_pool(ctx, strategy);
        positions.push_back(argmax_index(scores.per_x));
      } else if (diverse_batch) {
        ScoreOptions opts;
        opts.keep_pairs = true;
        const AcquisitionScores scores = score_pool(ctx, strategy, opts);
        BatchRequest req;
        req.batch_size = config.batch_size;
        req.top_fraction = config.top_fraction;
        req.seed = derive_seed(master, "batch", t);
        req.kmeans_max_iters = config.kmeans_max_iters;
        positions = select_batch_positions(scores, req);
      } else {
        const AcquisitionScores scores = score_pool(ctx, strategy);
        positions = top_indices(scores.per_x, config.batch_size);
      }
      for (std::size_t p : positions) {
        const InputId x = pool[p];
        acquired.push_back(x);
        labelled.add(x, oracle_label(oracle, family, x));
      }
      std::sort(positions.begin(), positions.end(), std::greater<>());
      for (std::size_t p : positions)
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(p));
    }

    fm = fit_model(config, family, labelled, derive_seed(master, "fit", t));

    IterationRecord rec;
    rec.iteration = t;
    rec.labelled_count = labelled.size();
    rec.acquired = std::move(acquired);
    test_metrics(fm, test_set, rec.weighted_f1, rec.accuracy);
    rec.posterior_mass_true =
        config.mode == EnsembleMode::exact
            ? fm.posterior.weight(oracle.true_model)
            : std::numeric_limits<double>::quiet_NaN();
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    traj.records.push_back(std::move(rec));
  }

  traj.final_max_score = std::numeric_limits<double>::quiet_NaN();
  if (!pool.empty()) {
    AcquisitionContext ctx = make_context(*fm.family, fm.posterior, pool,
                                          estimation, strategy.rule, n_iters);
    const AcquisitionScores scores = score_pool(ctx, strategy);
    traj.final_max_score = scores.per_x[argmax_index(scores.per_x)];
  }
  return traj;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "iteration,labelled_count,weighted_f1,accuracy,posterior_mass_true,"
         "seconds\n";
  for (const auto& r : trajectory.records)
    out << r.iteration << ',' << r.labelled_count << ',' << fmt(r.weighted_f1)
        << ',' << fmt(r.accuracy) << ',' << fmt(r.posterior_mass_true) << ','
        << fmt(r.seconds) << "\n";
}

MetricSeries read_trajectory_csv(std::istream& in) {
  MetricSeries series;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trajectory csv: empty file");
  if (line.rfind("iteration,", 0) != 0)
    throw std::runtime_error("trajectory csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw std::runtime_error("trajectory csv: bad row '" + line + "'");
    series.labelled.push_back(std::stoul(cells[1]));
    series.weighted_f1.push_back(std::stod(cells[2]));
    series.accuracy.push_back(std::stod(cells[3]));
    series.posterior_mass_true.push_back(std::stod(cells[4]));
  }
  return series;
}

}  // namespace bemps
