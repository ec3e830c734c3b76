#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bemps/common.hpp"
#include "bemps/model_space.hpp"
#include "bemps/scoring_rules.hpp"

namespace bemps {

/// Read-only view of one acquisition round: the fitted model family and
/// posterior, the unlabelled pool U, the fixed estimation pool X, and (for
/// proper-score strategies) the scoring rule. Scoring distinct pool elements
/// is side-effect free and parallelizes over U.
struct AcquisitionContext {
  const ModelFamily* family = nullptr;
  const Posterior* posterior = nullptr;
  std::vector<InputId> pool;        // U, may contain repeated identifiers
  std::vector<InputId> estimation;  // X, fixed for the lifetime of a run
  std::optional<ScoringRule> rule;
  std::uint64_t round = 0;  // acquisition iteration, feeds the random baseline

  // resolved by make_context
  std::vector<std::size_t> pool_rows;
  std::vector<std::size_t> estimation_rows;
};

AcquisitionContext make_context(const ModelFamily& family,
                                const Posterior& posterior,
                                std::vector<InputId> pool,
                                std::vector<InputId> estimation,
                                std::optional<ScoringRule> rule = {},
                                std::uint64_t round = 0);

/// Pool scores, aligned with the context's pool order. When requested, the
/// per-(x, x') decomposition is retained row-major; row u holds the score
/// change vector of pool element u over the estimation pool.
struct AcquisitionScores {
  std::vector<InputId> pool;
  std::vector<double> per_x;
  std::vector<double> per_pair;
  std::size_t estimation_size = 0;

  bool has_pairs() const { return !per_pair.empty(); }
  std::span<const double> pair_row(std::size_t u) const {
    return {per_pair.data() + u * estimation_size, estimation_size};
  }
};

enum class StrategyKind {
  proper_score,  // expected score gain for a registered rule
  max_entropy,
  bald,
  mocu,
  wmocu,
  random_uniform,
};

struct StrategyParams {
  double wmocu_k = 64.0;       // soft-min sharpness; hard-min limit >= 1e7
  std::uint64_t seed = 0;      // random baseline stream
};

struct Strategy {
  std::string name;
  StrategyKind kind = StrategyKind::proper_score;
  std::optional<ScoringRule> rule;
  StrategyParams params;
};

/// Resolve a strategy by name: "max_ent", "bald", "mocu", "wmocu", "random",
/// or any registered scoring-rule name ("core_mse", "core_log", custom).
Strategy make_strategy(const std::string& name, const StrategyParams& params = {});

/// True when the strategy's score decomposes over estimation points, i.e.
/// score-change vectors exist and diverse batch selection applies.
bool strategy_supports_vectors(StrategyKind kind);

struct ScoreOptions {
  bool keep_pairs = false;
  bool parallel = true;  // serial path is the reference implementation
};

/// Scores every pool element. Results are identical (bitwise) between the
/// serial and parallel paths: elements are independent and all reductions
/// run in fixed pool order.
AcquisitionScores score_pool(const AcquisitionContext& ctx,
                             const Strategy& strategy,
                             const ScoreOptions& opts = {});

/// Pool element with maximal score; ties broken by lowest pool index.
std::size_t select_argmax_position(const AcquisitionContext& ctx,
                                   const Strategy& strategy);
InputId select_argmax(const AcquisitionContext& ctx, const Strategy& strategy);

// --- per-point operations (straight-line forms used by the pool kernel's
// --- tests and by callers that need a single value) ---

/// Expected gain in G at estimation point x_prime from labelling x:
///   sum_y qx(y) G(predictive after (x,y) at x_prime) - G(predictive at x_prime).
double delta_q_point(const AcquisitionContext& ctx, InputId x, InputId x_prime);

/// Sum of delta_q_point over the estimation pool (no 1/|X| factor; ranking
/// is unaffected).
double delta_q(const AcquisitionContext& ctx, InputId x);

double max_entropy_score(const AcquisitionContext& ctx, InputId x);

/// Mutual information between the label at x and the model index.
double bald_score(const AcquisitionContext& ctx, InputId x);

/// Expected reduction in Bayesian regret: difference between the Bayes
/// classifier's error and the posterior-average per-model optimal error,
/// summed over the estimation pool, before vs. expected-after labelling x.
double mocu_delta(const AcquisitionContext& ctx, InputId x);

/// MOCU with the hard min-error softened by a log-sum-exp surrogate of
/// sharpness k; approaches mocu_delta as k grows.
double wmocu_delta(const AcquisitionContext& ctx, InputId x, double k);

/// Uniform pseudo-random score, deterministic per (seed, round, x).
double random_score(const AcquisitionContext& ctx, InputId x,
                    std::uint64_t seed);

/// Soft maximum via log-sum-exp at sharpness k; exact maximum as k -> inf.
double soft_max(std::span<const double> q, double k);

}  // namespace bemps
