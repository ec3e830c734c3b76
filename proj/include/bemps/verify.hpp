#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bemps/acquisition.hpp"
#include "bemps/model_space.hpp"
#include "bemps/scoring_rules.hpp"

namespace bemps {

/// Result of one built-in property suite. `worst` carries the suite's
/// headline residual (most negative score, largest route disagreement, ...).
struct SuiteReport {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  std::string detail;
};

// Three independent straight-line routes to the expected-score-gap
// functional over the estimation pool (sum convention, no 1/|X|):
//   * expected score difference between per-model and predictive forecasts,
//   * expected Bregman divergence from the predictive to each model,
//   * convex-gap form E[G(model)] - G(predictive).
// They are algebraically equal; the suites bound their numeric disagreement.
double q_s_score_difference(const ModelFamily& family, const Posterior& posterior,
                            const std::vector<InputId>& estimation,
                            const ScoringRule& rule);
double q_s_bregman(const ModelFamily& family, const Posterior& posterior,
                   const std::vector<InputId>& estimation,
                   const ScoringRule& rule);
double q_s_convex_gap(const ModelFamily& family, const Posterior& posterior,
                      const std::vector<InputId>& estimation,
                      const ScoringRule& rule);

struct VerifyOptions {
  std::uint64_t seed = 20240501;
  std::size_t nonneg_contexts = 200;
  std::size_t equivalence_instances = 100;
  std::size_t convergence_families = 20;
  /// Overrides the proper-score rules under test (mutation testing hook).
  std::optional<std::vector<ScoringRule>> rules;
};

/// Non-negativity sweep: every proper-score delta and BALD score across
/// seeded random contexts stays above -1e-10.
SuiteReport nonnegativity_suite(const VerifyOptions& opts = {});

/// Route agreement within 1e-9 for both built-in rules on random instances.
SuiteReport equivalence_suite(const VerifyOptions& opts = {});

/// Convergence battery: exact-mode runs with core_mse, core_log and bald on
/// seeded identifiable families reach posterior mass >= 0.99 on the true
/// model within a 300-label budget, with final max pool score <= 1e-3.
SuiteReport convergence_suite(const VerifyOptions& opts = {});

std::vector<SuiteReport> run_all_suites(const VerifyOptions& opts = {});

/// Deterministic random instance used by the suites: a sampled family, a
/// posterior (Bayes-updated or raw Dirichlet weights), and pools.
struct RandomInstance {
  ModelFamily family;
  Posterior posterior;
  std::vector<InputId> pool;
  std::vector<InputId> estimation;
};
RandomInstance make_random_instance(std::uint64_t seed);

}  // namespace bemps
