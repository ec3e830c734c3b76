#include "bemps/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bemps/numeric.hpp"
#include "bemps/rng.hpp"
#include "bemps/simulator.hpp"

namespace bemps {

double q_s_score_difference(const ModelFamily& family, const Posterior& posterior,
                            const std::vector<InputId>& estimation,
                            const ScoringRule& rule) {
  double total = 0.0;
  for (InputId xp : estimation) {
    const std::size_t row = family.row_of(xp);
    const std::vector<double> q = posterior_predictive(posterior, family, xp);
    for (std::size_t i = 0; i < family.num_models(); ++i) {
      const auto model_row = family.model(i).row(row);
      const double w = posterior.weight(i);
      double inner = 0.0;
      for (std::size_t y = 0; y < model_row.size(); ++y)
        inner += model_row[y] * (score(rule, model_row, static_cast<int>(y)) -
                                 score(rule, q, static_cast<int>(y)));
      total += w * inner;
    }
  }
  return total;
}

double q_s_bregman(const ModelFamily& family, const Posterior& posterior,
                   const std::vector<InputId>& estimation,
                   const ScoringRule& rule) {
  double total = 0.0;
  for (InputId xp : estimation) {
    const std::size_t row = family.row_of(xp);
    const std::vector<double> q = posterior_predictive(posterior, family, xp);
    for (std::size_t i = 0; i < family.num_models(); ++i)
      total +=
          posterior.weight(i) * bregman(rule, family.model(i).row(row), q);
  }
  return total;
}

double q_s_convex_gap(const ModelFamily& family, const Posterior& posterior,
                      const std::vector<InputId>& estimation,
                      const ScoringRule& rule) {
  double total = 0.0;
  for (InputId xp : estimation) {
    const std::size_t row = family.row_of(xp);
    const std::vector<double> q = posterior_predictive(posterior, family, xp);
    double expected_g = 0.0;
    for (std::size_t i = 0; i < family.num_models(); ++i)
      expected_g += posterior.weight(i) * rule.G(family.model(i).row(row));
    total += expected_g - rule.G(q);
  }
  return total;
}

RandomInstance make_random_instance(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "instance"));
  GeneratorSpec spec;
  spec.num_models = 2 + rng.uniform_index(19);   // up to 20
  spec.num_inputs = 5 + rng.uniform_index(46);   // up to 50
  spec.num_classes = 2 + rng.uniform_index(4);   // up to 5
  spec.concentration = 1.0;
  spec.min_separation = 1e-3;
  ModelFamily family = sample_family(spec, rng.next_u64());

  Posterior posterior = Posterior::uniform(family.num_models());
  if (rng.uniform01() < 0.5) {
    // Bayes posterior from a short random label history.
    Oracle oracle = make_oracle(
        family, rng.uniform_index(family.num_models()), rng.next_u64());
    const std::size_t n_obs = 1 + rng.uniform_index(20);
    for (std::size_t i = 0; i < n_obs; ++i) {
      const InputId x = family.input_space()[rng.uniform_index(
          family.num_inputs())];
      posterior =
          posterior_update(posterior, family, x, oracle_label(oracle, family, x));
    }
  } else {
    // Raw random weights; non-negativity holds for any normalized weights.
    std::vector<double> w(family.num_models());
    rng.dirichlet(1.0, w);
    std::vector<double> lw(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      lw[i] = std::log(std::max(w[i], 1e-300));
    posterior = Posterior::from_log_weights(std::move(lw));
  }

  RandomInstance inst{std::move(family), std::move(posterior), {}, {}};
  const std::size_t pool_n = 10 + rng.uniform_index(21);
  const std::size_t est_n = 5 + rng.uniform_index(16);
  for (std::size_t i = 0; i < pool_n; ++i)
    inst.pool.push_back(
        inst.family.input_space()[rng.uniform_index(inst.family.num_inputs())]);
  for (std::size_t i = 0; i < est_n; ++i)
    inst.estimation.push_back(
        inst.family.input_space()[rng.uniform_index(inst.family.num_inputs())]);
  return inst;
}

namespace {

std::string fmt_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

SuiteReport nonnegativity_suite(const VerifyOptions& opts) {
  SuiteReport report;
  report.name = "nonnegativity";
  std::vector<ScoringRule> rules =
      opts.rules ? *opts.rules
                 : std::vector<ScoringRule>{scoring_rule("core_mse"),
                                            scoring_rule("core_log")};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < opts.nonneg_contexts; ++c) {
    const RandomInstance inst =
        make_random_instance(derive_seed(opts.seed, "nonneg", c));
    for (const ScoringRule& rule : rules) {
      Strategy strat;
      strat.name = rule.name;
      strat.kind = StrategyKind::proper_score;
      strat.rule = rule;
      const AcquisitionContext ctx = make_context(
          inst.family, inst.posterior, inst.pool, inst.estimation, rule);
      const AcquisitionScores scores = score_pool(ctx, strat);
      for (double v : scores.per_x) worst = std::min(worst, v);
    }
    const AcquisitionContext ctx = make_context(inst.family, inst.posterior,
                                                inst.pool, inst.estimation);
    const AcquisitionScores scores =
        score_pool(ctx, make_strategy("bald"));
    for (double v : scores.per_x) worst = std::min(worst, v);
  }
  report.worst = worst;
  report.passed = worst >= -1e-10;
  report.detail = "most negative score " + fmt_sci(worst) + " (bound -1e-10)";
  return report;
}

SuiteReport equivalence_suite(const VerifyOptions& opts) {
  SuiteReport report;
  report.name = "equivalence";
  std::vector<ScoringRule> rules =
      opts.rules ? *opts.rules
                 : std::vector<ScoringRule>{scoring_rule("core_mse"),
                                            scoring_rule("core_log")};
  double worst = 0.0;
  for (std::size_t c = 0; c < opts.equivalence_instances; ++c) {
    const RandomInstance inst =
        make_random_instance(derive_seed(opts.seed, "equiv", c));
    for (const ScoringRule& rule : rules) {
      const double a =
          q_s_score_difference(inst.family, inst.posterior, inst.estimation, rule);
      const double b =
          q_s_bregman(inst.family, inst.posterior, inst.estimation, rule);
      const double g =
          q_s_convex_gap(inst.family, inst.posterior, inst.estimation, rule);
      worst = std::max({worst, std::abs(a - b), std::abs(a - g),
                        std::abs(b - g)});
    }
  }
  report.worst = worst;
  report.passed = worst <= 1e-9;
  report.detail = "max route disagreement " + fmt_sci(worst) + " (bound 1e-9)";
  return report;
}

SuiteReport convergence_suite(const VerifyOptions& opts) {
  SuiteReport report;
  report.name = "convergence";
  const char* strategies[] = {"core_mse", "core_log", "bald"};
  double worst_mass = 1.0;
  double worst_score = 0.0;
  bool passed = true;
  for (std::size_t f = 0; f < opts.convergence_families; ++f) {
    GeneratorSpec spec;
    spec.num_models = 6 + f % 5;
    spec.num_inputs = 30;
    spec.num_classes = 2 + f % 3;
    spec.concentration = 1.0;
    spec.min_separation = 0.2;
    const std::uint64_t fam_seed = derive_seed(opts.seed, "conv_family", f);
    const ModelFamily family = sample_family(spec, fam_seed);
    for (std::size_t s = 0; s < 3; ++s) {
      RunConfig config;
      config.strategy = strategies[s];
      config.batch_size = 5;
      config.budget = 300;
      config.initial_labeled = 26;
      config.estimation_pool = 100;
      config.pool_size = 600;
      config.test_size = 200;
      config.seed = derive_seed(fam_seed, "run", s);
      Oracle oracle = make_oracle(
          family, mix64(fam_seed, 17) % family.num_models(),
          derive_seed(fam_seed, "oracle", s));
      const Trajectory traj = run_active_learning(config, family, oracle);
      const double mass = traj.records.back().posterior_mass_true;
      const double final_score = traj.final_max_score;
      worst_mass = std::min(worst_mass, mass);
      if (std::isfinite(final_score))
        worst_score = std::max(worst_score, final_score);
      if (!(mass >= 0.99) || !(final_score <= 1e-3)) passed = false;
    }
  }
  report.worst = worst_score;
  report.passed = passed;
  report.detail = "min final mass " + fmt_sci(worst_mass) +
                  " (bound 0.99), max final score " + fmt_sci(worst_score) +
                  " (bound 1e-3)";
  return report;
}

std::vector<SuiteReport> run_all_suites(const VerifyOptions& opts) {
  return {nonnegativity_suite(opts), equivalence_suite(opts),
          convergence_suite(opts)};
}

}  // namespace bemps
