#include "bemps/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bemps/numeric.hpp"
#include "bemps/rng.hpp"

namespace bemps {

AcquisitionContext make_context(const ModelFamily& family,
                                const Posterior& posterior,
                                std::vector<InputId> pool,
                                std::vector<InputId> estimation,
                                std::optional<ScoringRule> rule,
                                std::uint64_t round) {
  if (posterior.size() != family.num_models())
    throw std::invalid_argument("make_context: posterior/family size mismatch");
  AcquisitionContext ctx;
  ctx.family = &family;
  ctx.posterior = &posterior;
  ctx.pool = std::move(pool);
  ctx.estimation = std::move(estimation);
  ctx.rule = std::move(rule);
  ctx.round = round;
  ctx.pool_rows.reserve(ctx.pool.size());
  for (InputId id : ctx.pool) ctx.pool_rows.push_back(family.row_of(id));
  ctx.estimation_rows.reserve(ctx.estimation.size());
  for (InputId id : ctx.estimation)
    ctx.estimation_rows.push_back(family.row_of(id));
  return ctx;
}

Strategy make_strategy(const std::string& name, const StrategyParams& params) {
  Strategy s;
  s.name = name;
  s.params = params;
  if (name == "max_ent") {
    s.kind = StrategyKind::max_entropy;
  } else if (name == "bald") {
    s.kind = StrategyKind::bald;
  } else if (name == "mocu") {
    s.kind = StrategyKind::mocu;
  } else if (name == "wmocu") {
    s.kind = StrategyKind::wmocu;
    if (!(params.wmocu_k > 0.0) || !std::isfinite(params.wmocu_k))
      throw ConfigError("strategy 'wmocu': k must be positive and finite");
  } else if (name == "random") {
    s.kind = StrategyKind::random_uniform;
  } else if (scoring_rule_exists(name)) {
    s.kind = StrategyKind::proper_score;
    s.rule = scoring_rule(name);
  } else {
    throw ConfigError("unknown strategy '" + name + "'");
  }
  return s;
}

bool strategy_supports_vectors(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::proper_score:
    case StrategyKind::mocu:
    case StrategyKind::wmocu:
      return true;
    default:
      return false;
  }
}

double soft_max(std::span<const double> q, double k) {
  double m = q[0];
  for (double p : q) m = std::max(m, p);
  double s = 0.0;
  for (double p : q) s += std::exp(k * (p - m));
  return m + std::log(s) / k;
}

namespace {

// Kernel-side convex functions. Same arithmetic as the public g_* forms but
// without simplex validation: kernel mixtures are normalized by construction.
struct GMseFn {
  double operator()(std::span<const double> q) const {
    double s = 0.0;
    for (double p : q) s += p * p;
    return s - 1.0;
  }
};

struct GLogFn {
  double operator()(std::span<const double> q) const {
    double s = 0.0;
    for (double p : q) s += p * std::log(std::max(p, kLogFloor));
    return s;
  }
};

// max(q) - 1 == -(Bayes classifier error). The per-model error term of the
// regret cancels in expectation against the hypothetical reweighting, so the
// pointwise regret change reduces to this convex-gap form.
struct GMaxErrFn {
  double operator()(std::span<const double> q) const {
    double m = q[0];
    for (double p : q) m = std::max(m, p);
    return m - 1.0;
  }
};

struct GSoftMaxErrFn {
  double k;
  double operator()(std::span<const double> q) const {
    return soft_max(q, k) - 1.0;
  }
};

struct GGenericFn {
  const ConvexFn* g;
  double operator()(std::span<const double> q) const { return (*g)(q); }
};

inline void mix_into(std::span<const double> block, std::span<const double> w,
                     std::span<double> q) {
  const std::size_t k = q.size();
  std::fill(q.begin(), q.end(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double wi = w[i];
    const double* row = block.data() + i * k;
    for (std::size_t y = 0; y < k; ++y) q[y] += wi * row[y];
  }
}

template <class GF>
void run_g_kernel(const AcquisitionContext& ctx, GF g, bool keep_pairs,
                  bool parallel, AcquisitionScores& out) {
  const ModelFamily& fam = *ctx.family;
  const std::size_t m = fam.num_models();
  const std::size_t k = fam.num_classes();
  const auto& est = ctx.estimation_rows;
  const std::size_t nx = est.size();
  const std::size_t n = ctx.pool_rows.size();
  const std::vector<double> w = ctx.posterior->weights();

  std::vector<double> base(nx);
  {
    std::vector<double> q(k);
    for (std::size_t j = 0; j < nx; ++j) {
      mix_into(fam.input_block(est[j]), w, q);
      base[j] = g(q);
    }
  }

  out.per_x.assign(n, 0.0);
  if (keep_pairs) {
    out.per_pair.assign(n * nx, 0.0);
    out.estimation_size = nx;
  }

#pragma omp parallel if (parallel)
  {
    std::vector<double> qx(k), qprime(k);
    std::vector<double> hyp(k * m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ui = 0; ui < static_cast<std::ptrdiff_t>(n); ++ui) {
      const std::size_t u = static_cast<std::size_t>(ui);
      const auto xblk = fam.input_block(ctx.pool_rows[u]);
      mix_into(xblk, w, qx);
      for (std::size_t y = 0; y < k; ++y) {
        if (qx[y] <= 0.0) continue;
        const double inv = 1.0 / qx[y];
        for (std::size_t i = 0; i < m; ++i)
          hyp[y * m + i] = w[i] * xblk[i * k + y] * inv;
      }
      double total = 0.0;
      for (std::size_t j = 0; j < nx; ++j) {
        const auto blk = fam.input_block(est[j]);
        double acc = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          if (qx[y] <= 0.0) continue;
          mix_into(blk, {hyp.data() + y * m, m}, qprime);
          acc += qx[y] * g(qprime);
        }
        const double v = acc - base[j];
        if (keep_pairs) out.per_pair[u * nx + j] = v;
        total += v;
      }
      out.per_x[u] = total;
    }
  }
}

template <class ScoreFn>
void run_pointwise(const AcquisitionContext& ctx, bool parallel,
                   AcquisitionScores& out, ScoreFn fn) {
  const std::size_t n = ctx.pool_rows.size();
  out.per_x.assign(n, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t ui = 0; ui < static_cast<std::ptrdiff_t>(n); ++ui)
    out.per_x[static_cast<std::size_t>(ui)] =
        fn(static_cast<std::size_t>(ui));
}

double entropy_of_mixture(const ModelFamily& fam, std::span<const double> w,
                          std::size_t row) {
  const std::size_t k = fam.num_classes();
  std::vector<double> q(k);
  mix_into(fam.input_block(row), w, q);
  return entropy(q);
}

}  // namespace

AcquisitionScores score_pool(const AcquisitionContext& ctx,
                             const Strategy& strategy,
                             const ScoreOptions& opts) {
  if (!ctx.family || !ctx.posterior)
    throw std::invalid_argument("score_pool: incomplete context");
  if (ctx.pool.empty()) throw ConfigError("score_pool: empty unlabelled pool");

  AcquisitionScores out;
  out.pool = ctx.pool;

  const bool needs_estimation = strategy_supports_vectors(strategy.kind);
  if (needs_estimation && ctx.estimation.empty())
    throw ConfigError("score_pool: empty estimation pool for strategy '" +
                      strategy.name + "'");
  if (opts.keep_pairs && !needs_estimation)
    throw ConfigError("score_pool: strategy '" + strategy.name +
                      "' has no score-change vectors");

  switch (strategy.kind) {
    case StrategyKind::proper_score: {
      const ScoringRule& rule =
          strategy.rule ? *strategy.rule
                        : (ctx.rule ? *ctx.rule
                                    : throw ConfigError(
                                          "score_pool: no scoring rule set"));
      if (rule.name == "core_mse")
        run_g_kernel(ctx, GMseFn{}, opts.keep_pairs, opts.parallel, out);
      else if (rule.name == "core_log")
        run_g_kernel(ctx, GLogFn{}, opts.keep_pairs, opts.parallel, out);
      else
        run_g_kernel(ctx, GGenericFn{&rule.G}, opts.keep_pairs, opts.parallel,
                     out);
      break;
    }
    case StrategyKind::mocu:
      run_g_kernel(ctx, GMaxErrFn{}, opts.keep_pairs, opts.parallel, out);
      break;
    case StrategyKind::wmocu:
      run_g_kernel(ctx, GSoftMaxErrFn{strategy.params.wmocu_k},
                   opts.keep_pairs, opts.parallel, out);
      break;
    case StrategyKind::max_entropy: {
      const std::vector<double> w = ctx.posterior->weights();
      run_pointwise(ctx, opts.parallel, out, [&](std::size_t u) {
        return entropy_of_mixture(*ctx.family, w, ctx.pool_rows[u]);
      });
      break;
    }
    case StrategyKind::bald: {
      const ModelFamily& fam = *ctx.family;
      const std::vector<double> w = ctx.posterior->weights();
      run_pointwise(ctx, opts.parallel, out, [&](std::size_t u) {
        const std::size_t row = ctx.pool_rows[u];
        double h_cond = 0.0;
        for (std::size_t i = 0; i < fam.num_models(); ++i)
          h_cond += w[i] * entropy(fam.model(i).row(row));
        return entropy_of_mixture(fam, w, row) - h_cond;
      });
      break;
    }
    case StrategyKind::random_uniform: {
      const std::uint64_t seed = strategy.params.seed;
      run_pointwise(ctx, opts.parallel, out, [&](std::size_t u) {
        return random_score(ctx, ctx.pool[u], seed);
      });
      break;
    }
  }
  return out;
}

std::size_t select_argmax_position(const AcquisitionContext& ctx,
                                   const Strategy& strategy) {
  if (ctx.pool.empty())
    throw ConfigError("select_argmax: empty unlabelled pool");
  const AcquisitionScores scores = score_pool(ctx, strategy);
  return argmax_index(scores.per_x);
}

InputId select_argmax(const AcquisitionContext& ctx, const Strategy& strategy) {
  return ctx.pool[select_argmax_position(ctx, strategy)];
}

double delta_q_point(const AcquisitionContext& ctx, InputId x, InputId x_prime) {
  if (!ctx.rule)
    throw ConfigError("delta_q_point: context has no scoring rule");
  const ModelFamily& fam = *ctx.family;
  const std::vector<double> qx =
      posterior_predictive(*ctx.posterior, fam, x);
  double acc = 0.0;
  for (std::size_t y = 0; y < qx.size(); ++y) {
    if (qx[y] <= 0.0) continue;
    const Posterior hyp =
        hypothetical_posterior(*ctx.posterior, fam, x, static_cast<int>(y));
    const std::vector<double> qp = posterior_predictive(hyp, fam, x_prime);
    acc += qx[y] * ctx.rule->G(qp);
  }
  const std::vector<double> qb =
      posterior_predictive(*ctx.posterior, fam, x_prime);
  return acc - ctx.rule->G(qb);
}

double delta_q(const AcquisitionContext& ctx, InputId x) {
  if (ctx.estimation.empty())
    throw ConfigError("delta_q: empty estimation pool");
  double total = 0.0;
  for (InputId xp : ctx.estimation) total += delta_q_point(ctx, x, xp);
  return total;
}

double max_entropy_score(const AcquisitionContext& ctx, InputId x) {
  return entropy(posterior_predictive(*ctx.posterior, *ctx.family, x));
}

double bald_score(const AcquisitionContext& ctx, InputId x) {
  const ModelFamily& fam = *ctx.family;
  const std::size_t row = fam.row_of(x);
  double h_cond = 0.0;
  for (std::size_t i = 0; i < fam.num_models(); ++i)
    h_cond += ctx.posterior->weight(i) * entropy(fam.model(i).row(row));
  return entropy(posterior_predictive(*ctx.posterior, fam, x)) - h_cond;
}

namespace {

// Bayesian regret over the estimation pool: Bayes-classifier error minus the
// posterior-average per-model optimal error, with min replaced by `err`.
template <class ErrFn>
double regret_total(const AcquisitionContext& ctx, const Posterior& post,
                    ErrFn err) {
  const ModelFamily& fam = *ctx.family;
  const std::size_t k = fam.num_classes();
  const std::vector<double> w = post.weights();
  std::vector<double> q(k);
  double total = 0.0;
  for (std::size_t row : ctx.estimation_rows) {
    mix_into(fam.input_block(row), w, q);
    double model_part = 0.0;
    for (std::size_t i = 0; i < fam.num_models(); ++i)
      model_part += w[i] * err(fam.model(i).row(row));
    total += err(q) - model_part;
  }
  return total;
}

template <class ErrFn>
double regret_delta(const AcquisitionContext& ctx, InputId x, ErrFn err) {
  if (ctx.estimation.empty())
    throw ConfigError("mocu_delta: empty estimation pool");
  const std::vector<double> qx =
      posterior_predictive(*ctx.posterior, *ctx.family, x);
  double after = 0.0;
  for (std::size_t y = 0; y < qx.size(); ++y) {
    if (qx[y] <= 0.0) continue;
    const Posterior hyp = hypothetical_posterior(*ctx.posterior, *ctx.family,
                                                 x, static_cast<int>(y));
    after += qx[y] * regret_total(ctx, hyp, err);
  }
  return regret_total(ctx, *ctx.posterior, err) - after;
}

}  // namespace

double mocu_delta(const AcquisitionContext& ctx, InputId x) {
  return regret_delta(ctx, x, [](std::span<const double> q) {
    double m = q[0];
    for (double p : q) m = std::max(m, p);
    return 1.0 - m;
  });
}

double wmocu_delta(const AcquisitionContext& ctx, InputId x, double k) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw ConfigError("wmocu_delta: k must be positive and finite");
  return regret_delta(ctx, x, [k](std::span<const double> q) {
    return 1.0 - soft_max(q, k);
  });
}

double random_score(const AcquisitionContext& ctx, InputId x,
                    std::uint64_t seed) {
  return uniform01_from_key(
      mix64(mix64(seed, ctx.round), static_cast<std::uint64_t>(x)));
}

}  // namespace bemps
