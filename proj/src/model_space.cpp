#include "bemps/model_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bemps/numeric.hpp"
#include "bemps/rng.hpp"

namespace bemps {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kIdentifiabilityTol = 1e-9;
constexpr double kTableFloor = 1e-6;

void check_table(const ConditionalTable& t, std::size_t expect_inputs,
                 std::size_t expect_classes) {
  if (t.num_inputs != expect_inputs || t.num_classes != expect_classes)
    throw std::invalid_argument("ModelFamily: model shape mismatch");
  if (t.probs.size() != t.num_inputs * t.num_classes)
    throw std::invalid_argument("ModelFamily: table size mismatch");
  for (std::size_t r = 0; r < t.num_inputs; ++r) {
    double s = 0.0;
    for (double p : t.row(r)) {
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("ModelFamily: table entry outside [0,1]");
      s += p;
    }
    if (std::abs(s - 1.0) > kRowSumTol)
      throw std::invalid_argument("ModelFamily: table row not normalized");
  }
}

double table_max_abs_diff(const ConditionalTable& a, const ConditionalTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    m = std::max(m, std::abs(a.probs[i] - b.probs[i]));
  return m;
}

}  // namespace

ModelFamily ModelFamily::create(std::vector<ConditionalTable> models,
                                std::vector<InputId> input_space,
                                std::vector<double> prior,
                                const FamilyOptions& opts) {
  if (models.empty()) throw std::invalid_argument("ModelFamily: no models");
  if (input_space.empty())
    throw std::invalid_argument("ModelFamily: empty input space");
  const std::size_t n_inputs = input_space.size();
  const std::size_t n_classes = models.front().num_classes;
  if (n_classes == 0) throw std::invalid_argument("ModelFamily: zero classes");
  for (const auto& m : models) check_table(m, n_inputs, n_classes);

  if (prior.size() != models.size())
    throw std::invalid_argument("ModelFamily: prior length mismatch");
  double prior_sum = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw std::invalid_argument("ModelFamily: negative prior entry");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > kRowSumTol)
    throw std::invalid_argument("ModelFamily: prior not normalized");

  if (opts.require_identifiable) {
    for (std::size_t i = 0; i < models.size(); ++i)
      for (std::size_t j = i + 1; j < models.size(); ++j)
        if (table_max_abs_diff(models[i], models[j]) <= kIdentifiabilityTol)
          throw std::invalid_argument(
              "ModelFamily: models " + std::to_string(i) + " and " +
              std::to_string(j) + " are indistinguishable");
  }

  ModelFamily f;
  f.models_ = std::move(models);
  f.input_space_ = std::move(input_space);
  f.num_classes_ = n_classes;
  f.prior_ = std::move(prior);

  f.row_index_.reserve(f.input_space_.size());
  for (std::size_t r = 0; r < f.input_space_.size(); ++r) {
    auto [it, fresh] = f.row_index_.emplace(f.input_space_[r], r);
    if (!fresh)
      throw std::invalid_argument("ModelFamily: duplicate input identifier");
  }

  const std::size_t m = f.models_.size();
  f.by_input_.resize(n_inputs * m * n_classes);
  for (std::size_t r = 0; r < n_inputs; ++r)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t y = 0; y < n_classes; ++y)
        f.by_input_[(r * m + i) * n_classes + y] = f.models_[i].at(r, y);
  return f;
}

std::size_t ModelFamily::row_of(InputId id) const {
  auto it = row_index_.find(id);
  if (it == row_index_.end())
    throw std::out_of_range("ModelFamily: unknown input identifier " +
                            std::to_string(id));
  return it->second;
}

Posterior Posterior::uniform(std::size_t num_models) {
  if (num_models == 0) throw std::invalid_argument("Posterior: zero models");
  return Posterior(std::vector<double>(
      num_models, -std::log(static_cast<double>(num_models))));
}

Posterior Posterior::from_log_weights(std::vector<double> log_weights) {
  if (log_weights.empty())
    throw std::invalid_argument("Posterior: empty weight vector");
  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse))
    throw ImpossibleEvidenceError(
        "posterior update: every model assigns zero likelihood");
  for (double& lw : log_weights) lw -= lse;
  return Posterior(std::move(log_weights));
}

double Posterior::weight(std::size_t i) const {
  return std::exp(log_weights_[i]);
}

std::vector<double> Posterior::weights() const {
  std::vector<double> w(log_weights_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights_[i]);
  return w;
}

Posterior posterior_update(const Posterior& posterior, const ModelFamily& family,
                           InputId x, int y) {
  if (posterior.size() != family.num_models())
    throw std::invalid_argument("posterior_update: size mismatch");
  if (y < 0 || static_cast<std::size_t>(y) >= family.num_classes())
    throw std::out_of_range("posterior_update: class index out of range");
  const std::size_t row = family.row_of(x);
  std::vector<double> lw = posterior.log_weights();
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double lik = family.prob(i, row, static_cast<std::size_t>(y));
    lw[i] += lik > 0.0 ? std::log(lik)
                       : -std::numeric_limits<double>::infinity();
  }
  return Posterior::from_log_weights(std::move(lw));
}

Posterior hypothetical_posterior(const Posterior& posterior,
                                 const ModelFamily& family, InputId x, int y) {
  return posterior_update(posterior, family, x, y);
}

Posterior posterior_from(const ModelFamily& family, const LabeledSet& labelled) {
  std::vector<double> lw(family.num_models());
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double p = family.prior()[i];
    lw[i] = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  Posterior post = Posterior::from_log_weights(std::move(lw));
  for (const auto& [x, y] : labelled.pairs)
    post = posterior_update(post, family, x, y);
  return post;
}

std::vector<double> posterior_predictive(const Posterior& posterior,
                                         const ModelFamily& family, InputId x) {
  const std::size_t row = family.row_of(x);
  const std::size_t k = family.num_classes();
  std::vector<double> q(k, 0.0);
  for (std::size_t i = 0; i < family.num_models(); ++i) {
    const double w = posterior.weight(i);
    const auto r = family.model(i).row(row);
    for (std::size_t y = 0; y < k; ++y) q[y] += w * r[y];
  }
  return q;
}

ModelFamily sample_family(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.num_models == 0 || spec.num_inputs == 0 || spec.num_classes == 0)
    throw std::invalid_argument("sample_family: zero-sized spec");
  if (spec.concentration <= 0.0)
    throw std::invalid_argument("sample_family: concentration must be positive");

  Rng rng(derive_seed(seed, "family"));
  const std::size_t k = spec.num_classes;
  std::vector<ConditionalTable> models;
  models.reserve(spec.num_models);

  // Mixing a dash of uniform guarantees every entry >= kTableFloor while
  // keeping rows exactly normalized.
  const double blend = static_cast<double>(k) * kTableFloor;

  std::size_t attempts = 0;
  const std::size_t max_attempts =
      spec.max_attempts_per_model * spec.num_models;
  while (models.size() < spec.num_models) {
    if (++attempts > max_attempts)
      throw GenerationError(
          "sample_family: separation " + std::to_string(spec.min_separation) +
          " unattainable after " + std::to_string(max_attempts) + " attempts");
    ConditionalTable t;
    t.num_inputs = spec.num_inputs;
    t.num_classes = k;
    t.probs.resize(spec.num_inputs * k);
    std::vector<double> row(k);
    for (std::size_t r = 0; r < spec.num_inputs; ++r) {
      rng.dirichlet(spec.concentration, row);
      for (std::size_t y = 0; y < k; ++y)
        t.probs[r * k + y] =
            (1.0 - blend) * row[y] + blend / static_cast<double>(k);
    }
    bool separated = true;
    for (const auto& prev : models)
      if (table_max_abs_diff(prev, t) < spec.min_separation) {
        separated = false;
        break;
      }
    if (separated) models.push_back(std::move(t));
  }

  std::vector<InputId> ids(spec.num_inputs);
  for (std::size_t r = 0; r < spec.num_inputs; ++r)
    ids[r] = static_cast<InputId>(r);
  std::vector<double> prior(spec.num_models,
                            1.0 / static_cast<double>(spec.num_models));
  return ModelFamily::create(std::move(models), std::move(ids),
                             std::move(prior));
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_family(const ModelFamily& family, std::ostream& out) {
  out << "family_version 1\n";
  out << "num_models " << family.num_models() << "\n";
  out << "num_inputs " << family.num_inputs() << "\n";
  out << "num_classes " << family.num_classes() << "\n";
  out << "prior";
  for (double p : family.prior()) out << ' ' << fmt17(p);
  out << "\n";
  for (std::size_t i = 0; i < family.num_models(); ++i)
    for (std::size_t r = 0; r < family.num_inputs(); ++r) {
      out << "table " << i << ' ' << family.id_at(r);
      for (double p : family.model(i).row(r)) out << ' ' << fmt17(p);
      out << "\n";
    }
}

void save_family(const ModelFamily& family, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_family: cannot open " + path);
  save_family(family, out);
}

ModelFamily load_family(std::istream& in) {
  auto fail = [](const std::string& why) -> void {
    throw std::runtime_error("load_family: " + why);
  };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "family_version" || version != 1)
    fail("bad header");
  std::size_t m = 0, n = 0, k = 0;
  if (!(in >> key >> m) || key != "num_models") fail("expected num_models");
  if (!(in >> key >> n) || key != "num_inputs") fail("expected num_inputs");
  if (!(in >> key >> k) || key != "num_classes") fail("expected num_classes");
  if (!(in >> key) || key != "prior") fail("expected prior");
  std::vector<double> prior(m);
  for (double& p : prior)
    if (!(in >> p)) fail("truncated prior");

  std::vector<ConditionalTable> models(m);
  for (auto& t : models) {
    t.num_inputs = n;
    t.num_classes = k;
    t.probs.assign(n * k, -1.0);
  }
  std::vector<InputId> ids(n, 0);
  std::vector<bool> id_seen(n, false);
  std::vector<std::size_t> next_row(m, 0);
  for (std::size_t line = 0; line < m * n; ++line) {
    std::size_t model_idx = 0;
    InputId id = 0;
    if (!(in >> key >> model_idx >> id) || key != "table")
      fail("expected table row");
    if (model_idx >= m) fail("model index out of range");
    // Row order within a model defines the input order; the first model's
    // rows establish the id list.
    const std::size_t row = next_row[model_idx]++;
    if (row >= n) fail("too many rows for one model");
    if (model_idx == 0) {
      ids[row] = id;
      id_seen[row] = true;
    } else if (!id_seen[row] || ids[row] != id) {
      fail("inconsistent input identifiers across models");
    }
    for (std::size_t y = 0; y < k; ++y)
      if (!(in >> models[model_idx].probs[row * k + y])) fail("truncated row");
  }
  return ModelFamily::create(std::move(models), std::move(ids),
                             std::move(prior));
}

ModelFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_family: cannot open " + path);
  return load_family(in);
}

}  // namespace bemps
