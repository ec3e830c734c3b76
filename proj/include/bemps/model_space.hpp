#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bemps/common.hpp"

namespace bemps {

/// Per-model table of conditional label distributions: one row per input,
/// rows are probability vectors over classes.
struct ConditionalTable {
  std::size_t num_inputs = 0;
  std::size_t num_classes = 0;
  std::vector<double> probs;  // row-major, num_inputs x num_classes

  std::span<const double> row(std::size_t r) const {
    return {probs.data() + r * num_classes, num_classes};
  }
  double at(std::size_t r, std::size_t cls) const {
    return probs[r * num_classes + cls];
  }
};

struct FamilyOptions {
  /// Identifiability: no two tables may coincide (max-abs difference above
  /// 1e-9). Disabled only for ensemble pseudo-families, where fitted members
  /// can legitimately collide.
  bool require_identifiable = true;
};

/// Finite set of candidate classifiers over a shared finite input space,
/// with a prior over them. Immutable after construction; safe to share
/// read-only across threads.
class ModelFamily {
 public:
  static ModelFamily create(std::vector<ConditionalTable> models,
                            std::vector<InputId> input_space,
                            std::vector<double> prior,
                            const FamilyOptions& opts = {});

  std::size_t num_models() const { return models_.size(); }
  std::size_t num_inputs() const { return input_space_.size(); }
  std::size_t num_classes() const { return num_classes_; }

  const std::vector<InputId>& input_space() const { return input_space_; }
  const std::vector<double>& prior() const { return prior_; }
  const ConditionalTable& model(std::size_t i) const { return models_[i]; }

  /// Row index for an input identifier; throws std::out_of_range on unknown.
  std::size_t row_of(InputId id) const;
  InputId id_at(std::size_t row) const { return input_space_[row]; }

  double prob(std::size_t model, std::size_t row, std::size_t cls) const {
    return models_[model].at(row, cls);
  }

  /// Input-major layout for scoring kernels: for a fixed input row, the
  /// num_models x num_classes block is contiguous (model-major).
  std::span<const double> input_block(std::size_t row) const {
    const std::size_t stride = models_.size() * num_classes_;
    return {by_input_.data() + row * stride, stride};
  }

 private:
  ModelFamily() = default;

  std::vector<ConditionalTable> models_;
  std::vector<InputId> input_space_;
  std::size_t num_classes_ = 0;
  std::vector<double> prior_;
  std::vector<double> by_input_;
  std::unordered_map<InputId, std::size_t> row_index_;
};

/// Normalized weight vector over a family's models, kept in log-space.
/// Updates return new values; the original is never mutated.
class Posterior {
 public:
  static Posterior uniform(std::size_t num_models);
  /// Normalizes by subtracting the log-sum-exp; throws
  /// ImpossibleEvidenceError when the total mass is zero.
  static Posterior from_log_weights(std::vector<double> log_weights);

  std::size_t size() const { return log_weights_.size(); }
  const std::vector<double>& log_weights() const { return log_weights_; }
  double log_weight(std::size_t i) const { return log_weights_[i]; }
  double weight(std::size_t i) const;
  std::vector<double> weights() const;

 private:
  explicit Posterior(std::vector<double> lw) : log_weights_(std::move(lw)) {}
  std::vector<double> log_weights_;
};

struct LabeledSet {
  std::vector<std::pair<InputId, int>> pairs;

  void add(InputId x, int y) { pairs.emplace_back(x, y); }
  std::size_t size() const { return pairs.size(); }
};

/// One Bayes step on observation (x, y). Log-space throughout.
Posterior posterior_update(const Posterior& posterior, const ModelFamily& family,
                           InputId x, int y);

/// Identical arithmetic to posterior_update; named for the what-if use inside
/// acquisition loops where the result is discarded after scoring.
Posterior hypothetical_posterior(const Posterior& posterior,
                                 const ModelFamily& family, InputId x, int y);

/// Fold of posterior_update over a labelled set, starting from the prior.
Posterior posterior_from(const ModelFamily& family, const LabeledSet& labelled);

/// Mixture of per-model rows under the posterior weights.
std::vector<double> posterior_predictive(const Posterior& posterior,
                                         const ModelFamily& family, InputId x);

struct GeneratorSpec {
  std::size_t num_models = 0;
  std::size_t num_inputs = 0;
  std::size_t num_classes = 0;
  double concentration = 1.0;
  /// Required pairwise max-abs table difference between distinct models.
  double min_separation = 0.05;
  std::size_t max_attempts_per_model = 200;
};

/// Draws an identifiable family with Dirichlet rows, uniform prior, and all
/// table entries floored at 1e-6 so no observation has zero likelihood under
/// every model. Deterministic given the seed.
ModelFamily sample_family(const GeneratorSpec& spec, std::uint64_t seed);

/// Plain-text tabular serialization, 17 significant digits, replayable
/// across implementations.
void save_family(const ModelFamily& family, std::ostream& out);
void save_family(const ModelFamily& family, const std::string& path);
ModelFamily load_family(std::istream& in);
ModelFamily load_family(const std::string& path);

}  // namespace bemps
