#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bemps {

using InputId = std::int64_t;

inline constexpr const char* kEngineVersion = "0.1.0";

/// All models assign zero likelihood to an observation. Kept distinct from
/// numeric underflow: underflow renormalizes fine in log-space, a true zero
/// means the evidence contradicts every model in the family.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Family generation could not satisfy the separation constraint within the
/// retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run/experiment configuration (bad strategy name, empty pool, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Batch selection asked for more representatives than there are candidates.
class BatchUnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bemps
