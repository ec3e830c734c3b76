#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bemps {

inline constexpr double kLogFloor = 1e-12;  // clamp for log forms, see scoring_rules

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or a nan propagates below)
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Shannon entropy in nats; 0*log(0) treated as 0 via the clamp floor.
inline double entropy(std::span<const double> q) {
  double h = 0.0;
  for (double p : q) h -= p * std::log(std::max(p, kLogFloor));
  return h;
}

/// Checks q is a probability vector: entries in [0,1] (tiny negatives from
/// round-off rejected beyond 1e-12) and sum within `tol` of 1.
inline bool is_simplex(std::span<const double> q, double tol = 1e-9) {
  double s = 0.0;
  for (double p : q) {
    if (!(p >= -1e-12) || !(p <= 1.0 + 1e-12)) return false;
    s += p;
  }
  return std::abs(s - 1.0) <= tol;
}

inline void require_simplex(std::span<const double> q, const char* what,
                            double tol = 1e-9) {
  if (!is_simplex(q, tol))
    throw std::domain_error(std::string(what) + ": not a probability vector");
}

/// In-place renormalization of non-negative weights to sum 1.
inline void normalize(std::span<double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  if (s <= 0.0) throw std::domain_error("normalize: non-positive total mass");
  for (double& v : w) v /= s;
}

inline std::size_t argmax_index(std::span<const double> xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[best]) best = i;  // ties keep the lowest index
  return best;
}

}  // namespace bemps
