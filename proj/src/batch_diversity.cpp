#include "bemps/batch_diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bemps/rng.hpp"

namespace bemps {

std::vector<std::size_t> top_indices(std::span<const double> values,
                                     std::size_t count) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  order.resize(count);
  return order;
}

std::vector<std::size_t> top_fraction(const AcquisitionScores& scores,
                                      double fraction) {
  if (scores.per_x.empty()) throw ConfigError("top_fraction: no scores");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ConfigError("top_fraction: T must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(scores.per_x.size())));
  return top_indices(scores.per_x, std::max<std::size_t>(count, 1));
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// D^2-weighted seeding.
std::vector<std::vector<double>> kmeanspp_seed(
    const std::vector<std::vector<double>>& vectors, std::size_t k, Rng& rng) {
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  centers.push_back(vectors[rng.uniform_index(vectors.size())]);
  std::vector<double> d2(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i)
    d2[i] = sq_dist(vectors[i], centers[0]);
  while (centers.size() < k) {
    double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform01() * total;
      double run = 0.0;
      pick = d2.size() - 1;
      for (std::size_t i = 0; i < d2.size(); ++i) {
        run += d2[i];
        if (run >= r) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with existing centers; any choice is a zero-cost
      // duplicate centroid.
      pick = rng.uniform_index(vectors.size());
    }
    centers.push_back(vectors[pick]);
    for (std::size_t i = 0; i < vectors.size(); ++i)
      d2[i] = std::min(d2[i], sq_dist(vectors[i], centers.back()));
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& vectors,
                    std::size_t k, std::uint64_t seed, std::size_t max_iters) {
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (k > vectors.size())
    throw ConfigError("kmeans: k exceeds the number of vectors");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != dim) throw std::invalid_argument("kmeans: ragged input");

  Rng rng(derive_seed(seed, "kmeans"));
  KMeansResult res;
  res.centroids = kmeanspp_seed(vectors, k, rng);
  res.assignment.assign(vectors.size(), 0);

  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;
    bool changed = false;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t vi = 0; vi < static_cast<std::ptrdiff_t>(vectors.size());
         ++vi) {
      const auto& v = vectors[static_cast<std::size_t>(vi)];
      std::size_t best = 0;
      double best_d = sq_dist(v, res.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(v, res.centroids[c]);
        if (d < best_d) {  // ties keep the lowest centroid index
          best_d = d;
          best = c;
        }
      }
      if (res.assignment[static_cast<std::size_t>(vi)] != best) {
        res.assignment[static_cast<std::size_t>(vi)] = best;
#pragma omp atomic write
        changed = true;
      }
    }

    // Fixed-order centroid update keeps results independent of scheduling.
    for (auto& c : res.centroids) std::fill(c.begin(), c.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const std::size_t c = res.assignment[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d)
        res.centroids[c][d] += vectors[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        const double inv = 1.0 / static_cast<double>(counts[c]);
        for (double& x : res.centroids[c]) x *= inv;
      } else {
        // Re-seed an emptied cluster at the vector farthest from its nearest
        // centroid, keeping k live representatives.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
          double nearest = std::numeric_limits<double>::infinity();
          for (std::size_t c2 = 0; c2 < k; ++c2) {
            if (c2 == c || counts[c2] == 0) continue;
            nearest = std::min(nearest, sq_dist(vectors[i], res.centroids[c2]));
          }
          if (nearest > far_d) {
            far_d = nearest;
            far = i;
          }
        }
        res.centroids[c] = vectors[far];
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
  }
  return res;
}

std::vector<std::size_t> select_batch_positions(const AcquisitionScores& scores,
                                                const BatchRequest& req) {
  if (!scores.has_pairs())
    throw ConfigError("select_batch: score-change vectors were not retained");
  const std::size_t b = req.batch_size;
  if (b == 0) throw ConfigError("select_batch: batch size must be positive");

  const std::vector<std::size_t> candidates =
      top_fraction(scores, req.top_fraction);
  if (candidates.size() < b)
    throw BatchUnderflowError(
        "select_batch: " + std::to_string(candidates.size()) +
        " candidates for batch size " + std::to_string(b));

  std::vector<std::vector<double>> vecs;
  vecs.reserve(candidates.size());
  for (std::size_t pos : candidates) {
    const auto row = scores.pair_row(pos);
    vecs.emplace_back(row.begin(), row.end());
  }

  const KMeansResult km = kmeans(vecs, b, req.seed, req.kmeans_max_iters);

  std::vector<std::size_t> batch;
  batch.reserve(b);
  std::vector<bool> used(candidates.size(), false);
  for (const auto& centroid : km.centroids) {
    std::size_t best = candidates.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      if (used[ci]) continue;
      const double d = sq_dist(vecs[ci], centroid);
      // Distance ties go to the lowest pool position.
      if (d < best_d ||
          (d == best_d && best < candidates.size() &&
           candidates[ci] < candidates[best])) {
        best_d = d;
        best = ci;
      }
    }
    used[best] = true;
    batch.push_back(candidates[best]);
  }
  return batch;
}

std::vector<InputId> select_batch(const AcquisitionScores& scores,
                                  const BatchRequest& req) {
  std::vector<InputId> out;
  for (std::size_t pos : select_batch_positions(scores, req))
    out.push_back(scores.pool[pos]);
  return out;
}

}  // namespace bemps
