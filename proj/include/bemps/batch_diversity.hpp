#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bemps/acquisition.hpp"
#include "bemps/common.hpp"

namespace bemps {

struct BatchRequest {
  std::size_t batch_size = 1;   // B
  double top_fraction = 0.5;    // T in (0, 1]
  std::uint64_t seed = 0;
  std::size_t kmeans_max_iters = 100;
};

/// Positions of the `count` highest values, ordered by (value desc, index
/// asc); boundary ties go to the lowest index.
std::vector<std::size_t> top_indices(std::span<const double> values,
                                     std::size_t count);

/// Candidate set V: the ceil(T * |U|) top-scoring pool positions.
std::vector<std::size_t> top_fraction(const AcquisitionScores& scores,
                                      double fraction);

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;  // per input vector, centroid index
  std::size_t iterations = 0;
};

/// Lloyd iterations with k-means++ seeding. Deterministic given the seed:
/// assignment runs in input order (ties to the lowest centroid index) and
/// centroid updates are fixed-order reductions. An emptied cluster is
/// re-seeded at the vector farthest from its nearest centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& vectors,
                    std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100);

/// Diverse batch: cluster the candidates' score-change vectors into B groups
/// and return the nearest candidate to each centroid. A candidate already
/// taken by an earlier centroid is replaced by the next-nearest unused one,
/// so exactly B distinct pool positions come back.
std::vector<std::size_t> select_batch_positions(const AcquisitionScores& scores,
                                                const BatchRequest& req);

std::vector<InputId> select_batch(const AcquisitionScores& scores,
                                  const BatchRequest& req);

}  // namespace bemps
