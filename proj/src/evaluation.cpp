#include "bemps/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace bemps {

double weighted_f1(std::span<const int> predictions,
                   std::span<const int> truths, int num_classes) {
  if (predictions.empty() || predictions.size() != truths.size())
    throw std::domain_error("weighted_f1: empty or mismatched inputs");
  if (num_classes <= 0) throw std::domain_error("weighted_f1: no classes");
  std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i], p = predictions[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
      throw std::domain_error("weighted_f1: class index out of range");
    if (t == p)
      ++tp[t];
    else {
      ++fp[p];
      ++fn[t];
    }
  }
  double f1 = 0.0;
  const double n = static_cast<double>(truths.size());
  for (int c = 0; c < num_classes; ++c) {
    const double support = tp[c] + fn[c];
    if (support == 0.0) continue;
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    const double class_f1 = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    f1 += (support / n) * class_f1;
  }
  return f1;
}

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.empty() || predictions.size() != truths.size())
    throw std::domain_error("accuracy: empty or mismatched inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truths.size(); ++i)
    if (predictions[i] == truths[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truths.size());
}

int paired_t_outcome(std::span<const double> series_i,
                     std::span<const double> series_j) {
  constexpr std::size_t kPoints = 5;
  constexpr double kThreshold = 2.776;
  if (series_i.size() != kPoints || series_j.size() != kPoints)
    throw std::domain_error("paired_t_outcome: exactly 5 paired values required");
  double mean = 0.0;
  for (std::size_t k = 0; k < kPoints; ++k) mean += series_i[k] - series_j[k];
  mean /= kPoints;
  double ss = 0.0;
  for (std::size_t k = 0; k < kPoints; ++k) {
    const double d = series_i[k] - series_j[k] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (kPoints - 1));
  if (sd == 0.0) return mean > 0.0 ? 1 : 0;
  const double t = std::sqrt(5.0) * mean / sd;
  return (mean > 0.0 && t > kThreshold) ? 1 : 0;
}

namespace {

/// Five maximally spaced points: indices step, 2*step, ..., 5*step (1-based).
bool spaced_points(const std::vector<double>& curve, std::size_t spacing,
                   std::vector<double>& out) {
  const std::size_t n = curve.size();
  const std::size_t step = spacing > 0 ? spacing : n / 5;
  if (step == 0 || 5 * step > n) return false;
  out.resize(5);
  for (std::size_t k = 1; k <= 5; ++k) out[k - 1] = curve[k * step - 1];
  return true;
}

}  // namespace

std::vector<std::string> ComparisonMatrix::ranking() const {
  std::vector<std::size_t> order(methods.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return totals[a] > totals[b];
                   });
  std::vector<std::string> names;
  names.reserve(order.size());
  for (std::size_t i : order) names.push_back(methods[i]);
  return names;
}

ComparisonMatrix comparison_matrix(const CurveTable& curves,
                                   std::size_t spacing) {
  ComparisonMatrix m;
  std::set<std::string> datasets;
  for (const auto& [method, per_dataset] : curves) {
    m.methods.push_back(method);
    for (const auto& [dataset, curve] : per_dataset) datasets.insert(dataset);
  }
  const std::size_t n = m.methods.size();
  m.cells.assign(n, std::vector<int>(n, 0));
  m.totals.assign(n, 0);

  for (const auto& dataset : datasets) {
    // Sampled points per method, or missing.
    std::vector<std::vector<double>> pts(n);
    std::vector<bool> ok(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& per_dataset = curves.at(m.methods[i]);
      auto it = per_dataset.find(dataset);
      if (it == per_dataset.end()) {
        m.warnings.push_back("method '" + m.methods[i] +
                             "' has no curve for dataset '" + dataset + "'");
        continue;
      }
      if (!spaced_points(it->second, spacing, pts[i])) {
        m.warnings.push_back("curve of '" + m.methods[i] + "' on '" + dataset +
                             "' too short for 5 spaced samples");
        continue;
      }
      ok[i] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !ok[i] || !ok[j]) continue;
        m.cells[i][j] += paired_t_outcome(pts[i], pts[j]);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    m.totals[i] = std::accumulate(m.cells[i].begin(), m.cells[i].end(), 0);
  return m;
}

std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) throw std::domain_error("mean_curve: no curves");
  const std::size_t n = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != n) throw std::domain_error("mean_curve: length mismatch");
  std::vector<double> mean(n, 0.0);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < n; ++i) mean[i] += c[i];
  for (double& v : mean) v /= static_cast<double>(curves.size());
  return mean;
}

void write_matrix_csv(const ComparisonMatrix& m, std::ostream& out) {
  out << "method";
  for (const auto& name : m.methods) out << ',' << name;
  out << ",total\n";
  for (std::size_t i = 0; i < m.methods.size(); ++i) {
    out << m.methods[i];
    for (std::size_t j = 0; j < m.methods.size(); ++j) out << ',' << m.cells[i][j];
    out << ',' << m.totals[i] << "\n";
  }
}

void write_outcomes_csv(const CurveTable& curves, std::size_t spacing,
                        std::ostream& out) {
  out << "method_i,method_j,dataset,outcome\n";
  std::set<std::string> datasets;
  for (const auto& [method, per_dataset] : curves)
    for (const auto& [dataset, curve] : per_dataset) datasets.insert(dataset);
  for (const auto& [mi, di] : curves)
    for (const auto& [mj, dj] : curves) {
      if (mi == mj) continue;
      for (const auto& dataset : datasets) {
        auto ii = di.find(dataset);
        auto jj = dj.find(dataset);
        if (ii == di.end() || jj == dj.end()) continue;
        std::vector<double> pi, pj;
        if (!spaced_points(ii->second, spacing, pi) ||
            !spaced_points(jj->second, spacing, pj))
          continue;
        out << mi << ',' << mj << ',' << dataset << ','
            << paired_t_outcome(pi, pj) << "\n";
      }
    }
}

}  // namespace bemps
