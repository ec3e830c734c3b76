#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bemps {

/// Support-weighted mean of per-class F1. Zero-support classes carry no
/// weight; a class with no true and no predicted positives scores 0.
double weighted_f1(std::span<const int> predictions,
                   std::span<const int> truths, int num_classes);

double accuracy(std::span<const int> predictions, std::span<const int> truths);

/// Two-sided paired t-test outcome on exactly five paired values:
/// 1 iff mean(i - j) > 0 and sqrt(5) * mean / sd exceeds 2.776 (sd with
/// divisor 4). Zero sd degenerates to sign(mean) > 0.
int paired_t_outcome(std::span<const double> series_i,
                     std::span<const double> series_j);

/// Per-method, per-dataset learning curve: one metric value per iteration.
using CurveTable = std::map<std::string, std::map<std::string, std::vector<double>>>;

struct ComparisonMatrix {
  std::vector<std::string> methods;
  std::vector<std::vector<int>> cells;  // cells[i][j] = #datasets where i beats j
  std::vector<int> totals;
  std::vector<std::string> warnings;    // incomparable pairs, spacing issues

  /// Methods ordered by descending total (stable on ties).
  std::vector<std::string> ranking() const;
};

/// Counting-based pairwise comparison: for each dataset, five maximally
/// spaced curve points feed the paired t-test. spacing 0 derives the step as
/// curve_length / 5. Missing or too-short curves make the pair incomparable
/// on that dataset and are recorded as warnings.
ComparisonMatrix comparison_matrix(const CurveTable& curves,
                                   std::size_t spacing = 0);

/// Pointwise mean of equally long curves.
std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves);

void write_matrix_csv(const ComparisonMatrix& m, std::ostream& out);
/// Long format: method_i,method_j,dataset,outcome per comparison.
void write_outcomes_csv(const CurveTable& curves, std::size_t spacing,
                        std::ostream& out);

}  // namespace bemps
