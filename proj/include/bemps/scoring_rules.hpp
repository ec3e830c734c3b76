#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bemps {

using ConvexFn = std::function<double(std::span<const double>)>;
using GradientFn =
    std::function<std::vector<double>(std::span<const double>)>;

/// A strictly proper scoring rule in Savage form: a strictly convex G on the
/// simplex together with a subgradient dG. The score itself is derived,
///   S(q, y) = G(q) + dG(q) . (delta_y - q),
/// so registering any (G, dG) pair yields a usable rule.
struct ScoringRule {
  std::string name;
  ConvexFn G;
  GradientFn dG;
};

/// G for the Brier (negative squared error) rule: sum q(y)^2 - 1.
double g_mse(std::span<const double> q);
/// G for the logarithmic rule: negative Shannon entropy, natural log,
/// entries clamped to [1e-12, 1] before the log.
double g_log(std::span<const double> q);

std::vector<double> dg_mse(std::span<const double> q);
std::vector<double> dg_log(std::span<const double> q);

/// Savage-form score. Matches log q(y) for core_log and the negative Brier
/// score for core_mse.
double score(const ScoringRule& rule, std::span<const double> q, int y);

/// Bregman divergence G(p) - G(q) - dG(q).(p - q). Squared Euclidean
/// distance for core_mse, KL(p||q) for core_log.
double bregman(const ScoringRule& rule, std::span<const double> p,
               std::span<const double> q);

/// Registry of rules selectable by name. "core_mse" and "core_log" are
/// built in; custom (G, dG) pairs may be registered at startup.
const ScoringRule& scoring_rule(const std::string& name);
bool scoring_rule_exists(const std::string& name);
void register_scoring_rule(ScoringRule rule);

}  // namespace bemps
