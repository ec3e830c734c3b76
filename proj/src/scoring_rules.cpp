#include "bemps/scoring_rules.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "bemps/numeric.hpp"

namespace bemps {

double g_mse(std::span<const double> q) {
  require_simplex(q, "g_mse");
  double s = 0.0;
  for (double p : q) s += p * p;
  return s - 1.0;
}

double g_log(std::span<const double> q) {
  require_simplex(q, "g_log");
  double s = 0.0;
  for (double p : q) s += p * std::log(std::max(p, kLogFloor));
  return s;
}

std::vector<double> dg_mse(std::span<const double> q) {
  require_simplex(q, "dg_mse");
  std::vector<double> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) g[i] = 2.0 * q[i];
  return g;
}

std::vector<double> dg_log(std::span<const double> q) {
  // 1 + log q elementwise; the constant offset is a valid subgradient choice
  // because dG(q).(p - q) annihilates constants on the simplex.
  require_simplex(q, "dg_log");
  std::vector<double> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    g[i] = 1.0 + std::log(std::max(q[i], kLogFloor));
  return g;
}

double score(const ScoringRule& rule, std::span<const double> q, int y) {
  require_simplex(q, "score");
  if (y < 0 || static_cast<std::size_t>(y) >= q.size())
    throw std::domain_error("score: class index out of range");
  const double gq = rule.G(q);
  const std::vector<double> grad = rule.dG(q);
  double s = gq + grad[static_cast<std::size_t>(y)];
  for (std::size_t i = 0; i < q.size(); ++i) s -= grad[i] * q[i];
  return s;
}

double bregman(const ScoringRule& rule, std::span<const double> p,
               std::span<const double> q) {
  require_simplex(p, "bregman: p");
  require_simplex(q, "bregman: q");
  if (p.size() != q.size())
    throw std::domain_error("bregman: dimension mismatch");
  double d = rule.G(p) - rule.G(q);
  const std::vector<double> grad = rule.dG(q);
  for (std::size_t i = 0; i < p.size(); ++i) d -= grad[i] * (p[i] - q[i]);
  return d;
}

namespace {

std::map<std::string, ScoringRule>& registry() {
  static std::map<std::string, ScoringRule> rules = {
      {"core_mse", ScoringRule{"core_mse", g_mse, dg_mse}},
      {"core_log", ScoringRule{"core_log", g_log, dg_log}},
  };
  return rules;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const ScoringRule& scoring_rule(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end())
    throw std::invalid_argument("unknown scoring rule '" + name + "'");
  return it->second;
}

bool scoring_rule_exists(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  return registry().count(name) > 0;
}

void register_scoring_rule(ScoringRule rule) {
  if (rule.name.empty() || !rule.G || !rule.dG)
    throw std::invalid_argument("register_scoring_rule: incomplete rule");
  std::lock_guard lock(registry_mutex());
  registry()[rule.name] = std::move(rule);
}

}  // namespace bemps
