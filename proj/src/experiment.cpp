#include "bemps/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "bemps/common.hpp"
#include "bemps/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bemps {

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    items.push_back(item.substr(b, e - b + 1));
  }
  return items;
}

[[noreturn]] void config_fail(const std::string& filename, std::size_t line,
                              const std::string& why) {
  throw ConfigError(filename + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::string& filename) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      config_fail(filename, lineno, "expected 'key = value'");
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t");
      return s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      config_fail(filename, lineno, "empty key or value");
    if (!seen.insert(key).second)
      config_fail(filename, lineno, "duplicate key '" + key + "'");

    auto as_size = [&](const std::string& v) -> std::size_t {
      try {
        const long long x = std::stoll(v);
        if (x < 0) throw std::out_of_range("negative");
        return static_cast<std::size_t>(x);
      } catch (const std::exception&) {
        config_fail(filename, lineno,
                    "field '" + key + "': expected a non-negative integer");
      }
    };
    auto as_double = [&](const std::string& v) -> double {
      try {
        return std::stod(v);
      } catch (const std::exception&) {
        config_fail(filename, lineno, "field '" + key + "': expected a number");
      }
    };

    if (key == "strategies") {
      cfg.strategies = split_list(value);
      if (cfg.strategies.empty())
        config_fail(filename, lineno, "field 'strategies': empty list");
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : split_list(value))
        cfg.seeds.push_back(static_cast<std::uint64_t>(as_size(s)));
      if (cfg.seeds.empty())
        config_fail(filename, lineno, "field 'seeds': empty list");
    } else if (key == "batch_size") {
      cfg.run.batch_size = as_size(value);
    } else if (key == "budget") {
      cfg.run.budget = as_size(value);
    } else if (key == "initial_labeled") {
      cfg.run.initial_labeled = as_size(value);
    } else if (key == "estimation_pool") {
      cfg.run.estimation_pool = as_size(value);
    } else if (key == "pool_size") {
      cfg.run.pool_size = as_size(value);
    } else if (key == "test_size") {
      cfg.run.test_size = as_size(value);
    } else if (key == "ensemble_mode") {
      try {
        cfg.run.mode = ensemble_mode_from(value);
      } catch (const ConfigError& e) {
        config_fail(filename, lineno, std::string("field 'ensemble_mode': ") + e.what());
      }
    } else if (key == "ensemble_size") {
      cfg.run.ensemble_size = as_size(value);
    } else if (key == "train_fraction") {
      cfg.run.train_fraction = as_double(value);
    } else if (key == "top_fraction") {
      cfg.run.top_fraction = as_double(value);
    } else if (key == "kmeans_max_iters") {
      cfg.run.kmeans_max_iters = as_size(value);
    } else if (key == "batch_mode") {
      if (value == "diverse")
        cfg.run.diversify = true;
      else if (value == "top")
        cfg.run.diversify = false;
      else
        config_fail(filename, lineno,
                    "field 'batch_mode': expected 'diverse' or 'top'");
    } else if (key == "wmocu_k") {
      cfg.run.wmocu_k = as_double(value);
    } else if (key == "family_file") {
      cfg.family_file = value;
    } else if (key == "family_models") {
      cfg.family_spec.num_models = as_size(value);
    } else if (key == "family_inputs") {
      cfg.family_spec.num_inputs = as_size(value);
    } else if (key == "family_classes") {
      cfg.family_spec.num_classes = as_size(value);
    } else if (key == "family_concentration") {
      cfg.family_spec.concentration = as_double(value);
    } else if (key == "family_separation") {
      cfg.family_spec.min_separation = as_double(value);
    } else if (key == "family_seed") {
      cfg.family_seed = static_cast<std::uint64_t>(as_size(value));
    } else if (key == "true_model") {
      cfg.true_model = std::stoll(value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      config_fail(filename, lineno, "unknown key '" + key + "'");
    }
  }

  std::set<std::uint64_t> distinct(cfg.seeds.begin(), cfg.seeds.end());
  if (distinct.size() != cfg.seeds.size())
    throw ConfigError(filename + ": field 'seeds': seeds must be distinct");
  for (const auto& s : cfg.strategies)
    make_strategy(s, StrategyParams{cfg.run.wmocu_k, 0});  // validates names
  {
    RunConfig probe = cfg.run;
    probe.strategy = cfg.strategies.front();
    probe.validate();
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_experiment_config(in, path);
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["strategies"] = cfg.strategies;
  j["seeds"] = cfg.seeds;
  j["batch_size"] = cfg.run.batch_size;
  j["budget"] = cfg.run.budget;
  j["initial_labeled"] = cfg.run.initial_labeled;
  j["estimation_pool"] = cfg.run.estimation_pool;
  j["pool_size"] = cfg.run.pool_size;
  j["test_size"] = cfg.run.test_size;
  j["ensemble_mode"] = to_string(cfg.run.mode);
  j["ensemble_size"] = cfg.run.ensemble_size;
  j["train_fraction"] = cfg.run.train_fraction;
  j["top_fraction"] = cfg.run.top_fraction;
  j["kmeans_max_iters"] = cfg.run.kmeans_max_iters;
  j["batch_mode"] = cfg.run.diversify ? "diverse" : "top";
  j["wmocu_k"] = cfg.run.wmocu_k;
  j["family_file"] = cfg.family_file;
  j["family_models"] = cfg.family_spec.num_models;
  j["family_inputs"] = cfg.family_spec.num_inputs;
  j["family_classes"] = cfg.family_spec.num_classes;
  j["family_concentration"] = cfg.family_spec.concentration;
  j["family_separation"] = cfg.family_spec.min_separation;
  j["family_seed"] = cfg.family_seed;
  j["true_model"] = cfg.true_model;
  j["out_dir"] = cfg.out_dir;
  return j;
}

std::string run_file_name(const std::string& strategy, std::uint64_t seed) {
  return "traj_" + strategy + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                std::size_t workers) {
  fs::create_directories(config.out_dir);

  ModelFamily family = config.family_file.empty()
                           ? sample_family(config.family_spec, config.family_seed)
                           : load_family(config.family_file);
  save_family(family, (fs::path(config.out_dir) / "family.txt").string());

  struct Job {
    std::string strategy;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& s : config.strategies)
    for (std::uint64_t seed : config.seeds) jobs.push_back({s, seed});

  ExperimentResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      RunOutcome& out = result.runs[i];
      out.strategy = job.strategy;
      out.seed = job.seed;
      out.file = run_file_name(job.strategy, job.seed);
      try {
        RunConfig rc = config.run;
        rc.strategy = job.strategy;
        rc.seed = job.seed;
        const std::size_t true_model =
            config.true_model >= 0
                ? static_cast<std::size_t>(config.true_model)
                : derive_seed(job.seed, "truth") % family.num_models();
        out.true_model = true_model;
        Oracle oracle =
            make_oracle(family, true_model, derive_seed(job.seed, "oracle"));
        const Trajectory traj = run_active_learning(rc, family, oracle);
        out.truncated = traj.truncated;
        out.iterations = traj.records.size();
        out.final_max_score = traj.final_max_score;
        for (const auto& r : traj.records) out.seconds_total += r.seconds;
        std::ofstream csv(fs::path(config.out_dir) / out.file);
        if (!csv) throw std::runtime_error("cannot write " + out.file);
        write_trajectory_csv(traj, csv);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };

  workers = std::max<std::size_t>(workers, 1);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  json manifest;
  manifest["engine_version"] = kEngineVersion;
  manifest["config"] = config_to_json(config);
  manifest["family"] = {{"file", "family.txt"},
                        {"models", family.num_models()},
                        {"inputs", family.num_inputs()},
                        {"classes", family.num_classes()}};
  json runs = json::array();
  for (const auto& r : result.runs) {
    json jr;
    jr["strategy"] = r.strategy;
    jr["seed"] = r.seed;
    jr["true_model"] = r.true_model;
    jr["file"] = r.file;
    jr["truncated"] = r.truncated;
    jr["iterations"] = r.iterations;
    jr["final_max_score"] = r.final_max_score;
    jr["seconds_total"] = r.seconds_total;
    if (!r.error.empty()) {
      jr["error"] = r.error;
      result.ok = false;
    }
    runs.push_back(jr);
  }
  manifest["runs"] = runs;
  manifest["status"] = result.ok ? "complete" : "failed";
  std::ofstream mf(fs::path(config.out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  return result;
}

ComparisonMatrix compare_run_dirs(const std::vector<std::string>& dirs,
                                  std::size_t spacing,
                                  const std::string& metric,
                                  CurveTable* curves_out) {
  if (metric != "weighted_f1" && metric != "accuracy")
    throw ConfigError("compare: metric must be weighted_f1 or accuracy");
  CurveTable curves;
  for (const auto& dir : dirs) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf)
      throw ConfigError("compare: missing manifest in '" + dir + "'");
    json manifest = json::parse(mf);
    std::string dataset = dir;
    while (!dataset.empty() && dataset.back() == '/') dataset.pop_back();

    // Group per strategy, average over seeds.
    std::map<std::string, std::vector<std::vector<double>>> grouped;
    for (const auto& jr : manifest["runs"]) {
      if (jr.contains("error")) continue;
      std::ifstream csv(fs::path(dir) / jr["file"].get<std::string>());
      if (!csv) continue;
      const MetricSeries series = read_trajectory_csv(csv);
      grouped[jr["strategy"].get<std::string>()].push_back(
          metric == "weighted_f1" ? series.weighted_f1 : series.accuracy);
    }
    for (auto& [strategy, seeds_curves] : grouped)
      curves[strategy][dataset] = mean_curve(seeds_curves);
  }
  if (curves_out) *curves_out = curves;
  return comparison_matrix(curves, spacing);
}

}  // namespace bemps
