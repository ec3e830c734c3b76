// Command-line front end: run experiments from a config file, compare run
// directories, verify the built-in property suites, generate families.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bemps/common.hpp"
#include "bemps/experiment.hpp"
#include "bemps/model_space.hpp"
#include "bemps/verify.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::size_t workers, const std::string& seed_override) {
  bemps::ExperimentConfig config = bemps::load_experiment_config(config_path);
  if (!out_override.empty()) config.out_dir = out_override;
  if (!seed_override.empty()) {
    config.seeds.clear();
    std::istringstream in(seed_override);
    std::string item;
    while (std::getline(in, item, ','))
      config.seeds.push_back(std::stoull(item));
  }
  const bemps::ExperimentResult result = bemps::run_experiment(config, workers);
  for (const auto& r : result.runs) {
    if (!r.error.empty())
      std::cerr << "FAILED " << r.strategy << " seed " << r.seed << ": "
                << r.error << "\n";
    else
      std::cout << "wrote " << config.out_dir << "/" << r.file
                << (r.truncated ? " (truncated)" : "") << "\n";
  }
  std::cout << "manifest: " << config.out_dir << "/manifest.json\n";
  return result.ok ? 0 : 1;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_dir,
                const std::string& metric, std::size_t spacing) {
  bemps::CurveTable curves;
  const bemps::ComparisonMatrix matrix =
      bemps::compare_run_dirs(dirs, spacing, metric, &curves);
  for (const auto& w : matrix.warnings) std::cerr << "warning: " << w << "\n";
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "comparison_matrix.csv");
    bemps::write_matrix_csv(matrix, out);
  }
  {
    std::ofstream out(fs::path(out_dir) / "comparison_long.csv");
    bemps::write_outcomes_csv(curves, spacing, out);
  }
  std::cout << "ranking:";
  for (const auto& name : matrix.ranking()) std::cout << ' ' << name;
  std::cout << "\nwrote " << out_dir << "/comparison_matrix.csv and "
            << out_dir << "/comparison_long.csv\n";
  return 0;
}

int cmd_verify() {
  const auto reports = bemps::run_all_suites();
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("[%s] %-14s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int cmd_gen_family(const bemps::GeneratorSpec& spec, std::uint64_t seed,
                   const std::string& out_path) {
  const bemps::ModelFamily family = bemps::sample_family(spec, seed);
  bemps::save_family(family, out_path);
  std::cout << "wrote " << out_path << " (" << family.num_models()
            << " models, " << family.num_inputs() << " inputs, "
            << family.num_classes() << " classes)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning engine: proper-score acquisition, baselines, "
               "batch diversification, and a simulation harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seed_override, metric = "weighted_f1";
  std::size_t workers = 1, spacing = 0;
  std::vector<std::string> dirs;

  auto* run = app.add_subcommand("run", "execute all (strategy x seed) runs");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--workers", workers, "bounded worker pool size");
  run->add_option("--seed-override", seed_override, "comma-separated seeds");

  auto* compare =
      app.add_subcommand("compare", "pairwise comparison matrix of run dirs");
  compare->add_option("dirs", dirs, "run directories (one dataset each)")
      ->required();
  compare->add_option("--out", out_dir, "output directory")
      ->default_val("compare_out");
  compare->add_option("--metric", metric, "weighted_f1 or accuracy");
  compare->add_option("--spacing", spacing,
                      "iteration step between the 5 test points (0 = auto)");

  auto* verify =
      app.add_subcommand("verify", "run the built-in property suites");

  bemps::GeneratorSpec spec{10, 50, 3, 1.0, 0.05, 200};
  std::uint64_t family_seed = 1;
  std::string family_out = "family.txt";
  auto* gen = app.add_subcommand("gen-family", "sample a synthetic family");
  gen->add_option("--models", spec.num_models, "number of models");
  gen->add_option("--inputs", spec.num_inputs, "input space size");
  gen->add_option("--classes", spec.num_classes, "number of classes");
  gen->add_option("--concentration", spec.concentration, "Dirichlet concentration");
  gen->add_option("--separation", spec.min_separation,
                  "minimum pairwise table separation");
  gen->add_option("--seed", family_seed, "generator seed");
  gen->add_option("--out", family_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, workers, seed_override);
    if (compare->parsed()) return cmd_compare(dirs, out_dir, metric, spacing);
    if (verify->parsed()) return cmd_verify();
    if (gen->parsed()) return cmd_gen_family(spec, family_seed, family_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
