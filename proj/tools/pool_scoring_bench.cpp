// Times full-pool scoring, serial reference vs. the OpenMP kernel, across
// pool sizes. Prints one CSV row per (size, path).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bemps/acquisition.hpp"
#include "bemps/model_space.hpp"
#include "bemps/rng.hpp"

using namespace bemps;

namespace {

double time_scoring(const ModelFamily& family, const Posterior& posterior,
                    const std::vector<InputId>& pool,
                    const std::vector<InputId>& estimation,
                    const Strategy& strategy, bool parallel) {
  const AcquisitionContext ctx =
      make_context(family, posterior, pool, estimation, strategy.rule);
  ScoreOptions opts;
  opts.parallel = parallel;
  const auto t0 = std::chrono::steady_clock::now();
  const AcquisitionScores scores = score_pool(ctx, strategy, opts);
  const auto t1 = std::chrono::steady_clock::now();
  // Keep the result alive so the scoring loop cannot be elided.
  volatile double sink = scores.per_x.back();
  (void)sink;
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> sizes = {10000, 25000, 50000};
  std::string strategy_name = "core_mse";
  if (argc > 1) {
    sizes.clear();
    for (int i = 1; i < argc; ++i) {
      if (std::string(argv[i]) == "--strategy" && i + 1 < argc) {
        strategy_name = argv[++i];
        continue;
      }
      sizes.push_back(static_cast<std::size_t>(std::atoll(argv[i])));
    }
  }

  const std::size_t max_size = *std::max_element(sizes.begin(), sizes.end());
  GeneratorSpec spec;
  spec.num_models = 5;   // ensemble-of-five scale
  spec.num_inputs = max_size;
  spec.num_classes = 4;
  spec.min_separation = 1e-3;
  const ModelFamily family = sample_family(spec, 42);
  const Posterior posterior = Posterior::uniform(family.num_models());
  const Strategy strategy = make_strategy(strategy_name);

  Rng rng(7);
  std::vector<InputId> estimation;
  for (std::size_t i = 0; i < 600; ++i)
    estimation.push_back(
        family.input_space()[rng.uniform_index(family.num_inputs())]);

#ifdef _OPENMP
  std::printf("# threads=%d strategy=%s |X|=600\n", omp_get_max_threads(),
              strategy_name.c_str());
#else
  std::printf("# threads=1 (no OpenMP) strategy=%s |X|=600\n",
              strategy_name.c_str());
#endif
  std::printf("pool_size,path,seconds,ns_per_pair\n");
  for (std::size_t n : sizes) {
    std::vector<InputId> pool(family.input_space().begin(),
                              family.input_space().begin() +
                                  static_cast<std::ptrdiff_t>(n));
    for (const bool parallel : {false, true}) {
      const double s =
          time_scoring(family, posterior, pool, estimation, strategy, parallel);
      std::printf("%zu,%s,%.3f,%.1f\n", n, parallel ? "openmp" : "serial", s,
                  1e9 * s / (static_cast<double>(n) * 600.0));
    }
  }
  return 0;
}
