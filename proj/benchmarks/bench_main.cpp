#include <benchmark/benchmark.h>

#include <vector>

#include "slicesim/generate.hpp"
#include "slicesim/scenario_file.hpp"
#include "slicing/engines.hpp"
#include "slicing/oracle.hpp"
#include "slicing/sim.hpp"

using namespace slicing;

namespace {

struct Case {
  Instance inst;
  ClassWeights q;
};

std::vector<Case> cases(std::size_t classes, std::size_t resources) {
  Rng rng(99);
  slicesim::GeneratorOptions opts;
  opts.max_classes = classes;
  opts.max_resources = resources;
  std::vector<Case> out;
  for (int i = 0; i < 64; ++i) {
    Instance inst = slicesim::random_instance(rng, opts);
    auto q = scwa_weights(inst, slicesim::random_population(rng, inst));
    out.push_back({std::move(inst), std::move(q)});
  }
  return out;
}

void BM_AlphaScs(benchmark::State& state) {
  const auto cs = cases(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const double alpha = static_cast<double>(state.range(2)) / 2.0;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& c = cs[i++ % cs.size()];
    benchmark::DoNotOptimize(solve_alpha_scs(c.inst, c.q, alpha));
  }
}
BENCHMARK(BM_AlphaScs)->Args({4, 3, 1})->Args({4, 3, 2})->Args({4, 3, 4})->Args({12, 8, 2})->Args({12, 8, 100});

void BM_Waterfill(benchmark::State& state) {
  const auto cs = cases(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& c = cs[i++ % cs.size()];
    benchmark::DoNotOptimize(maxmin_waterfill(c.inst, c.q));
  }
}
BENCHMARK(BM_Waterfill)->Args({4, 3})->Args({12, 8});

void BM_ConcaveOracle(benchmark::State& state) {
  const auto cs = cases(4, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& c = cs[i++ % cs.size()];
    benchmark::DoNotOptimize(oracle::concave_opt(c.inst, c.q.q, 2.0));
  }
}
BENCHMARK(BM_ConcaveOracle);

void BM_SimulateMultiResource(benchmark::State& state) {
  const auto file = slicesim::load_scenario(SCENARIO_DIR "/fig7_multiresource.scenario");
  const char* names[] = {"maxmin-scs", "scs", "drf", "dps"};
  auto sc = file.scenario(*sim::Engine::from_name(names[state.range(0)], 1.0), 1);
  sc.horizon = 5000;
  std::size_t events = 0;
  for (auto _ : state) events += sim::run_simulation(sc).events;
  state.SetLabel(names[state.range(0)]);
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateMultiResource)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
