#include <benchmark/benchmark.h>

#include "exseg/crf_reg.hpp"
#include "exseg/rng.hpp"
#include "exseg/volume.hpp"

using namespace exseg;

namespace {

void bm_regularizer(benchmark::State& state) {
  const int extent = static_cast<int>(state.range(0));
  const int window = static_cast<int>(state.range(1));

  Rng rng(7);
  Volume X({extent, extent, extent / 2}, {1, 1, 1});
  Volume prob({extent, extent, extent / 2}, {1, 1, 1});
  for (float& x : X.data()) x = static_cast<float>(rng.uniform());
  for (float& x : prob.data()) x = static_cast<float>(rng.uniform(0.05, 0.95));

  RegConfig cfg;
  cfg.window_radius = window;
  for (auto _ : state) {
    const RegResult res = regularizer(prob, X, cfg);
    benchmark::DoNotOptimize(res.value);
  }
  state.counters["voxels"] = static_cast<double>(prob.size());
}

}  // namespace

// Window radius -1 is the exact all-pairs mode; keep its volumes small.
BENCHMARK(bm_regularizer)
    ->Args({16, -1})
    ->Args({16, 3})
    ->Args({32, 3})
    ->Args({48, 3})
    ->Args({48, 5})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
