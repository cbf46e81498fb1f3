#include <benchmark/benchmark.h>

#include "exseg/metrics.hpp"
#include "exseg/phantoms.hpp"
#include "exseg/volume.hpp"

using namespace exseg;

namespace {

void bm_hd95(benchmark::State& state) {
  const int extent = static_cast<int>(state.range(0));
  PhantomSpec spec;
  spec.shape = {extent, extent, extent / 2};
  spec.seed = 5;
  const Volume a = generate_phantom(spec).gt;
  spec.seed = 6;
  const Volume b = generate_phantom(spec).gt;

  for (auto _ : state) benchmark::DoNotOptimize(hd95(a, b));
}

void bm_dice(benchmark::State& state) {
  const int extent = static_cast<int>(state.range(0));
  PhantomSpec spec;
  spec.shape = {extent, extent, extent / 2};
  spec.seed = 5;
  const Volume a = generate_phantom(spec).gt;
  spec.seed = 6;
  const Volume b = generate_phantom(spec).gt;

  for (auto _ : state) benchmark::DoNotOptimize(dice(a, b));
}

}  // namespace

BENCHMARK(bm_hd95)->Arg(32)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_dice)->Arg(32)->Arg(48)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
