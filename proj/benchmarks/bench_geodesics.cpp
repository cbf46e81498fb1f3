#include <benchmark/benchmark.h>

#include "exseg/annotations.hpp"
#include "exseg/geodesics.hpp"
#include "exseg/phantoms.hpp"
#include "exseg/rng.hpp"
#include "exseg/volume.hpp"

using namespace exseg;

namespace {

struct Fixture {
  Volume X, grad, prob;
  ExtremePointSet pts;

  explicit Fixture(int extent) {
    PhantomSpec spec;
    spec.shape = {extent, extent, extent / 2};
    spec.kind = PhantomKind::BlobWithDistractor;
    spec.noise_sd = 0.02f;
    spec.seed = 11;
    const Phantom ph = generate_phantom(spec);
    X = normalize_intensity(ph.image);
    grad = gradient_magnitude(X);
    prob = box_mean(ph.gt, 1);
    pts = simulate_extreme_points(ph.gt, 3);
  }
};

void bm_inter_extreme_geodesics(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  GeodesicConfig cfg;
  cfg.mode = static_cast<GeodesicMetric>(state.range(1));
  const Volume* prob = cfg.mode == GeodesicMetric::Deep ? &f.prob : nullptr;
  for (auto _ : state) {
    const GeodesicSet set = inter_extreme_geodesics(cfg, f.X, f.grad, prob, f.pts);
    benchmark::DoNotOptimize(set.path_x.total_length + set.path_y.total_length +
                             set.path_z.total_length);
  }
  const auto box = tight_bbox(f.pts);
  state.counters["box_voxels"] = static_cast<double>(box.voxel_count());
}

}  // namespace

BENCHMARK(bm_inter_extreme_geodesics)
    ->ArgsProduct({{32, 48, 64},
                   {static_cast<int>(GeodesicMetric::Gradient),
                    static_cast<int>(GeodesicMetric::GradientEuclidean),
                    static_cast<int>(GeodesicMetric::Deep)}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
