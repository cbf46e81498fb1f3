#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "exseg/crf_reg.hpp"
#include "exseg/rng.hpp"

using namespace exseg;

namespace {

Volume random_volume(std::array<int, 3> shape, std::array<double, 3> spacing,
                     std::uint64_t seed, double lo, double hi) {
  Volume v(shape, spacing);
  Rng rng(seed);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

// Test-side re-implementation: explicit double loop over ordered pairs.
RegResult brute_force(const Volume& prob, const Volume& X, const RegConfig& cfg) {
  const auto& s = prob.shape();
  std::vector<VoxelIndex> all;
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) all.push_back({i, j, k});

  RegResult out;
  out.grad.assign(prob.size(), 0.0);
  const double n = static_cast<double>(prob.size());
  for (const VoxelIndex& a : all)
    for (const VoxelIndex& b : all) {
      if (!cfg.include_self && a == b) continue;
      const double w = kernel_weight(a, b, X, cfg);
      const double pa = prob.at(a);
      const double pb = prob.at(b);
      out.value += pa * w * (1.0 - pb) / n;
      out.grad[prob.index(a)] += w * (1.0 - pb) / n;
      out.grad[prob.index(b)] -= pa * w / n;
    }
  return out;
}

}  // namespace

TEST_CASE("kernel_weight realises the Gaussian forms and is symmetric") {
  const std::array<double, 3> spacing{1.0, 2.0, 0.5};
  const Volume X = random_volume({5, 4, 4}, spacing, 3, 0.0, 1.0);

  RegConfig cfg;
  cfg.sigma_alpha = 2.0;
  cfg.sigma_beta = 0.1;

  const VoxelIndex a{1, 2, 3}, b{3, 1, 1};
  const double dx = X(b.i, b.j, b.k) - X(a.i, a.j, a.k);

  SUBCASE("voxel units ignore spacing") {
    cfg.sigma_alpha_units = SigmaAlphaUnits::Voxel;
    const double d2 = 4.0 + 1.0 + 4.0;
    const double expect =
        std::exp(-d2 / (2.0 * 4.0) - dx * dx / (2.0 * 0.01));
    CHECK(kernel_weight(a, b, X, cfg) == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("mm units use physical distance") {
    cfg.sigma_alpha_units = SigmaAlphaUnits::Mm;
    const double d = X.physical_distance(a, b);
    const double expect =
        std::exp(-d * d / (2.0 * 4.0) - dx * dx / (2.0 * 0.01));
    CHECK(kernel_weight(a, b, X, cfg) == doctest::Approx(expect).epsilon(1e-12));
  }

  CHECK(kernel_weight(a, b, X, cfg) == kernel_weight(b, a, X, cfg));
  CHECK(kernel_weight(a, a, X, cfg) == 1.0);
}

TEST_CASE("exact regulariser matches the ordered-pair double loop") {
  const Volume X = random_volume({4, 4, 3}, {1, 1, 1}, 11, 0.0, 1.0);
  const Volume prob = random_volume({4, 4, 3}, {1, 1, 1}, 12, 0.02, 0.98);

  for (bool self : {true, false}) {
    RegConfig cfg;
    cfg.sigma_alpha = 1.5;
    cfg.sigma_beta = 0.2;
    cfg.include_self = self;
    cfg.window_radius = RegConfig::kExactWindow;

    const RegResult got = regularizer(prob, X, cfg);
    const RegResult expect = brute_force(prob, X, cfg);
    CHECK(got.value == doctest::Approx(expect.value).epsilon(1e-12));
    REQUIRE(got.grad.size() == expect.grad.size());
    for (std::size_t n = 0; n < got.grad.size(); ++n)
      CHECK(got.grad[n] == doctest::Approx(expect.grad[n]).epsilon(1e-10));
  }
}

TEST_CASE("a window covering the volume reproduces the exact sum") {
  const Volume X = random_volume({5, 4, 3}, {1, 1, 1}, 21, 0.0, 1.0);
  const Volume prob = random_volume({5, 4, 3}, {1, 1, 1}, 22, 0.02, 0.98);

  RegConfig exact;
  exact.sigma_alpha = 2.0;
  exact.sigma_beta = 0.15;
  exact.window_radius = RegConfig::kExactWindow;

  RegConfig windowed = exact;
  windowed.window_radius = 4;  // max extent - 1 reaches every pair

  const RegResult a = regularizer(prob, X, exact);
  const RegResult b = regularizer(prob, X, windowed);
  CHECK(a.value == b.value);
  for (std::size_t n = 0; n < a.grad.size(); ++n) CHECK(a.grad[n] == b.grad[n]);
}

TEST_CASE("windowed value converges monotonically toward exact") {
  const Volume X = random_volume({6, 5, 4}, {1, 1, 1}, 31, 0.0, 1.0);
  const Volume prob = random_volume({6, 5, 4}, {1, 1, 1}, 32, 0.02, 0.98);

  RegConfig cfg;
  cfg.sigma_alpha = 1.0;
  cfg.sigma_beta = 0.3;
  cfg.window_radius = RegConfig::kExactWindow;
  const double exact = regularizer_value(prob, X, cfg);

  // All kernel terms are nonnegative, so widening the window only adds mass.
  double prev = -1.0;
  for (int radius : {1, 2, 3, 5}) {
    cfg.window_radius = radius;
    const double v = regularizer_value(prob, X, cfg);
    CHECK(v >= prev);
    CHECK(v <= exact + 1e-15);
    prev = v;
  }
  CHECK(prev == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const std::array<int, 3> shape{4, 3, 3};
  for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
    const Volume X = random_volume(shape, {1, 1, 1}, seed, 0.0, 1.0);
    Volume prob = random_volume(shape, {1, 1, 1}, seed + 100, 0.1, 0.9);

    RegConfig cfg;
    cfg.sigma_alpha = 1.2;
    cfg.sigma_beta = 0.2;
    cfg.window_radius = 2;

    const RegResult res = regularizer(prob, X, cfg);
    Rng pick(seed + 200);
    for (int trial = 0; trial < 8; ++trial) {
      const std::size_t m = pick.uniform_below(prob.size());
      const float base = prob.data()[m];
      const float h = 1e-3f;

      prob.data()[m] = base + h;
      const float up = prob.data()[m];
      const double f_up = regularizer_value(prob, X, cfg);
      prob.data()[m] = base - h;
      const float dn = prob.data()[m];
      const double f_dn = regularizer_value(prob, X, cfg);
      prob.data()[m] = base;

      // Use the step the float storage actually realised.
      const double fd = (f_up - f_dn) / (static_cast<double>(up) - static_cast<double>(dn));
      CHECK(res.grad[m] == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("regularizer vanishes on unanimous probability maps") {
  const Volume X = random_volume({4, 4, 4}, {1, 1, 1}, 41, 0.0, 1.0);
  RegConfig cfg;
  cfg.window_radius = 2;

  const Volume ones(std::array<int, 3>{4, 4, 4}, {1, 1, 1}, 1.0f);
  CHECK(regularizer_value(ones, X, cfg) == 0.0);
  const Volume zeros(std::array<int, 3>{4, 4, 4}, {1, 1, 1}, 0.0f);
  CHECK(regularizer_value(zeros, X, cfg) == 0.0);

  // Mixed maps pay a positive penalty.
  Volume mixed = zeros;
  mixed(1, 1, 1) = 1.0f;
  mixed(2, 2, 2) = 1.0f;
  CHECK(regularizer_value(mixed, X, cfg) > 0.0);
}

TEST_CASE("regularizer_gradient agrees with the combined result") {
  const Volume X = random_volume({4, 3, 3}, {1, 1, 1}, 51, 0.0, 1.0);
  const Volume prob = random_volume({4, 3, 3}, {1, 1, 1}, 52, 0.1, 0.9);
  RegConfig cfg;
  cfg.window_radius = 1;

  const RegResult both = regularizer(prob, X, cfg);
  const Volume grad = regularizer_gradient(prob, X, cfg);
  CHECK(regularizer_value(prob, X, cfg) == both.value);
  // The standalone gradient comes back as a float volume.
  for (std::size_t n = 0; n < prob.size(); ++n)
    CHECK(grad.data()[n] == static_cast<float>(both.grad[n]));
}

TEST_CASE("config validation") {
  RegConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sigma_alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RegConfig{};
  cfg.window_radius = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RegConfig{};
  cfg.sigma_beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RegConfig{};
  cfg.window_radius = -2;  // only kExactWindow may be negative
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
