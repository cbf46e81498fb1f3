#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "exseg/rng.hpp"
#include "exseg/volume.hpp"

using namespace exseg;

namespace {

Volume random_volume(std::array<int, 3> shape, std::array<double, 3> spacing,
                     std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Volume v(shape, spacing);
  Rng rng(seed);
  for (auto& x : v.data()) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

// Independent re-evaluation of the shrinking box mean at one voxel.
double box_mean_at(const Volume& v, int radius, int i, int j, int k) {
  double sum = 0.0;
  int count = 0;
  for (int dk = -radius; dk <= radius; ++dk)
    for (int dj = -radius; dj <= radius; ++dj)
      for (int di = -radius; di <= radius; ++di) {
        if (!v.in_bounds(i + di, j + dj, k + dk)) continue;
        sum += v(i + di, j + dj, k + dk);
        ++count;
      }
  return sum / count;
}

}  // namespace

TEST_CASE("volume indexing is x-fastest") {
  Volume v({3, 4, 5}, {1, 1, 1});
  CHECK(v.index(1, 0, 0) == 1);
  CHECK(v.index(0, 1, 0) == 3);
  CHECK(v.index(0, 0, 1) == 12);
  CHECK(v.size() == 60);
  v(2, 3, 4) = 7.0f;
  CHECK(v.data()[v.index(2, 3, 4)] == 7.0f);
}

TEST_CASE("physical distance uses spacing") {
  Volume v({4, 4, 4}, {1.0, 2.0, 3.0});
  const double d = v.physical_distance({0, 0, 0}, {1, 1, 1});
  CHECK(d == doctest::Approx(std::sqrt(1.0 + 4.0 + 9.0)));
  CHECK(v.physical_distance({2, 1, 3}, {2, 1, 3}) == 0.0);
}

TEST_CASE("require_finite rejects NaN and infinity") {
  Volume v({2, 2, 2}, {1, 1, 1}, 1.0f);
  CHECK_NOTHROW(v.require_finite());
  v(0, 0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(v.require_finite(), std::runtime_error);
  v(0, 0, 0) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(v.require_finite(), std::runtime_error);
}

TEST_CASE("box_mean matches per-voxel re-evaluation") {
  const Volume v = random_volume({7, 6, 5}, {1, 1, 1}, 11);
  for (int radius : {1, 2, 3}) {
    const Volume m = box_mean(v, radius);
    for (int k = 0; k < 5; ++k)
      for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 7; ++i)
          CHECK(m(i, j, k) ==
                doctest::Approx(box_mean_at(v, radius, i, j, k)).epsilon(1e-6));
  }
}

TEST_CASE("box_mean preserves constants") {
  const Volume v({5, 5, 5}, {1, 1, 1}, 0.37f);
  const Volume m = box_mean(v, 2);
  for (float x : m.data()) CHECK(x == doctest::Approx(0.37f));
}

TEST_CASE("gradient_magnitude matches finite-difference stencil") {
  const std::array<double, 3> spacing{0.7, 1.3, 2.1};
  const Volume v = random_volume({6, 5, 4}, spacing, 23);
  const Volume g = gradient_magnitude(v);

  auto diff1d = [&](int i, int j, int k, int axis) {
    int lo[3] = {i, j, k}, hi[3] = {i, j, k};
    const int n = v.shape()[axis];
    int c = (axis == 0 ? i : axis == 1 ? j : k);
    hi[axis] = std::min(c + 1, n - 1);
    lo[axis] = std::max(c - 1, 0);
    const double dt = (hi[axis] - lo[axis]) * spacing[axis];
    return (v(hi[0], hi[1], hi[2]) - v(lo[0], lo[1], lo[2])) / dt;
  };

  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 6; ++i) {
        const double gx = diff1d(i, j, k, 0);
        const double gy = diff1d(i, j, k, 1);
        const double gz = diff1d(i, j, k, 2);
        const double expect = std::sqrt(gx * gx + gy * gy + gz * gz);
        CHECK(g(i, j, k) == doctest::Approx(expect).epsilon(1e-5));
      }
}

TEST_CASE("gradient_magnitude is zero on constants and scales linearly") {
  const Volume flat({4, 4, 4}, {1, 1, 1}, 2.5f);
  const Volume flat_grad = gradient_magnitude(flat);
  for (float x : flat_grad.data()) CHECK(x == 0.0f);

  // |grad(a v)| = a |grad v| for a > 0.
  const Volume v = random_volume({5, 5, 5}, {1, 1, 1}, 31);
  Volume v3 = v;
  for (auto& x : v3.data()) x *= 3.0f;
  const Volume g = gradient_magnitude(v);
  const Volume g3 = gradient_magnitude(v3);
  for (std::size_t n = 0; n < g.size(); ++n)
    CHECK(g3.data()[n] == doctest::Approx(3.0f * g.data()[n]).epsilon(1e-5));
}

TEST_CASE("gradient_magnitude requires at least two voxels per axis") {
  CHECK_THROWS_AS(gradient_magnitude(Volume({1, 4, 4}, {1, 1, 1})), std::invalid_argument);
}

TEST_CASE("normalize_intensity maps to [0,1] and is idempotent") {
  const Volume v = random_volume({6, 6, 6}, {1, 1, 1}, 47, -3.0, 5.0);
  const Volume n = normalize_intensity(v);

  float lo = 1e9f, hi = -1e9f;
  for (float x : n.data()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo == 0.0f);
  CHECK(hi == 1.0f);

  // Affine invariance: normalising twice changes nothing.
  const Volume nn = normalize_intensity(n);
  for (std::size_t i = 0; i < n.size(); ++i)
    CHECK(nn.data()[i] == doctest::Approx(n.data()[i]).epsilon(1e-6));

  // Order preservation.
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v.data()[i - 1] < v.data()[i]) CHECK(n.data()[i - 1] <= n.data()[i]);
    if (v.data()[i - 1] > v.data()[i]) CHECK(n.data()[i - 1] >= n.data()[i]);
  }
}

TEST_CASE("normalize_intensity maps constant volumes to 0.5") {
  const Volume v({3, 3, 3}, {1, 1, 1}, 42.0f);
  const Volume n = normalize_intensity(v);
  for (float x : n.data()) CHECK(x == 0.5f);
}
