#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "exseg/metrics.hpp"
#include "exseg/rng.hpp"

using namespace exseg;

namespace {

Volume random_mask(std::array<int, 3> shape, std::array<double, 3> spacing, std::uint64_t seed,
                   double fg_fraction) {
  Volume v(shape, spacing);
  Rng rng(seed);
  for (auto& x : v.data()) x = rng.uniform() < fg_fraction ? 1.0f : 0.0f;
  return v;
}

// O(n^2) reference: boundary extraction, all-pairs nearest distances, linear
// interpolated 95th percentile, max over directions.
double hd95_brute(const Volume& pred, const Volume& gt) {
  auto boundary = [](const Volume& m) {
    std::vector<VoxelIndex> out;
    const auto& s = m.shape();
    const int offs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int k = 0; k < s[2]; ++k)
      for (int j = 0; j < s[1]; ++j)
        for (int i = 0; i < s[0]; ++i) {
          if (m(i, j, k) <= 0.5f) continue;
          for (const auto& o : offs) {
            const int ii = i + o[0], jj = j + o[1], kk = k + o[2];
            if (!m.in_bounds(ii, jj, kk) || m(ii, jj, kk) <= 0.5f) {
              out.push_back({i, j, k});
              break;
            }
          }
        }
    return out;
  };

  auto directed = [&](const std::vector<VoxelIndex>& from, const std::vector<VoxelIndex>& to,
                      const std::array<double, 3>& sp) {
    std::vector<double> dists;
    for (const auto& a : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : to) {
        const double dx = (a.i - b.i) * sp[0];
        const double dy = (a.j - b.j) * sp[1];
        const double dz = (a.k - b.k) * sp[2];
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      dists.push_back(std::sqrt(best));
    }
    std::sort(dists.begin(), dists.end());
    const double rank = 0.95 * static_cast<double>(dists.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= dists.size()) return dists.back();
    return dists[lo] + (rank - static_cast<double>(lo)) * (dists[lo + 1] - dists[lo]);
  };

  const auto bp = boundary(pred);
  const auto bg = boundary(gt);
  REQUIRE(!bp.empty());
  REQUIRE(!bg.empty());
  return std::max(directed(bp, bg, pred.spacing()), directed(bg, bp, pred.spacing()));
}

// Exact two-sided signed-rank p by enumerating all 2^n sign assignments of
// the observed absolute ranks.
double wilcoxon_exact(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
  const std::size_t n = diffs.size();
  REQUIRE(n >= 1);
  REQUIRE(n <= 20);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<double> rank(n);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && std::abs(diffs[order[end]]) == std::abs(diffs[order[pos]])) ++end;
    for (std::size_t t = pos; t < end; ++t)
      rank[order[t]] = 0.5 * static_cast<double>(pos + 1 + end);
    pos = end;
  }

  double w_obs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0.0) w_obs += rank[i];
  const double mean = static_cast<double>(n) * (n + 1) / 4.0;
  const double dev = std::abs(w_obs - mean);

  std::size_t hits = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t bits = 0; bits < total; ++bits) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (bits & (std::size_t{1} << i)) w += rank[i];
    if (std::abs(w - mean) >= dev - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("dice and precision are plain count arithmetic") {
  Volume pred({4, 4, 1}, {1, 1, 1});
  Volume gt({4, 4, 1}, {1, 1, 1});
  // 3 predicted, 4 true, 2 overlapping.
  pred(0, 0, 0) = pred(1, 0, 0) = pred(2, 0, 0) = 1.0f;
  gt(1, 0, 0) = gt(2, 0, 0) = gt(3, 0, 0) = gt(3, 1, 0) = 1.0f;

  CHECK(dice(pred, gt) == doctest::Approx(100.0 * 2.0 * 2 / (3 + 4)));
  CHECK(precision(pred, gt) == doctest::Approx(100.0 * 2.0 / 3.0));
}

TEST_CASE("empty-mask conventions") {
  const Volume empty({3, 3, 3}, {1, 1, 1});
  const Volume full({3, 3, 3}, {1, 1, 1}, 1.0f);

  CHECK(dice(empty, empty) == 100.0);
  CHECK(precision(empty, empty) == 100.0);
  CHECK(dice(empty, full) == 0.0);
  CHECK(precision(empty, full) == 0.0);
  CHECK(precision(full, empty) == 0.0);
  CHECK_THROWS_WITH_AS(hd95(empty, full), "undefined HD95", std::runtime_error);
}

TEST_CASE("shape mismatch is rejected") {
  const Volume a({3, 3, 3}, {1, 1, 1}, 1.0f);
  const Volume b({3, 3, 2}, {1, 1, 1}, 1.0f);
  CHECK_THROWS_AS(dice(a, b), std::invalid_argument);
  CHECK_THROWS_AS(precision(a, b), std::invalid_argument);
  CHECK_THROWS_AS(hd95(a, b), std::invalid_argument);
}

TEST_CASE("identical masks have zero hd95") {
  const Volume m = random_mask({6, 6, 4}, {1, 1, 1}, 3, 0.4);
  bool any = false;
  for (float x : m.data()) any |= x > 0.5f;
  REQUIRE(any);
  CHECK(hd95(m, m) == 0.0);
}

TEST_CASE("hd95 equals the all-pairs oracle on random masks") {
  int done = 0;
  for (std::uint64_t seed = 0; seed < 40 && done < 20; ++seed) {
    const std::array<double, 3> spacing{1.0, 1.25, 2.0};
    const Volume pred = random_mask({7, 6, 5}, spacing, 1000 + seed, 0.3);
    const Volume gt = random_mask({7, 6, 5}, spacing, 2000 + seed, 0.3);
    bool p_any = false, g_any = false;
    for (float x : pred.data()) p_any |= x > 0.5f;
    for (float x : gt.data()) g_any |= x > 0.5f;
    if (!p_any || !g_any) continue;

    CHECK(hd95(pred, gt) == hd95_brute(pred, gt));
    ++done;
  }
  CHECK(done == 20);
}

TEST_CASE("hd95 respects voxel spacing") {
  Volume pred({8, 4, 4}, {1, 1, 1});
  Volume gt({8, 4, 4}, {1, 1, 1});
  pred(1, 1, 1) = 1.0f;
  gt(5, 1, 1) = 1.0f;
  CHECK(hd95(pred, gt) == doctest::Approx(4.0));

  Volume pred_mm({8, 4, 4}, {0.5, 1, 1});
  Volume gt_mm({8, 4, 4}, {0.5, 1, 1});
  pred_mm(1, 1, 1) = 1.0f;
  gt_mm(5, 1, 1) = 1.0f;
  CHECK(hd95(pred_mm, gt_mm) == doctest::Approx(2.0));
}

TEST_CASE("wilcoxon handles degenerate inputs per contract") {
  const std::vector<double> same{1, 2, 3, 4, 5, 6, 7};
  CHECK(wilcoxon_signed_rank(same, same) == 1.0);

  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 3, 4, 5};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), std::invalid_argument);

  const std::vector<double> short_a{1, 2};
  CHECK_THROWS_AS(wilcoxon_signed_rank(short_a, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("wilcoxon drops zero differences") {
  // Eight informative pairs plus three ties; the ties must not change p.
  std::vector<double> a{5.0, 3.2, 4.4, 6.1, 2.2, 7.7, 1.1, 4.9};
  std::vector<double> b{4.1, 2.9, 5.0, 5.2, 1.7, 6.9, 1.9, 4.0};
  const double p_plain = wilcoxon_signed_rank(a, b);

  std::vector<double> a2 = a, b2 = b;
  for (double x : {9.0, 10.0, 11.0}) {
    a2.push_back(x);
    b2.push_back(x);
  }
  CHECK(wilcoxon_signed_rank(a2, b2) == p_plain);
}

TEST_CASE("wilcoxon is close to exact enumeration") {
  Rng rng(77);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 8 + rng.uniform_below(5);  // 8..12 pairs
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(80.0, 96.0);
      b[i] = a[i] - rng.uniform(-2.0, 4.0);
    }
    const double approx = wilcoxon_signed_rank(a, b);
    const double exact = wilcoxon_exact(a, b);
    CHECK(std::abs(approx - exact) < 0.05);
  }
}

TEST_CASE("wilcoxon detects a consistent shift") {
  std::vector<double> a(12), b(12);
  Rng rng(31);
  for (std::size_t i = 0; i < 12; ++i) {
    b[i] = rng.uniform(70.0, 90.0);
    a[i] = b[i] + rng.uniform(1.0, 3.0);
  }
  CHECK(wilcoxon_signed_rank(a, b) < 0.05);

  // A symmetric scatter should not look significant.
  std::vector<double> c(12);
  for (std::size_t i = 0; i < 12; ++i)
    c[i] = b[i] + (i % 2 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
  CHECK(wilcoxon_signed_rank(c, b) > 0.2);
}

TEST_CASE("report aggregation computes population statistics") {
  std::vector<CaseMetrics> cases(3);
  cases[0] = {"a", 90.0, 2.0, 95.0};
  cases[1] = {"b", 80.0, 4.0, 85.0};
  cases[2] = {"c", 70.0, 6.0, 75.0};
  const EvalReport rep = EvalReport::aggregate(cases);

  CHECK(rep.dice.mean == doctest::Approx(80.0));
  CHECK(rep.dice.variance == doctest::Approx((100.0 + 0.0 + 100.0) / 3.0));
  CHECK(rep.dice.stddev == doctest::Approx(std::sqrt(rep.dice.variance)));
  CHECK(rep.hd95.mean == doctest::Approx(4.0));
  CHECK(rep.precision.mean == doctest::Approx(85.0));
  CHECK(rep.cases.size() == 3);
}
