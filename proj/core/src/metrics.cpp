#include "exseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace exseg {

namespace {

bool fg(float v) { return v > 0.5f; }

void check_shapes(const Volume& pred, const Volume& gt) {
  if (pred.shape() != gt.shape()) throw std::invalid_argument("prediction/gt shape mismatch");
}

/// Foreground voxels with at least one six-neighbour background voxel;
/// out-of-volume neighbours count as background.
std::vector<VoxelIndex> boundary_voxels(const Volume& mask) {
  const auto& s = mask.shape();
  std::vector<VoxelIndex> out;
  static constexpr int offs[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                     {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        if (!fg(mask(i, j, k))) continue;
        for (const auto& o : offs) {
          const int ii = i + o[0], jj = j + o[1], kk = k + o[2];
          if (!mask.in_bounds(ii, jj, kk) || !fg(mask(ii, jj, kk))) {
            out.push_back({i, j, k});
            break;
          }
        }
      }
  return out;
}

double percentile_interpolated(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double directed_p95(const std::vector<VoxelIndex>& from, const std::vector<VoxelIndex>& to,
                    const std::array<double, 3>& sp) {
  std::vector<double> dists;
  dists.reserve(from.size());
  for (const auto& a : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : to) {
      const double dx = (a.i - b.i) * sp[0];
      const double dy = (a.j - b.j) * sp[1];
      const double dz = (a.k - b.k) * sp[2];
      const double d2 = dx * dx + dy * dy + dz * dz;
      best = std::min(best, d2);
    }
    dists.push_back(std::sqrt(best));
  }
  return percentile_interpolated(std::move(dists), 95.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double dice(const Volume& pred, const Volume& gt) {
  check_shapes(pred, gt);
  std::size_t np = 0, ng = 0, ni = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const bool p = fg(pred.data()[n]);
    const bool g = fg(gt.data()[n]);
    np += p;
    ng += g;
    ni += p && g;
  }
  if (np + ng == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(ni) / static_cast<double>(np + ng);
}

double precision(const Volume& pred, const Volume& gt) {
  check_shapes(pred, gt);
  std::size_t np = 0, ng = 0, ni = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    const bool p = fg(pred.data()[n]);
    const bool g = fg(gt.data()[n]);
    np += p;
    ng += g;
    ni += p && g;
  }
  if (np == 0) return ng == 0 ? 100.0 : 0.0;
  return 100.0 * static_cast<double>(ni) / static_cast<double>(np);
}

double hd95(const Volume& pred, const Volume& gt) {
  check_shapes(pred, gt);
  const auto bp = boundary_voxels(pred);
  const auto bg_ = boundary_voxels(gt);
  if (bp.empty() || bg_.empty()) throw std::runtime_error("undefined HD95");
  const auto& sp = pred.spacing();
  return std::max(directed_p95(bp, bg_, sp), directed_p95(bg_, bp, sp));
}

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) return 1.0;
  const std::size_t n = diffs.size();
  if (n < 6) throw std::invalid_argument("too few nonzero differences for Wilcoxon test");

  // Rank |d| with average ranks for ties.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<double> rank(n, 0.0);
  double tie_term = 0.0;
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && std::abs(diffs[order[end]]) == std::abs(diffs[order[pos]])) ++end;
    const double avg_rank = 0.5 * static_cast<double>(pos + 1 + end);  // 1-based
    for (std::size_t t = pos; t < end; ++t) rank[order[t]] = avg_rank;
    const double t = static_cast<double>(end - pos);
    tie_term += t * t * t - t;
    pos = end;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0.0) w_plus += rank[i];

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;

  double dev = w_plus - mean;
  if (dev > 0.0)
    dev -= 0.5;
  else if (dev < 0.0)
    dev += 0.5;
  const double z = dev / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(std::abs(z)));
}

EvalReport EvalReport::aggregate(std::vector<CaseMetrics> cases) {
  EvalReport rep;
  rep.cases = std::move(cases);
  const auto summarize = [&](auto field) {
    MetricSummary s;
    if (rep.cases.empty()) return s;
    double sum = 0.0;
    for (const auto& c : rep.cases) sum += field(c);
    s.mean = sum / static_cast<double>(rep.cases.size());
    double sq = 0.0;
    for (const auto& c : rep.cases) {
      const double d = field(c) - s.mean;
      sq += d * d;
    }
    s.variance = sq / static_cast<double>(rep.cases.size());
    s.stddev = std::sqrt(s.variance);
    return s;
  };
  rep.dice = summarize([](const CaseMetrics& c) { return c.dice; });
  rep.hd95 = summarize([](const CaseMetrics& c) { return c.hd95; });
  rep.precision = summarize([](const CaseMetrics& c) { return c.precision; });
  return rep;
}

}  // namespace exseg
