#include "exseg/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "exseg/rng.hpp"

namespace exseg {

void PhantomSpec::validate() const {
  if (fg_intensity == bg_intensity)
    throw std::invalid_argument("foreground and background intensity must differ");
  if (noise_sd < 0.0f) throw std::invalid_argument("noise_sd must be >= 0");
  for (int a = 0; a < 3; ++a) {
    if (shape[a] < 8) throw std::invalid_argument("phantom shape too small");
    if (!(spacing[a] > 0.0)) throw std::invalid_argument("spacing must be positive");
  }
}

bool single_connected_component(const Volume& gt) {
  const auto& s = gt.shape();
  std::size_t total = 0;
  VoxelIndex first{-1, -1, -1};
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i)
        if (gt(i, j, k) > 0.5f) {
          ++total;
          if (first.i < 0) first = {i, j, k};
        }
  if (total == 0) return false;

  std::vector<std::uint8_t> seen(gt.size(), 0);
  std::queue<VoxelIndex> queue;
  queue.push(first);
  seen[gt.index(first)] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const VoxelIndex v = queue.front();
    queue.pop();
    ++reached;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0 && dk == 0) continue;
          const VoxelIndex w{v.i + di, v.j + dj, v.k + dk};
          if (!gt.in_bounds(w)) continue;
          const std::size_t n = gt.index(w);
          if (seen[n] || gt.data()[n] <= 0.5f) continue;
          seen[n] = 1;
          queue.push(w);
        }
  }
  return reached == total;
}

namespace {

struct BlobGeometry {
  double cx, cy, cz;
  double rx, ry, rz;
};

BlobGeometry sample_blob(const PhantomSpec& spec, Rng& rng) {
  const auto& s = spec.shape;
  BlobGeometry g;
  g.cx = 0.5 * (s[0] - 1) + rng.uniform(-2.0, 2.0);
  g.cy = 0.5 * (s[1] - 1) + rng.uniform(-2.0, 2.0);
  g.cz = 0.5 * (s[2] - 1) + rng.uniform(-1.0, 1.0);
  g.rx = 0.30 * s[0] * rng.uniform(0.85, 1.15);
  g.ry = 0.30 * s[1] * rng.uniform(0.85, 1.15);
  g.rz = 0.30 * s[2] * rng.uniform(0.85, 1.15);
  return g;
}

Volume blob_mask(const PhantomSpec& spec, const BlobGeometry& g) {
  Volume gt(spec.shape, spec.spacing);
  const auto& s = spec.shape;
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        const double x = (i - g.cx) / g.rx;
        const double y = (j - g.cy) / g.ry;
        const double z = (k - g.cz) / g.rz;
        if (x * x + y * y + z * z <= 1.0) gt(i, j, k) = 1.0f;
      }
  return gt;
}

Volume tube_mask(const PhantomSpec& spec, Rng& rng) {
  const auto& s = spec.shape;
  // Quadratic Bezier arc in the xy plane; the chord between the tube ends
  // runs through background, which is what the geodesic tests need.
  const double y0 = 0.32 * s[1] * rng.uniform(0.95, 1.05);
  const double apex = 0.85 * s[1] * rng.uniform(0.95, 1.05);
  const double zc = 0.5 * (s[2] - 1) + rng.uniform(-1.0, 1.0);
  const double p0[3] = {0.16 * s[0], y0, zc};
  const double p1[3] = {0.50 * s[0], apex, zc};
  const double p2[3] = {0.84 * s[0], y0, zc};
  const double radius = rng.uniform(2.4, 3.2);

  const int steps = 256;
  std::vector<std::array<double, 3>> pts(steps + 1);
  for (int t = 0; t <= steps; ++t) {
    const double u = static_cast<double>(t) / steps;
    const double a = (1 - u) * (1 - u), b = 2 * u * (1 - u), c = u * u;
    pts[t] = {a * p0[0] + b * p1[0] + c * p2[0], a * p0[1] + b * p1[1] + c * p2[1],
              a * p0[2] + b * p1[2] + c * p2[2]};
  }

  Volume gt(spec.shape, spec.spacing);
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        double best = 1e30;
        for (const auto& p : pts) {
          const double dx = i - p[0], dy = j - p[1], dz = k - p[2];
          best = std::min(best, dx * dx + dy * dy + dz * dz);
          if (best <= radius * radius) break;
        }
        if (best <= radius * radius) gt(i, j, k) = 1.0f;
      }
  return gt;
}

/// Near-foreground corridor: an annulus arc hugging the object exterior on
/// the +y side, one to three voxels out, plus a straight tail that leaves the
/// bounding box so part of the corridor always receives background labels.
void paint_corridor(Volume& image, const Volume& gt, const PhantomSpec& spec,
                    const BlobGeometry& g, float level) {
  const auto& s = spec.shape;
  const double rmin = std::min(g.rx, g.ry);
  for (int k = 0; k < s[2]; ++k) {
    if (std::abs(k - g.cz) > 3.5) continue;
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        if (gt(i, j, k) > 0.5f) continue;
        const double x = (i - g.cx) / g.rx;
        const double y = (j - g.cy) / g.ry;
        const double off = (std::sqrt(x * x + y * y) - 1.0) * rmin;
        // Lower bound below zero so the band hugs the voxelised surface even
        // where it bulges past the ideal ellipse.
        const bool arc = off >= -1.0 && off <= 4.5 && j >= g.cy - 0.5;
        const bool tail = std::abs(i - g.cx) <= 3.0 && j - g.cy >= g.ry &&
                          j <= s[1] - 2;
        if (arc || tail) image(i, j, k) = level;
      }
  }
}

Phantom assemble(const PhantomSpec& spec, std::uint64_t attempt_seed) {
  Rng rng(attempt_seed);
  Volume gt;
  BlobGeometry geo{};
  switch (spec.kind) {
    case PhantomKind::BentTube:
      gt = tube_mask(spec, rng);
      break;
    case PhantomKind::Blob:
    case PhantomKind::BlobWithDistractor:
      geo = sample_blob(spec, rng);
      gt = blob_mask(spec, geo);
      break;
  }

  Volume base(spec.shape, spec.spacing);
  for (std::size_t n = 0; n < base.size(); ++n)
    base.data()[n] =
        spec.bg_intensity + (spec.fg_intensity - spec.bg_intensity) * gt.data()[n];

  Volume image = box_mean(base, 1);

  // Painted after smoothing so the corridor interior is gradient-free: a
  // gradient-cost path can run along it without crossing any edge.
  if (spec.kind == PhantomKind::BlobWithDistractor) {
    const float level =
        spec.bg_intensity + spec.distractor_contrast * (spec.fg_intensity - spec.bg_intensity);
    paint_corridor(image, gt, spec, geo, level);
  }
  if (spec.noise_sd > 0.0f) {
    const std::uint64_t noise_seed = hash_counter(attempt_seed, 0x7105EULL);
    for (std::size_t n = 0; n < image.size(); ++n)
      image.data()[n] += static_cast<float>(spec.noise_sd * counter_normal(noise_seed, n));
  }
  return {std::move(image), std::move(gt)};
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  for (int attempt = 0; attempt < 10; ++attempt) {
    const std::uint64_t attempt_seed =
        attempt == 0 ? spec.seed : hash_counter(spec.seed, static_cast<std::uint64_t>(attempt));
    Phantom ph = assemble(spec, attempt_seed);
    const std::size_t fg_count =
        static_cast<std::size_t>(std::count(ph.gt.data().begin(), ph.gt.data().end(), 1.0f));
    const double frac = static_cast<double>(fg_count) / static_cast<double>(ph.gt.size());
    if (frac < 0.01 || frac > 0.20) continue;
    if (!single_connected_component(ph.gt)) continue;
    return ph;
  }
  throw std::runtime_error("phantom generation failed: foreground empty or disconnected");
}

}  // namespace exseg
