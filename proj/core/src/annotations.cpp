#include "exseg/annotations.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "exseg/rng.hpp"

namespace exseg {

void ExtremePointSet::validate(const std::array<int, 3>& shape) const {
  for (const auto& p : points) {
    if (p.i < 0 || p.j < 0 || p.k < 0 || p.i >= shape[0] || p.j >= shape[1] || p.k >= shape[2])
      throw std::invalid_argument("extreme point outside the volume");
  }
  for (int a = 0; a < 3; ++a) {
    const auto coord = [a](const VoxelIndex& v) { return a == 0 ? v.i : a == 1 ? v.j : v.k; };
    int mn = coord(points[0]), mx = coord(points[0]);
    for (const auto& p : points) {
      mn = std::min(mn, coord(p));
      mx = std::max(mx, coord(p));
    }
    if (coord(axis_min(a)) != mn || coord(axis_max(a)) != mx)
      throw std::invalid_argument("extreme point labels inconsistent with coordinates");
  }
}

std::size_t SupervisionMask::count(LabelState s) const {
  return static_cast<std::size_t>(std::count(state.begin(), state.end(), s));
}

VoxelBox tight_bbox(const ExtremePointSet& pts) {
  VoxelBox box{pts.points[0], pts.points[0]};
  for (const auto& p : pts.points) {
    box.lo.i = std::min(box.lo.i, p.i);
    box.lo.j = std::min(box.lo.j, p.j);
    box.lo.k = std::min(box.lo.k, p.k);
    box.hi.i = std::max(box.hi.i, p.i);
    box.hi.j = std::max(box.hi.j, p.j);
    box.hi.k = std::max(box.hi.k, p.k);
  }
  return box;
}

VoxelBox relax_bbox(const VoxelBox& box, int r, const std::array<int, 3>& shape) {
  if (r < 0) throw std::invalid_argument("relaxation margin must be >= 0");
  VoxelBox out;
  out.lo = {std::max(0, box.lo.i - r), std::max(0, box.lo.j - r), std::max(0, box.lo.k - r)};
  out.hi = {std::min(shape[0] - 1, box.hi.i + r), std::min(shape[1] - 1, box.hi.j + r),
            std::min(shape[2] - 1, box.hi.k + r)};
  return out;
}

ExtremePointSet simulate_extreme_points(const Volume& gt, std::uint64_t seed) {
  const auto& s = gt.shape();
  int mn[3] = {s[0], s[1], s[2]};
  int mx[3] = {-1, -1, -1};
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i) {
        if (gt(i, j, k) <= 0.5f) continue;
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          mn[a] = std::min(mn[a], c[a]);
          mx[a] = std::max(mx[a], c[a]);
        }
      }
  if (mx[0] < 0) throw std::runtime_error("empty ground truth");

  // Gather the argmin/argmax candidate slices per axis, then pick one
  // candidate uniformly at random.
  Rng rng(seed);
  ExtremePointSet pts;
  for (int a = 0; a < 3; ++a) {
    for (int side = 0; side < 2; ++side) {
      const int target = side == 0 ? mn[a] : mx[a];
      std::vector<VoxelIndex> candidates;
      for (int k = 0; k < s[2]; ++k)
        for (int j = 0; j < s[1]; ++j)
          for (int i = 0; i < s[0]; ++i) {
            if (gt(i, j, k) <= 0.5f) continue;
            const int c[3] = {i, j, k};
            if (c[a] == target) candidates.push_back({i, j, k});
          }
      const auto pick = candidates[rng.uniform_below(candidates.size())];
      if (side == 0)
        pts.axis_min(a) = pick;
      else
        pts.axis_max(a) = pick;
    }
  }
  return pts;
}

SupervisionMask initial_supervision(const ExtremePointSet& pts, const VoxelBox& box_relax,
                                    const std::array<int, 3>& shape) {
  pts.validate(shape);
  SupervisionMask mask(shape);
  std::size_t n = 0;
  for (int k = 0; k < shape[2]; ++k)
    for (int j = 0; j < shape[1]; ++j)
      for (int i = 0; i < shape[0]; ++i, ++n)
        if (!box_relax.contains({i, j, k})) mask.state[n] = LabelState::Background;
  for (const auto& p : pts.points) mask.state[mask.index(p)] = LabelState::Foreground;
  return mask;
}

}  // namespace exseg
