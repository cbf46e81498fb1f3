#pragma once
// Extreme-point click sets, tight/relaxed bounding boxes and the partial
// supervision masks assembled from them.

#include <array>
#include <cstdint>

#include "exseg/volume.hpp"

namespace exseg {

/// The six user clicks: one min/max pair per axis.
/// Order: x_min, x_max, y_min, y_max, z_min, z_max.
struct ExtremePointSet {
  std::array<VoxelIndex, 6> points{};

  const VoxelIndex& axis_min(int axis) const { return points[2 * axis]; }
  const VoxelIndex& axis_max(int axis) const { return points[2 * axis + 1]; }
  VoxelIndex& axis_min(int axis) { return points[2 * axis]; }
  VoxelIndex& axis_max(int axis) { return points[2 * axis + 1]; }

  /// Throws unless every point is inside `shape` and each labelled extreme
  /// actually attains the min/max coordinate on its axis among the six.
  void validate(const std::array<int, 3>& shape) const;
};

/// Axis-aligned voxel box with inclusive bounds.
struct VoxelBox {
  VoxelIndex lo;
  VoxelIndex hi;

  bool contains(const VoxelIndex& v) const {
    return v.i >= lo.i && v.i <= hi.i && v.j >= lo.j && v.j <= hi.j && v.k >= lo.k &&
           v.k <= hi.k;
  }
  std::array<int, 3> extent() const { return {hi.i - lo.i + 1, hi.j - lo.j + 1, hi.k - lo.k + 1}; }
  std::size_t voxel_count() const {
    const auto e = extent();
    return static_cast<std::size_t>(e[0]) * e[1] * e[2];
  }
};

enum class LabelState : std::uint8_t { Unlabeled = 0, Foreground = 1, Background = 2 };

/// Per-voxel label-state field over the image grid.
struct SupervisionMask {
  std::array<int, 3> shape{0, 0, 0};
  std::vector<LabelState> state;

  explicit SupervisionMask(std::array<int, 3> s = {0, 0, 0})
      : shape(s),
        state(static_cast<std::size_t>(s[0] < 0 ? 0 : s[0]) * (s[1] < 0 ? 0 : s[1]) *
                  (s[2] < 0 ? 0 : s[2]),
              LabelState::Unlabeled) {}

  std::size_t index(const VoxelIndex& v) const {
    return static_cast<std::size_t>(v.i) +
           static_cast<std::size_t>(shape[0]) *
               (static_cast<std::size_t>(v.j) + static_cast<std::size_t>(shape[1]) * v.k);
  }
  LabelState at(const VoxelIndex& v) const { return state[index(v)]; }

  std::size_t count(LabelState s) const;
};

/// Component-wise min/max box spanned by the six extreme points.
VoxelBox tight_bbox(const ExtremePointSet& pts);

/// Dilate by r voxels per axis, clamped to [0, shape-1].
VoxelBox relax_bbox(const VoxelBox& box, int r, const std::array<int, 3>& shape);

/// Extreme points of a binary ground-truth volume; coordinate ties are broken
/// uniformly at random under `seed`. Throws "empty ground truth" if gt has no
/// foreground voxel.
ExtremePointSet simulate_extreme_points(const Volume& gt, std::uint64_t seed);

/// Naive supervision: the six clicks are foreground, everything outside
/// box_relax is background, the rest is unlabeled.
SupervisionMask initial_supervision(const ExtremePointSet& pts, const VoxelBox& box_relax,
                                    const std::array<int, 3>& shape);

}  // namespace exseg
