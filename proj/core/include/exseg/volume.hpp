#pragma once
// Dense 3D scalar volumes with anisotropic voxel spacing.

#include <array>
#include <cstddef>
#include <vector>

namespace exseg {

/// Integer voxel coordinate (i fastest-varying axis).
struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// Dense 3D scalar field stored x-fastest, float32 storage.
/// Reductions over volumes accumulate in double.
class Volume {
 public:
  Volume() = default;
  Volume(std::array<int, 3> shape, std::array<double, 3> spacing, float fill = 0.0f);
  Volume(std::array<int, 3> shape, std::array<double, 3> spacing, std::vector<float> data);

  const std::array<int, 3>& shape() const { return shape_; }
  const std::array<double, 3>& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(shape_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(shape_[1]) * k);
  }
  std::size_t index(const VoxelIndex& v) const { return index(v.i, v.j, v.k); }

  float operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  float& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  float at(const VoxelIndex& v) const { return data_[index(v)]; }
  float& at(const VoxelIndex& v) { return data_[index(v)]; }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && i < shape_[0] && j >= 0 && j < shape_[1] && k >= 0 && k < shape_[2];
  }
  bool in_bounds(const VoxelIndex& v) const { return in_bounds(v.i, v.j, v.k); }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  /// Euclidean distance between voxel centers in mm.
  double physical_distance(const VoxelIndex& a, const VoxelIndex& b) const;

  /// Throws if any stored value is NaN or infinite.
  void require_finite() const;

  bool same_grid(const Volume& other) const {
    return shape_ == other.shape_ && spacing_ == other.spacing_;
  }

 private:
  std::array<int, 3> shape_{0, 0, 0};
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  std::vector<float> data_;
};

/// Per-voxel Euclidean norm of the spacing-aware finite-difference gradient.
/// Central differences in the interior, one-sided at the faces.
/// Throws if any dimension is < 2.
Volume gradient_magnitude(const Volume& vol);

/// Affine rescale of values to [0,1]. Constant volumes map to all-0.5.
Volume normalize_intensity(const Volume& vol);

/// Windowed box mean with the given voxel radius; border windows shrink to
/// the in-bounds part. Used for smoothing and for model features.
Volume box_mean(const Volume& vol, int radius);

}  // namespace exseg
