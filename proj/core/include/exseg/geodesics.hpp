#pragma once
// Inter-extreme-point shortest paths on the voxel grid. Three edge metrics:
// image gradient only, gradient + Euclidean, and the deep metric that adds
// the model's per-voxel background probability. Paths are restricted to the
// tight bounding box of the click set.

#include <optional>
#include <utility>
#include <vector>

#include "exseg/annotations.hpp"
#include "exseg/volume.hpp"

namespace exseg {

enum class GeodesicMetric { Gradient, GradientEuclidean, Deep };

/// Whether the gamma auto-scaling is refreshed per path (source = the path's
/// start point) or computed once per box from the first path's source.
enum class GammaPolicy { PerPath, PerBox };

struct GeodesicConfig {
  GeodesicMetric mode = GeodesicMetric::Deep;
  double gamma_e = 0.0;  ///< 1/mm weight of the Euclidean term; 0 disables it.
  double gamma_g = 0.0;  ///< weight of the intensity step term; 0 disables it.
  int connectivity = 26;  ///< 6 or 26
  GammaPolicy gamma_policy = GammaPolicy::PerPath;
};

/// Ordered voxel path; total_length is the accumulated metric cost.
struct VoxelPath {
  std::vector<VoxelIndex> voxels;
  double total_length = 0.0;
};

/// The three inter-extreme-point paths, one per axis.
struct GeodesicSet {
  VoxelPath path_x;
  VoxelPath path_y;
  VoxelPath path_z;

  const VoxelPath& axis(int a) const { return a == 0 ? path_x : a == 1 ? path_y : path_z; }
};

/// Normalisation policy for the metric weights: 1/gamma_e is the largest
/// source-to-box distance in mm, 1/gamma_g the largest gradient magnitude in
/// the box. A zero maximum disables the corresponding term (gamma = 0).
std::pair<double, double> auto_gammas(const Volume& grad, const VoxelBox& box,
                                      const VoxelIndex& source);

/// Cost of a single grid edge from -> to under the configured metric.
/// The intensity step term is |X(to) - X(from)|; the deep term adds the
/// background probability 1 - prob(from) of the tail voxel.
double edge_cost(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                 const VoxelIndex& from, const VoxelIndex& to);

/// Metric cost of an arbitrary voxel path (sum of edge costs, left to right).
double path_cost(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                 const std::vector<VoxelIndex>& voxels);

/// Dijkstra shortest path from start to end, restricted to box. Deterministic:
/// ties are broken by (cost, linearised voxel index).
VoxelPath shortest_path(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                        const VoxelIndex& start, const VoxelIndex& end, const VoxelBox& box);

/// The three geodesics x_min->x_max, y_min->y_max, z_min->z_max inside the
/// tight bounding box, with gammas from auto_gammas (policy per config).
/// prob is required in Deep mode.
GeodesicSet inter_extreme_geodesics(const GeodesicConfig& cfg, const Volume& X,
                                    const Volume& grad, const Volume* prob,
                                    const ExtremePointSet& pts);

/// Fraction of path voxels lying inside the positive region of `mask`.
double path_containment(const VoxelPath& path, const Volume& mask);

}  // namespace exseg
