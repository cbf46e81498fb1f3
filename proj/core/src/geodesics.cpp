#include "exseg/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

namespace exseg {

namespace {

struct NeighborOffset {
  int di, dj, dk;
  double dist_mm;
};

std::vector<NeighborOffset> neighbor_offsets(int connectivity,
                                             const std::array<double, 3>& sp) {
  if (connectivity != 6 && connectivity != 26)
    throw std::invalid_argument("connectivity must be 6 or 26");
  std::vector<NeighborOffset> offs;
  for (int dk = -1; dk <= 1; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0 && dk == 0) continue;
        if (connectivity == 6 && std::abs(di) + std::abs(dj) + std::abs(dk) != 1) continue;
        const double dx = di * sp[0], dy = dj * sp[1], dz = dk * sp[2];
        offs.push_back({di, dj, dk, std::sqrt(dx * dx + dy * dy + dz * dz)});
      }
  return offs;
}

bool adjacent(const VoxelIndex& a, const VoxelIndex& b, int connectivity) {
  const int di = std::abs(a.i - b.i), dj = std::abs(a.j - b.j), dk = std::abs(a.k - b.k);
  if (di > 1 || dj > 1 || dk > 1 || (di | dj | dk) == 0) return false;
  if (connectivity == 6) return di + dj + dk == 1;
  return true;
}

}  // namespace

std::pair<double, double> auto_gammas(const Volume& grad, const VoxelBox& box,
                                      const VoxelIndex& source) {
  if (!box.contains(source)) throw std::invalid_argument("gamma source outside the box");
  double max_dist = 0.0;
  double max_grad = 0.0;
  for (int k = box.lo.k; k <= box.hi.k; ++k)
    for (int j = box.lo.j; j <= box.hi.j; ++j)
      for (int i = box.lo.i; i <= box.hi.i; ++i) {
        max_dist = std::max(max_dist, grad.physical_distance(source, {i, j, k}));
        max_grad = std::max(max_grad, static_cast<double>(grad(i, j, k)));
      }
  return {max_dist > 0.0 ? 1.0 / max_dist : 0.0, max_grad > 0.0 ? 1.0 / max_grad : 0.0};
}

double edge_cost(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                 const VoxelIndex& from, const VoxelIndex& to) {
  if (cfg.mode == GeodesicMetric::Deep && prob == nullptr)
    throw std::invalid_argument("deep metric requires a probability volume");
  double cost = cfg.gamma_g * std::abs(static_cast<double>(X.at(to)) - X.at(from));
  if (cfg.mode != GeodesicMetric::Gradient)
    cost += cfg.gamma_e * X.physical_distance(from, to);
  if (cfg.mode == GeodesicMetric::Deep)
    cost += 1.0 - static_cast<double>(prob->at(from));
  return cost;
}

double path_cost(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                 const std::vector<VoxelIndex>& voxels) {
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < voxels.size(); ++n)
    total += edge_cost(cfg, X, prob, voxels[n], voxels[n + 1]);
  return total;
}

VoxelPath shortest_path(const GeodesicConfig& cfg, const Volume& X, const Volume* prob,
                        const VoxelIndex& start, const VoxelIndex& end, const VoxelBox& box) {
  if (!box.contains(start) || !box.contains(end))
    throw std::invalid_argument("path endpoints must lie inside the box");
  if (cfg.mode == GeodesicMetric::Deep && prob == nullptr)
    throw std::invalid_argument("deep metric requires a probability volume");

  if (start == end) return VoxelPath{{start}, 0.0};

  const auto ext = box.extent();
  const auto local = [&](const VoxelIndex& v) -> std::int32_t {
    return (v.i - box.lo.i) +
           ext[0] * ((v.j - box.lo.j) + ext[1] * (v.k - box.lo.k));
  };
  const auto unlocal = [&](std::int32_t n) -> VoxelIndex {
    const int i = n % ext[0];
    const int j = (n / ext[0]) % ext[1];
    const int k = n / (ext[0] * ext[1]);
    return {box.lo.i + i, box.lo.j + j, box.lo.k + k};
  };

  const std::size_t n_box = box.voxel_count();
  std::vector<double> dist(n_box, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(n_box, -1);
  std::vector<std::uint8_t> settled(n_box, 0);

  const auto offs = neighbor_offsets(cfg.connectivity, X.spacing());

  struct QueueEntry {
    double cost;
    std::int32_t node;
    bool operator>(const QueueEntry& o) const {
      return cost != o.cost ? cost > o.cost : node > o.node;
    }
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> heap;

  const std::int32_t src = local(start);
  const std::int32_t dst = local(end);
  dist[src] = 0.0;
  heap.push({0.0, src});

  while (!heap.empty()) {
    const auto [cost, node] = heap.top();
    heap.pop();
    if (settled[node]) continue;  // lazy deletion
    settled[node] = 1;
    if (node == dst) break;

    const VoxelIndex u = unlocal(node);
    const double p_term = cfg.mode == GeodesicMetric::Deep
                              ? 1.0 - static_cast<double>(prob->at(u))
                              : 0.0;
    const double xu = X.at(u);
    for (const auto& o : offs) {
      const VoxelIndex v{u.i + o.di, u.j + o.dj, u.k + o.dk};
      if (!box.contains(v)) continue;
      const std::int32_t vn = local(v);
      if (settled[vn]) continue;
      // Same term order as edge_cost so path sums are bit-identical.
      double c = cfg.gamma_g * std::abs(static_cast<double>(X.at(v)) - xu);
      if (cfg.mode != GeodesicMetric::Gradient) c += cfg.gamma_e * o.dist_mm;
      c += p_term;
      const double cand = cost + c;
      if (cand < dist[vn] || (cand == dist[vn] && node < parent[vn])) {
        dist[vn] = cand;
        parent[vn] = node;
        heap.push({cand, vn});
      }
    }
  }

  if (!settled[dst]) throw std::runtime_error("path target unreachable");

  VoxelPath path;
  path.total_length = dist[dst];
  for (std::int32_t n = dst; n != -1; n = parent[n]) path.voxels.push_back(unlocal(n));
  std::reverse(path.voxels.begin(), path.voxels.end());

  // Contract checks: endpoints, adjacency, containment.
  if (!(path.voxels.front() == start) || !(path.voxels.back() == end))
    throw std::logic_error("reconstructed path endpoints mismatch");
  for (std::size_t n = 0; n + 1 < path.voxels.size(); ++n)
    if (!adjacent(path.voxels[n], path.voxels[n + 1], cfg.connectivity))
      throw std::logic_error("reconstructed path not grid-adjacent");
  for (const auto& v : path.voxels)
    if (!box.contains(v)) throw std::logic_error("path voxel escaped the box");
  return path;
}

GeodesicSet inter_extreme_geodesics(const GeodesicConfig& cfg, const Volume& X,
                                    const Volume& grad, const Volume* prob,
                                    const ExtremePointSet& pts) {
  pts.validate(X.shape());
  const VoxelBox box = tight_bbox(pts);

  GeodesicConfig local_cfg = cfg;
  bool gammas_fixed = false;
  GeodesicSet set;
  for (int a = 0; a < 3; ++a) {
    const VoxelIndex& s = pts.axis_min(a);
    const VoxelIndex& e = pts.axis_max(a);
    if (cfg.gamma_policy == GammaPolicy::PerPath || !gammas_fixed) {
      const auto [ge, gg] = auto_gammas(grad, box, s);
      local_cfg.gamma_e = ge;
      local_cfg.gamma_g = gg;
      gammas_fixed = true;
    }
    VoxelPath p = shortest_path(local_cfg, X, prob, s, e, box);
    (a == 0 ? set.path_x : a == 1 ? set.path_y : set.path_z) = std::move(p);
  }
  return set;
}

double path_containment(const VoxelPath& path, const Volume& mask) {
  if (path.voxels.empty()) return 0.0;
  std::size_t inside = 0;
  for (const auto& v : path.voxels)
    if (mask.at(v) > 0.5f) ++inside;
  return static_cast<double>(inside) / static_cast<double>(path.voxels.size());
}

}  // namespace exseg
