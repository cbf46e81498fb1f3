#include "exseg/crf_reg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "exseg/parallel.hpp"

namespace exseg {

void RegConfig::validate() const {
  if (!(sigma_alpha > 0.0)) throw std::invalid_argument("sigma_alpha must be > 0");
  if (!(sigma_beta > 0.0)) throw std::invalid_argument("sigma_beta must be > 0");
  if (window_radius != kExactWindow && window_radius < 1)
    throw std::invalid_argument("window_radius must be >= 1 or exact");
}

namespace {

double pair_distance(const VoxelIndex& k, const VoxelIndex& l, const Volume& X,
                     const RegConfig& cfg) {
  if (cfg.sigma_alpha_units == SigmaAlphaUnits::Mm) return X.physical_distance(k, l);
  const double di = k.i - l.i, dj = k.j - l.j, dk = k.k - l.k;
  return std::sqrt(di * di + dj * dj + dk * dk);
}

struct SpatialOffset {
  int di, dj, dk;
  double weight;
};

std::vector<SpatialOffset> spatial_window(const Volume& X, const RegConfig& cfg) {
  const auto& s = X.shape();
  const int radius = cfg.window_radius == RegConfig::kExactWindow
                         ? std::max({s[0], s[1], s[2]}) - 1
                         : cfg.window_radius;
  const double inv2sa = 1.0 / (2.0 * cfg.sigma_alpha * cfg.sigma_alpha);
  const auto& sp = X.spacing();
  std::vector<SpatialOffset> offs;
  offs.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1) * (2 * radius + 1));
  for (int dk = -radius; dk <= radius; ++dk)
    for (int dj = -radius; dj <= radius; ++dj)
      for (int di = -radius; di <= radius; ++di) {
        if (!cfg.include_self && di == 0 && dj == 0 && dk == 0) continue;
        double d2;
        if (cfg.sigma_alpha_units == SigmaAlphaUnits::Mm) {
          const double x = di * sp[0], y = dj * sp[1], z = dk * sp[2];
          d2 = x * x + y * y + z * z;
        } else {
          d2 = static_cast<double>(di) * di + static_cast<double>(dj) * dj +
               static_cast<double>(dk) * dk;
        }
        offs.push_back({di, dj, dk, std::exp(-d2 * inv2sa)});
      }
  return offs;
}

}  // namespace

double kernel_weight(const VoxelIndex& k, const VoxelIndex& l, const Volume& X,
                     const RegConfig& cfg) {
  cfg.validate();
  const double d = pair_distance(k, l, X, cfg);
  const double dx = static_cast<double>(X.at(k)) - X.at(l);
  return std::exp(-(d * d) / (2.0 * cfg.sigma_alpha * cfg.sigma_alpha) -
                  (dx * dx) / (2.0 * cfg.sigma_beta * cfg.sigma_beta));
}

RegResult regularizer(const Volume& prob, const Volume& X, const RegConfig& cfg) {
  cfg.validate();
  if (!prob.same_grid(X)) throw std::invalid_argument("probability/image shape mismatch");
  for (float p : prob.data())
    if (!(p >= 0.0f && p <= 1.0f))
      throw std::invalid_argument("probabilities must lie in [0,1]");

  const auto& s = X.shape();
  const auto offs = spatial_window(X, cfg);
  const double inv2sb = 1.0 / (2.0 * cfg.sigma_beta * cfg.sigma_beta);
  const std::size_t n = prob.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  RegResult res;
  res.grad.assign(n, 0.0);
  std::vector<double> chunk_value(kParallelChunks, 0.0);

  parallel_chunks(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    double local_value = 0.0;
    for (std::size_t m = begin; m < end; ++m) {
      const int i = static_cast<int>(m % s[0]);
      const int j = static_cast<int>((m / s[0]) % s[1]);
      const int k = static_cast<int>(m / (static_cast<std::size_t>(s[0]) * s[1]));
      const double xm = X.data()[m];
      const double pm = prob.data()[m];
      double sum_w = 0.0;    // sum of W_ml over the window
      double sum_wp = 0.0;   // sum of W_ml * p_l
      for (const auto& o : offs) {
        const int li = i + o.di, lj = j + o.dj, lk = k + o.dk;
        if (li < 0 || li >= s[0] || lj < 0 || lj >= s[1] || lk < 0 || lk >= s[2]) continue;
        const std::size_t ln = X.index(li, lj, lk);
        const double dx = xm - X.data()[ln];
        const double w = o.weight * std::exp(-dx * dx * inv2sb);
        sum_w += w;
        sum_wp += w * prob.data()[ln];
      }
      local_value += pm * (sum_w - sum_wp);
      res.grad[m] = (sum_w - 2.0 * sum_wp) * inv_n;
    }
    chunk_value[chunk] = local_value;
  });

  double total = 0.0;
  for (double v : chunk_value) total += v;  // fixed chunk order
  res.value = total * inv_n;
  return res;
}

double regularizer_value(const Volume& prob, const Volume& X, const RegConfig& cfg) {
  return regularizer(prob, X, cfg).value;
}

Volume regularizer_gradient(const Volume& prob, const Volume& X, const RegConfig& cfg) {
  const RegResult res = regularizer(prob, X, cfg);
  Volume out(prob.shape(), prob.spacing());
  for (std::size_t m = 0; m < res.grad.size(); ++m)
    out.data()[m] = static_cast<float>(res.grad[m]);
  return out;
}

}  // namespace exseg
