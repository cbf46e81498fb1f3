#include "exseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace exseg {

namespace {

void check_geometry(const std::array<int, 3>& shape, const std::array<double, 3>& spacing) {
  for (int a = 0; a < 3; ++a) {
    if (shape[a] <= 0) throw std::invalid_argument("volume shape must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw std::invalid_argument("voxel spacing must be strictly positive");
  }
}

}  // namespace

Volume::Volume(std::array<int, 3> shape, std::array<double, 3> spacing, float fill)
    : shape_(shape), spacing_(spacing) {
  check_geometry(shape_, spacing_);
  data_.assign(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], fill);
}

Volume::Volume(std::array<int, 3> shape, std::array<double, 3> spacing, std::vector<float> data)
    : shape_(shape), spacing_(spacing), data_(std::move(data)) {
  check_geometry(shape_, spacing_);
  const auto expected = static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
  if (data_.size() != expected)
    throw std::invalid_argument("volume data length does not match shape");
}

double Volume::physical_distance(const VoxelIndex& a, const VoxelIndex& b) const {
  const double dx = (a.i - b.i) * spacing_[0];
  const double dy = (a.j - b.j) * spacing_[1];
  const double dz = (a.k - b.k) * spacing_[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void Volume::require_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) throw std::runtime_error("volume contains non-finite values");
}

Volume gradient_magnitude(const Volume& vol) {
  const auto& s = vol.shape();
  if (s[0] < 2 || s[1] < 2 || s[2] < 2)
    throw std::invalid_argument("volume too small for gradient");

  Volume out(s, vol.spacing());
  const auto& sp = vol.spacing();
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        // One-sided difference at the faces, central in the interior.
        double g[3];
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
          int lo = c[a] > 0 ? c[a] - 1 : c[a];
          int hi = c[a] < s[a] - 1 ? c[a] + 1 : c[a];
          int ia = i, ja = j, ka = k, ib = i, jb = j, kb = k;
          if (a == 0) { ia = hi; ib = lo; }
          if (a == 1) { ja = hi; jb = lo; }
          if (a == 2) { ka = hi; kb = lo; }
          g[a] = (static_cast<double>(vol(ia, ja, ka)) - vol(ib, jb, kb)) /
                 ((hi - lo) * sp[a]);
        }
        out(i, j, k) = static_cast<float>(std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]));
      }
    }
  }
  return out;
}

Volume normalize_intensity(const Volume& vol) {
  const auto [mn_it, mx_it] = std::minmax_element(vol.data().begin(), vol.data().end());
  const float mn = *mn_it;
  const float mx = *mx_it;
  Volume out(vol.shape(), vol.spacing());
  if (mn == mx) {
    std::fill(out.data().begin(), out.data().end(), 0.5f);
    return out;
  }
  const double range = static_cast<double>(mx) - mn;
  for (std::size_t n = 0; n < vol.size(); ++n)
    out.data()[n] = static_cast<float>((vol.data()[n] - static_cast<double>(mn)) / range);
  return out;
}

Volume box_mean(const Volume& vol, int radius) {
  if (radius < 0) throw std::invalid_argument("box_mean radius must be >= 0");
  if (radius == 0) return vol;
  const auto& s = vol.shape();
  Volume out(s, vol.spacing());
  for (int k = 0; k < s[2]; ++k) {
    const int k0 = std::max(0, k - radius), k1 = std::min(s[2] - 1, k + radius);
    for (int j = 0; j < s[1]; ++j) {
      const int j0 = std::max(0, j - radius), j1 = std::min(s[1] - 1, j + radius);
      for (int i = 0; i < s[0]; ++i) {
        const int i0 = std::max(0, i - radius), i1 = std::min(s[0] - 1, i + radius);
        double sum = 0.0;
        for (int kk = k0; kk <= k1; ++kk)
          for (int jj = j0; jj <= j1; ++jj)
            for (int ii = i0; ii <= i1; ++ii) sum += vol(ii, jj, kk);
        const int count = (i1 - i0 + 1) * (j1 - j0 + 1) * (k1 - k0 + 1);
        out(i, j, k) = static_cast<float>(sum / count);
      }
    }
  }
  return out;
}

}  // namespace exseg
