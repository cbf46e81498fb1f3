#pragma once
// Pairwise consistency regulariser over the probability map: a Gaussian
// kernel in space and intensity weights every ordered voxel pair, penalising
// confident disagreement between similar voxels. Exact all-pairs and
// truncated-window evaluators share one code path; the analytic gradient is
// available for training.

#include "exseg/volume.hpp"

namespace exseg {

enum class SigmaAlphaUnits { Voxel, Mm };

struct RegConfig {
  double sigma_alpha = 15.0;  ///< spatial bandwidth
  double sigma_beta = 0.05;   ///< intensity bandwidth
  int window_radius = kExactWindow;  ///< cubic window radius in voxels, or kExactWindow
  double lambda = 1e-4;       ///< weight applied by the trainer
  bool include_self = true;   ///< include the k == l pair in the sum
  SigmaAlphaUnits sigma_alpha_units = SigmaAlphaUnits::Voxel;

  static constexpr int kExactWindow = -1;

  void validate() const;
};

/// exp(-d(k,l)^2 / (2 sigma_alpha^2) - (X_k - X_l)^2 / (2 sigma_beta^2)).
/// d is measured in voxels or mm per cfg.sigma_alpha_units.
double kernel_weight(const VoxelIndex& k, const VoxelIndex& l, const Volume& X,
                     const RegConfig& cfg);

struct RegResult {
  double value = 0.0;
  std::vector<double> grad;  ///< dR/dp per voxel
};

/// (1/|Omega|) sum over ordered pairs of p_k W_kl (1 - p_l), together with
/// its analytic gradient. Window mode restricts l to the cubic window around
/// k; exact mode sums every pair.
RegResult regularizer(const Volume& prob, const Volume& X, const RegConfig& cfg);

double regularizer_value(const Volume& prob, const Volume& X, const RegConfig& cfg);
Volume regularizer_gradient(const Volume& prob, const Volume& X, const RegConfig& cfg);

}  // namespace exseg
