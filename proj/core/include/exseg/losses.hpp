#pragma once
// Segmentation losses evaluated only on voxels carrying FG/BG supervision:
// cross-entropy, soft Dice and class-balanced focal, plus their sum. Each
// returns its value and the analytic gradient with respect to the
// probability map (zero on unlabeled voxels).

#include <vector>

#include "exseg/annotations.hpp"
#include "exseg/volume.hpp"

namespace exseg {

struct LossValueGrad {
  double value = 0.0;
  std::vector<double> grad;  ///< d value / d p per voxel, zero when unlabeled
};

struct LossReport {
  double total = 0.0;
  double ce = 0.0;
  double dice = 0.0;
  double focal = 0.0;
  std::vector<double> grad;
};

/// Mean binary cross-entropy over annotated voxels, probabilities clamped to
/// [1e-7, 1 - 1e-7].
LossValueGrad partial_cross_entropy(const Volume& prob, const SupervisionMask& mask);

/// 1 - (2 sum p*y + 1) / (sum p + sum y + 1) over the annotated set.
LossValueGrad partial_soft_dice(const Volume& prob, const SupervisionMask& mask);

/// Mean over annotated voxels of alpha_y (1 - p_t)^gamma (-log p_t); the
/// class weights alpha are |A| / (2 |A_class|) computed on the annotated set,
/// zero for a class absent from it.
LossValueGrad partial_class_balanced_focal(const Volume& prob, const SupervisionMask& mask,
                                           double gamma_focal);

/// Sum of the three losses; gradients add.
LossReport combined_loss(const Volume& prob, const SupervisionMask& mask, double gamma_focal);

}  // namespace exseg
