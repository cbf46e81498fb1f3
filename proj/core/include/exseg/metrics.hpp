#pragma once
// Segmentation evaluation: Dice score, 95th-percentile Hausdorff distance in
// mm, precision, and a paired Wilcoxon signed-rank test.

#include <span>
#include <string>
#include <vector>

#include "exseg/volume.hpp"

namespace exseg {

/// 100 * 2|P&G| / (|P|+|G|). Both masks empty -> 100.
double dice(const Volume& pred, const Volume& gt);

/// 100 * |P&G| / |P|. Empty prediction -> 100 if gt empty, else 0.
double precision(const Volume& pred, const Volume& gt);

/// Max of the two directed 95th-percentile boundary distances in mm.
/// Boundary voxels are foreground voxels with a six-neighbour background
/// voxel (volume faces count as background); percentile by linear
/// interpolation on the sorted distances. Throws on an empty mask.
double hd95(const Volume& pred, const Volume& gt);

/// Two-sided p-value of the paired Wilcoxon signed-rank test, normal
/// approximation with tie and continuity corrections. Zero differences are
/// dropped; all-zero pairs give p = 1. Requires >= 6 nonzero differences.
double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct CaseMetrics {
  std::string case_id;
  double dice = 0.0;
  double hd95 = 0.0;
  double precision = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double variance = 0.0;  ///< population variance
  double stddev = 0.0;
};

struct EvalReport {
  std::vector<CaseMetrics> cases;
  MetricSummary dice;
  MetricSummary hd95;
  MetricSummary precision;

  static EvalReport aggregate(std::vector<CaseMetrics> cases);
};

}  // namespace exseg
