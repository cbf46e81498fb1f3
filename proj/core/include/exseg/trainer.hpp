#pragma once
// Weakly-supervised training: a logistic model over handcrafted per-voxel
// features, supervised by extreme-point geodesics recomputed after every
// forward pass, optimised with Nesterov SGD under a poly learning-rate
// schedule. The best model is picked by validation loss.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "exseg/annotations.hpp"
#include "exseg/crf_reg.hpp"
#include "exseg/geodesics.hpp"
#include "exseg/losses.hpp"
#include "exseg/volume.hpp"

namespace exseg {

enum class SupervisionMode { Naive, Geodesic, GeodesicReg };

struct TrainConfig {
  double lr0 = 0.01;
  double momentum = 0.99;
  int iterations = 900;  ///< total SGD steps, cycling the training set
  int lr_step = 30;      ///< iterations per learning-rate stair
  int lr_total = 300;    ///< number of stairs until the rate reaches zero
  double lambda = 1e-4;  ///< weight of the pairwise regulariser
  int margin = 4;        ///< relaxed-box dilation r in voxels
  GeodesicMetric geodesic_mode = GeodesicMetric::Deep;
  RegConfig reg{.window_radius = 3};  ///< windowed by default: training volumes are large
  double gamma_focal = 2.0;
  std::uint64_t seed = 0;
  SupervisionMode supervision_mode = SupervisionMode::GeodesicReg;

  void validate() const;
};

/// Per-voxel feature planes, stored voxel-major for fast dot products:
/// intensity, box means at radii 1 and 2, gradient magnitude, and the
/// normalised coordinates.
struct FeatureStack {
  static constexpr int kCount = 7;

  std::array<int, 3> shape{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::vector<float> values;

  std::size_t voxels() const { return values.size() / kCount; }
  const float* at(std::size_t n) const { return values.data() + n * kCount; }
};

/// X must already be normalised to [0, 1].
FeatureStack compute_features(const Volume& X);

struct VoxelLogisticModel {
  std::array<double, FeatureStack::kCount> weights{};
  double bias = 0.0;
};

/// Per-voxel logistic(w . phi + b), computed in double precision.
Volume forward(const VoxelLogisticModel& model, const FeatureStack& phi);
Volume forward(const VoxelLogisticModel& model, const Volume& X);

/// lr0 * (1 - floor(it / lr_step) / lr_total)^0.9, clamped to zero once the
/// schedule is exhausted.
double poly_lr(int it, const TrainConfig& cfg);

struct SupervisionResult {
  SupervisionMask mask;
  std::optional<GeodesicSet> geodesics;
};

/// Naive mode labels the six clicks foreground; geodesic modes label the
/// union of the three inter-extreme paths (plus the clicks). Both label
/// everything outside the relaxed box background. prob is consulted only by
/// the deep metric; grad is the gradient magnitude of X.
SupervisionResult assemble_supervision(const Volume& X, const Volume& grad, const Volume& prob,
                                       const ExtremePointSet& pts, const TrainConfig& cfg);

struct TrainCase {
  std::string id;
  Volume image;  ///< raw intensities; normalised during preparation
  ExtremePointSet points;
};

/// Everything train_step needs per case, computed once.
struct PreparedCase {
  std::string id;
  Volume image;  ///< normalised to [0, 1]
  Volume grad;
  FeatureStack features;
  ExtremePointSet points;
};

PreparedCase prepare_case(const TrainCase& c);

struct TrainState {
  VoxelLogisticModel model;
  std::array<double, FeatureStack::kCount> velocity{};
  double velocity_bias = 0.0;
  int iteration = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  VoxelLogisticModel best_model;
  int best_iteration = 0;
};

struct StepReport {
  double loss = 0.0;       ///< partial losses plus lambda * R
  double reg_value = 0.0;  ///< unweighted R (zero outside GeodesicReg mode)
  double lr = 0.0;
};

/// One SGD step: forward, supervision from the current probabilities, loss
/// gradient through the logistic, Nesterov update
///   v <- mu v - lr g,  theta <- theta + mu v - lr g.
/// Throws if the loss or gradient is non-finite.
StepReport train_step(TrainState& state, const PreparedCase& c, const TrainConfig& cfg);

/// Mean loss over the validation cases under the same supervision mode, with
/// geodesics taken from the model being evaluated.
double validation_loss(const VoxelLogisticModel& model, const std::vector<PreparedCase>& val,
                       const TrainConfig& cfg);

struct TrainResult {
  VoxelLogisticModel model;  ///< checkpoint with the smallest validation loss
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  std::vector<double> val_history;  ///< one entry per evaluation point
};

/// Runs cfg.iterations steps cycling train_set, evaluating validation loss
/// for the initial model and after every epoch; returns the best snapshot.
/// Deterministic: identical inputs and config give bit-identical weights.
TrainResult train(const std::vector<TrainCase>& train_set, const std::vector<TrainCase>& val_set,
                  const TrainConfig& cfg);

}  // namespace exseg
