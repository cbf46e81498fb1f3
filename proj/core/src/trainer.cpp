#include "exseg/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace exseg {

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw std::invalid_argument("lr0 must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (lr_step < 1) throw std::invalid_argument("lr_step must be positive");
  if (lr_total < 1) throw std::invalid_argument("lr_total must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (margin < 0) throw std::invalid_argument("margin must be >= 0");
  if (gamma_focal < 0.0) throw std::invalid_argument("gamma_focal must be >= 0");
  reg.validate();
}

FeatureStack compute_features(const Volume& X) {
  const auto& s = X.shape();
  const Volume mean1 = box_mean(X, 1);
  const Volume mean2 = box_mean(X, 2);
  const Volume grad = gradient_magnitude(X);

  FeatureStack phi;
  phi.shape = s;
  phi.spacing = X.spacing();
  phi.values.resize(X.size() * FeatureStack::kCount);

  const auto coord = [](int v, int n) {
    return n > 1 ? static_cast<float>(v) / static_cast<float>(n - 1) : 0.5f;
  };
  std::size_t n = 0;
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i, ++n) {
        float* f = phi.values.data() + n * FeatureStack::kCount;
        f[0] = X.data()[n];
        f[1] = mean1.data()[n];
        f[2] = mean2.data()[n];
        f[3] = grad.data()[n];
        f[4] = coord(i, s[0]);
        f[5] = coord(j, s[1]);
        f[6] = coord(k, s[2]);
      }
  return phi;
}

Volume forward(const VoxelLogisticModel& model, const FeatureStack& phi) {
  Volume prob(phi.shape, phi.spacing);
  const std::size_t n_vox = phi.voxels();
  for (std::size_t n = 0; n < n_vox; ++n) {
    const float* f = phi.at(n);
    double z = model.bias;
    for (int c = 0; c < FeatureStack::kCount; ++c) z += model.weights[c] * f[c];
    prob.data()[n] = static_cast<float>(1.0 / (1.0 + std::exp(-z)));
  }
  return prob;
}

Volume forward(const VoxelLogisticModel& model, const Volume& X) {
  return forward(model, compute_features(X));
}

double poly_lr(int it, const TrainConfig& cfg) {
  const double progress = static_cast<double>(it / cfg.lr_step) / cfg.lr_total;
  if (progress >= 1.0) return 0.0;
  return cfg.lr0 * std::pow(1.0 - progress, 0.9);
}

SupervisionResult assemble_supervision(const Volume& X, const Volume& grad, const Volume& prob,
                                       const ExtremePointSet& pts, const TrainConfig& cfg) {
  pts.validate(X.shape());
  const VoxelBox tight = tight_bbox(pts);
  const VoxelBox relax = relax_bbox(tight, cfg.margin, X.shape());

  if (cfg.supervision_mode == SupervisionMode::Naive)
    return {initial_supervision(pts, relax, X.shape()), std::nullopt};

  GeodesicConfig gcfg;
  gcfg.mode = cfg.geodesic_mode;
  GeodesicSet paths = inter_extreme_geodesics(gcfg, X, grad, &prob, pts);

  SupervisionMask mask(X.shape());
  const auto& s = X.shape();
  for (int k = 0; k < s[2]; ++k)
    for (int j = 0; j < s[1]; ++j)
      for (int i = 0; i < s[0]; ++i)
        if (!relax.contains({i, j, k}))
          mask.state[mask.index({i, j, k})] = LabelState::Background;
  for (int a = 0; a < 3; ++a)
    for (const VoxelIndex& v : paths.axis(a).voxels)
      mask.state[mask.index(v)] = LabelState::Foreground;
  for (const VoxelIndex& p : pts.points) mask.state[mask.index(p)] = LabelState::Foreground;

  return {std::move(mask), std::move(paths)};
}

PreparedCase prepare_case(const TrainCase& c) {
  PreparedCase p;
  p.id = c.id;
  p.image = normalize_intensity(c.image);
  p.grad = gradient_magnitude(p.image);
  p.features = compute_features(p.image);
  p.points = c.points;
  p.points.validate(p.image.shape());
  return p;
}

namespace {

struct ParamGrad {
  std::array<double, FeatureStack::kCount> weights{};
  double bias = 0.0;
};

/// Loss and its gradient with respect to the model parameters, chained
/// through the logistic link.
double case_loss(const VoxelLogisticModel& model, const PreparedCase& c, const TrainConfig& cfg,
                 ParamGrad* out_grad, double* out_reg) {
  const Volume prob = forward(model, c.features);
  const SupervisionResult sup = assemble_supervision(c.image, c.grad, prob, c.points, cfg);

  LossReport report = combined_loss(prob, sup.mask, cfg.gamma_focal);
  double loss = report.total;
  std::vector<double>& grad_p = report.grad;

  double reg_value = 0.0;
  if (cfg.supervision_mode == SupervisionMode::GeodesicReg) {
    const RegResult reg = regularizer(prob, c.image, cfg.reg);
    reg_value = reg.value;
    loss += cfg.lambda * reg.value;
    for (std::size_t n = 0; n < grad_p.size(); ++n) grad_p[n] += cfg.lambda * reg.grad[n];
  }
  if (out_reg) *out_reg = reg_value;

  if (out_grad) {
    for (std::size_t n = 0; n < grad_p.size(); ++n) {
      const double s = grad_p[n];
      if (s == 0.0) continue;
      const double p = prob.data()[n];
      const double d = s * p * (1.0 - p);
      const float* f = c.features.at(n);
      for (int cdx = 0; cdx < FeatureStack::kCount; ++cdx) out_grad->weights[cdx] += d * f[cdx];
      out_grad->bias += d;
    }
  }
  return loss;
}

bool finite(const ParamGrad& g) {
  if (!std::isfinite(g.bias)) return false;
  for (double w : g.weights)
    if (!std::isfinite(w)) return false;
  return true;
}

}  // namespace

StepReport train_step(TrainState& state, const PreparedCase& c, const TrainConfig& cfg) {
  ParamGrad grad;
  double reg_value = 0.0;
  const double loss = case_loss(state.model, c, cfg, &grad, &reg_value);

  if (!std::isfinite(loss) || !finite(grad))
    throw std::runtime_error("non-finite loss or gradient at iteration " +
                             std::to_string(state.iteration) + " on case '" + c.id + "'");

  const double lr = poly_lr(state.iteration, cfg);
  const double mu = cfg.momentum;
  for (int f = 0; f < FeatureStack::kCount; ++f) {
    state.velocity[f] = mu * state.velocity[f] - lr * grad.weights[f];
    state.model.weights[f] += mu * state.velocity[f] - lr * grad.weights[f];
  }
  state.velocity_bias = mu * state.velocity_bias - lr * grad.bias;
  state.model.bias += mu * state.velocity_bias - lr * grad.bias;
  ++state.iteration;

  return {loss, reg_value, lr};
}

double validation_loss(const VoxelLogisticModel& model, const std::vector<PreparedCase>& val,
                       const TrainConfig& cfg) {
  if (val.empty()) throw std::invalid_argument("empty validation set");
  double sum = 0.0;
  for (const PreparedCase& c : val) sum += case_loss(model, c, cfg, nullptr, nullptr);
  return sum / static_cast<double>(val.size());
}

TrainResult train(const std::vector<TrainCase>& train_set, const std::vector<TrainCase>& val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  if (val_set.empty()) throw std::invalid_argument("empty validation set");

  std::vector<PreparedCase> train_cases, val_cases;
  train_cases.reserve(train_set.size());
  val_cases.reserve(val_set.size());
  for (const TrainCase& c : train_set) train_cases.push_back(prepare_case(c));
  for (const TrainCase& c : val_set) val_cases.push_back(prepare_case(c));

  TrainState state;
  TrainResult result;
  const auto evaluate = [&] {
    const double v = validation_loss(state.model, val_cases, cfg);
    result.val_history.push_back(v);
    if (v < state.best_val_loss) {
      state.best_val_loss = v;
      state.best_model = state.model;
      state.best_iteration = state.iteration;
    }
  };

  evaluate();  // the initial model is a selection candidate too
  const int n_train = static_cast<int>(train_cases.size());
  for (int it = 0; it < cfg.iterations; ++it) {
    train_step(state, train_cases[static_cast<std::size_t>(it % n_train)], cfg);
    if ((it + 1) % n_train == 0 || it + 1 == cfg.iterations) evaluate();
  }

  result.model = state.best_model;
  result.best_val_loss = state.best_val_loss;
  result.best_iteration = state.best_iteration;
  return result;
}

}  // namespace exseg
