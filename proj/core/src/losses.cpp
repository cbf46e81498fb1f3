#include "exseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exseg {

namespace {

constexpr double kProbEps = 1e-7;
constexpr double kDiceEps = 1.0;

void check_inputs(const Volume& prob, const SupervisionMask& mask) {
  if (prob.shape() != mask.shape)
    throw std::invalid_argument("probability/mask shape mismatch");
}

std::size_t annotated_count(const SupervisionMask& mask) {
  std::size_t n = 0;
  for (const auto s : mask.state)
    if (s != LabelState::Unlabeled) ++n;
  if (n == 0) throw std::runtime_error("empty supervision");
  return n;
}

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

}  // namespace

LossValueGrad partial_cross_entropy(const Volume& prob, const SupervisionMask& mask) {
  check_inputs(prob, mask);
  const std::size_t n_ann = annotated_count(mask);
  const double inv = 1.0 / static_cast<double>(n_ann);

  LossValueGrad out;
  out.grad.assign(prob.size(), 0.0);
  double sum = 0.0;
  for (std::size_t n = 0; n < prob.size(); ++n) {
    const auto s = mask.state[n];
    if (s == LabelState::Unlabeled) continue;
    const double p = clamp_prob(prob.data()[n]);
    if (s == LabelState::Foreground) {
      sum -= std::log(p);
      out.grad[n] = -inv / p;
    } else {
      sum -= std::log(1.0 - p);
      out.grad[n] = inv / (1.0 - p);
    }
  }
  out.value = sum * inv;
  return out;
}

LossValueGrad partial_soft_dice(const Volume& prob, const SupervisionMask& mask) {
  check_inputs(prob, mask);
  annotated_count(mask);

  double sum_py = 0.0, sum_p = 0.0, sum_y = 0.0;
  for (std::size_t n = 0; n < prob.size(); ++n) {
    const auto s = mask.state[n];
    if (s == LabelState::Unlabeled) continue;
    const double p = prob.data()[n];
    sum_p += p;
    if (s == LabelState::Foreground) {
      sum_py += p;
      sum_y += 1.0;
    }
  }
  const double num = 2.0 * sum_py + kDiceEps;
  const double den = sum_p + sum_y + kDiceEps;

  LossValueGrad out;
  out.value = 1.0 - num / den;
  out.grad.assign(prob.size(), 0.0);
  for (std::size_t n = 0; n < prob.size(); ++n) {
    const auto s = mask.state[n];
    if (s == LabelState::Unlabeled) continue;
    const double y = s == LabelState::Foreground ? 1.0 : 0.0;
    out.grad[n] = -(2.0 * y * den - num) / (den * den);
  }
  return out;
}

LossValueGrad partial_class_balanced_focal(const Volume& prob, const SupervisionMask& mask,
                                           double gamma_focal) {
  check_inputs(prob, mask);
  if (gamma_focal < 0.0) throw std::invalid_argument("focal exponent must be >= 0");
  const std::size_t n_ann = annotated_count(mask);
  const std::size_t n_fg = mask.count(LabelState::Foreground);
  const std::size_t n_bg = n_ann - n_fg;
  const double alpha_fg = n_fg > 0 ? static_cast<double>(n_ann) / (2.0 * n_fg) : 0.0;
  const double alpha_bg = n_bg > 0 ? static_cast<double>(n_ann) / (2.0 * n_bg) : 0.0;
  const double inv = 1.0 / static_cast<double>(n_ann);

  LossValueGrad out;
  out.grad.assign(prob.size(), 0.0);
  double sum = 0.0;
  for (std::size_t n = 0; n < prob.size(); ++n) {
    const auto s = mask.state[n];
    if (s == LabelState::Unlabeled) continue;
    const bool fg = s == LabelState::Foreground;
    const double alpha = fg ? alpha_fg : alpha_bg;
    if (alpha == 0.0) continue;
    const double pt = clamp_prob(fg ? prob.data()[n] : 1.0 - prob.data()[n]);
    const double one_minus = 1.0 - pt;
    const double mod = std::pow(one_minus, gamma_focal);
    sum += alpha * mod * (-std::log(pt));
    // d/dp_t of (1-p_t)^g (-log p_t), then chain through p_t = p or 1-p.
    double dpt = -mod / pt;
    if (gamma_focal > 0.0)
      dpt += gamma_focal * std::pow(one_minus, gamma_focal - 1.0) * std::log(pt);
    out.grad[n] = alpha * dpt * (fg ? 1.0 : -1.0) * inv;
  }
  out.value = sum * inv;
  return out;
}

LossReport combined_loss(const Volume& prob, const SupervisionMask& mask, double gamma_focal) {
  const LossValueGrad ce = partial_cross_entropy(prob, mask);
  const LossValueGrad dice = partial_soft_dice(prob, mask);
  const LossValueGrad focal = partial_class_balanced_focal(prob, mask, gamma_focal);

  LossReport rep;
  rep.ce = ce.value;
  rep.dice = dice.value;
  rep.focal = focal.value;
  rep.total = ce.value + dice.value + focal.value;
  rep.grad.assign(prob.size(), 0.0);
  for (std::size_t n = 0; n < prob.size(); ++n)
    rep.grad[n] = ce.grad[n] + dice.grad[n] + focal.grad[n];
  return rep;
}

}  // namespace exseg
