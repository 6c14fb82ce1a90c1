#include "rankcorrect/loss.hpp"

#include <algorithm>
#include <cmath>

namespace rankcorrect {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double hinge_loss(double s_i, double s_j) {
  require(std::isfinite(s_i) && std::isfinite(s_j), "hinge_loss: non-finite score");
  return std::max(0.0, 1.0 - (s_i - s_j));
}

double logistic_loss(double s_i, double s_j) {
  require(std::isfinite(s_i) && std::isfinite(s_j), "logistic_loss: non-finite score");
  return softplus(-(s_i - s_j));
}

double pairwise_loss(LossKind kind, double s_i, double s_j) {
  return kind == LossKind::kHingeWarp ? hinge_loss(s_i, s_j) : logistic_loss(s_i, s_j);
}

double loss_slope(LossKind kind, double s_i, double s_j) {
  const double x = s_i - s_j;
  if (kind == LossKind::kHingeWarp) {
    return 1.0 - x > 0.0 ? -1.0 : 0.0;
  }
  // d/dx softplus(-x) = -sigmoid(-x)
  return -1.0 / (1.0 + std::exp(x));
}

void pair_gradient(LossKind kind, const FactorModel& model, ContextId c, ItemId i,
                   ItemId j, double alpha, PairGradient& out) {
  require(std::isfinite(alpha) && alpha >= 0.0, "pair_gradient: alpha must be finite and >= 0");
  require(i >= 0 && i < model.n_items && j >= 0 && j < model.n_items,
          "pair_gradient: item id out of range");
  const double g = alpha * loss_slope(kind, score(model, c, i), score(model, c, j));
  const auto u = model.context_row(c);
  const auto vi = model.item_row(i);
  const auto vj = model.item_row(j);
  const auto d = static_cast<std::size_t>(model.dim);

  out.context = c;
  out.pos_item = i;
  out.neg_item = j;
  out.context_grad.resize(d);
  out.pos_grad.resize(d);
  out.neg_grad.resize(d);
  for (std::size_t f = 0; f < d; ++f) {
    out.context_grad[f] = g * (vi[f] - vj[f]);
    out.pos_grad[f] = g * u[f];
    out.neg_grad[f] = -g * u[f];
  }
}

PairGradient pair_gradient(LossKind kind, const FactorModel& model, ContextId c,
                           ItemId i, ItemId j, double alpha) {
  PairGradient out;
  pair_gradient(kind, model, c, i, j, alpha, out);
  return out;
}

}  // namespace rankcorrect
