#pragma once

// Pairwise hinge and logistic losses on score differences, and the weighted
// per-pair gradient over the three embedding rows a pair touches.

#include <vector>

#include "rankcorrect/core.hpp"

namespace rankcorrect {

// Selects both the pairwise loss and its companion update weighting:
// hinge with harmonic rank weights (WARP), or logistic with NDCG-discount
// difference weights (LambdaRank).
enum class LossKind { kHingeWarp, kLogisticLambda };

// ln(1 + exp(x)), overflow-safe.
double softplus(double x);

// max(0, 1 - (s_i - s_j)).
double hinge_loss(double s_i, double s_j);

// -ln sigmoid(s_i - s_j) = softplus(-(s_i - s_j)).
double logistic_loss(double s_i, double s_j);

double pairwise_loss(LossKind kind, double s_i, double s_j);

// g = dl/d(s_i - s_j). Hinge: -1 while the margin is violated, else 0.
// Logistic: -sigmoid(-(s_i - s_j)).
double loss_slope(LossKind kind, double s_i, double s_j);

// alpha * dl/dtheta restricted to the rows of (c, i, j). The weight alpha is
// treated as a constant and never differentiated.
struct PairGradient {
  ContextId context = 0;
  ItemId pos_item = 0;
  ItemId neg_item = 0;
  std::vector<double> context_grad;  // alpha * g * (v_i - v_j)
  std::vector<double> pos_grad;      // alpha * g * u_c
  std::vector<double> neg_grad;      // -alpha * g * u_c
};

// Fills `out`, reusing its buffers.
void pair_gradient(LossKind kind, const FactorModel& model, ContextId c, ItemId i,
                   ItemId j, double alpha, PairGradient& out);

PairGradient pair_gradient(LossKind kind, const FactorModel& model, ContextId c,
                           ItemId i, ItemId j, double alpha);

}  // namespace rankcorrect
