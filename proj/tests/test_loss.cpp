#include <doctest.h>

#include <cmath>
#include <vector>

#include "rankcorrect/loss.hpp"
#include "rankcorrect/rng.hpp"

using namespace rankcorrect;

namespace {

FactorModel random_model(std::int32_t n_contexts, std::int32_t n_items,
                         std::int32_t dim, Rng& rng) {
  FactorModel m;
  m.n_contexts = n_contexts;
  m.n_items = n_items;
  m.dim = dim;
  m.context_factors.resize(static_cast<std::size_t>(n_contexts) * dim);
  m.item_factors.resize(static_cast<std::size_t>(n_items) * dim);
  for (double& x : m.context_factors) x = rng.next_gaussian();
  for (double& x : m.item_factors) x = rng.next_gaussian();
  return m;
}

// alpha * loss as a function of a single perturbed model coordinate.
double loss_at(LossKind kind, FactorModel model, ContextId c, ItemId i, ItemId j,
               double alpha, bool context_row, std::int32_t row, std::int32_t f,
               double delta) {
  if (context_row)
    model.context_row(row)[f] += delta;
  else
    model.item_row(row)[f] += delta;
  return alpha * pairwise_loss(kind, score(model, c, i), score(model, c, j));
}

}  // namespace

TEST_CASE("loss: hinge spot values") {
  CHECK(hinge_loss(2.0, 0.5) == 0.0);
  CHECK(hinge_loss(0.0, 0.0) == 1.0);
  CHECK(hinge_loss(0.2, 0.5) == 1.3);  // exact in doubles
  CHECK(hinge_loss(1.0, 0.0) == 0.0);  // margin met exactly
}

TEST_CASE("loss: logistic spot values") {
  CHECK(logistic_loss(3.0, 3.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_loss(0.0, 1.0) == doctest::Approx(1.3132616875182228).epsilon(1e-15));
  double far = logistic_loss(40.0, 0.0);
  CHECK(far > 0.0);
  CHECK(far < 1e-17);
  CHECK(far == doctest::Approx(4.248354255291589e-18).epsilon(1e-12));
}

TEST_CASE("loss: softplus is overflow-safe and satisfies its identity") {
  CHECK(std::isfinite(softplus(1000.0)));
  CHECK(softplus(1000.0) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(softplus(-1000.0) == 0.0);
  for (double x : {-20.0, -3.0, -0.5, 0.0, 0.5, 3.0, 20.0})
    CHECK(softplus(x) - softplus(-x) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("loss: both losses are nonincreasing in the score difference") {
  for (LossKind kind : {LossKind::kHingeWarp, LossKind::kLogisticLambda}) {
    double prev = pairwise_loss(kind, -5.0, 0.0);
    for (double s = -4.5; s <= 5.0; s += 0.5) {
      double cur = pairwise_loss(kind, s, 0.0);
      CHECK(cur <= prev);
      CHECK(cur >= 0.0);
      prev = cur;
    }
  }
}

TEST_CASE("loss: slope spot values") {
  CHECK(loss_slope(LossKind::kHingeWarp, 0.0, 0.0) == -1.0);
  CHECK(loss_slope(LossKind::kHingeWarp, 2.0, 0.5) == 0.0);
  CHECK(loss_slope(LossKind::kHingeWarp, 1.0, 0.0) == 0.0);  // kink: loss already 0
  CHECK(loss_slope(LossKind::kLogisticLambda, 0.0, 0.0) == -0.5);
  CHECK(loss_slope(LossKind::kLogisticLambda, 30.0, 0.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(loss_slope(LossKind::kLogisticLambda, -30.0, 0.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("loss: pair gradient fixture") {
  // dim 1, u = 1, v_i = v_j = 0, alpha = 1, logistic:
  // g = -sigmoid(0) = -0.5 -> context 0, positive -0.5, negative +0.5.
  FactorModel m;
  m.n_contexts = 1;
  m.n_items = 2;
  m.dim = 1;
  m.context_factors = {1.0};
  m.item_factors = {0.0, 0.0};
  PairGradient g = pair_gradient(LossKind::kLogisticLambda, m, 0, 0, 1, 1.0);
  CHECK(g.context == 0);
  CHECK(g.pos_item == 0);
  CHECK(g.neg_item == 1);
  REQUIRE(g.context_grad.size() == 1);
  CHECK(g.context_grad[0] == 0.0);
  CHECK(g.pos_grad[0] == -0.5);
  CHECK(g.neg_grad[0] == 0.5);
}

TEST_CASE("loss: pair gradient scales linearly in alpha") {
  Rng rng(404);
  FactorModel m = random_model(2, 4, 3, rng);
  PairGradient g1 = pair_gradient(LossKind::kLogisticLambda, m, 1, 0, 3, 1.0);
  PairGradient g2 = pair_gradient(LossKind::kLogisticLambda, m, 1, 0, 3, 2.0);
  for (std::int32_t f = 0; f < 3; ++f) {
    CHECK(g2.context_grad[f] == doctest::Approx(2.0 * g1.context_grad[f]).epsilon(1e-15));
    CHECK(g2.pos_grad[f] == doctest::Approx(2.0 * g1.pos_grad[f]).epsilon(1e-15));
    CHECK(g2.neg_grad[f] == doctest::Approx(2.0 * g1.neg_grad[f]).epsilon(1e-15));
  }
}

TEST_CASE("loss: positive and negative item gradients are opposite") {
  Rng rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    FactorModel m = random_model(3, 6, 4, rng);
    ContextId c = static_cast<ContextId>(rng.next_below(3));
    ItemId i = static_cast<ItemId>(rng.next_below(6));
    ItemId j = static_cast<ItemId>(rng.next_below(6));
    if (i == j) continue;
    for (LossKind kind : {LossKind::kHingeWarp, LossKind::kLogisticLambda}) {
      PairGradient g = pair_gradient(kind, m, c, i, j, 1.7);
      for (std::int32_t f = 0; f < 4; ++f) CHECK(g.pos_grad[f] == -g.neg_grad[f]);
    }
  }
}

TEST_CASE("loss: zero alpha produces an all-zero gradient") {
  Rng rng(606);
  FactorModel m = random_model(1, 3, 5, rng);
  PairGradient g = pair_gradient(LossKind::kHingeWarp, m, 0, 0, 1, 0.0);
  for (std::int32_t f = 0; f < 5; ++f) {
    CHECK(g.context_grad[f] == 0.0);
    CHECK(g.pos_grad[f] == 0.0);
    CHECK(g.neg_grad[f] == 0.0);
  }
}

TEST_CASE("loss: the out-parameter overload reuses buffers consistently") {
  Rng rng(707);
  FactorModel m = random_model(2, 4, 3, rng);
  PairGradient fresh = pair_gradient(LossKind::kLogisticLambda, m, 0, 1, 2, 1.3);
  PairGradient reused;
  pair_gradient(LossKind::kHingeWarp, m, 1, 3, 0, 2.0, reused);  // dirty the buffers
  pair_gradient(LossKind::kLogisticLambda, m, 0, 1, 2, 1.3, reused);
  CHECK(reused.context_grad == fresh.context_grad);
  CHECK(reused.pos_grad == fresh.pos_grad);
  CHECK(reused.neg_grad == fresh.neg_grad);
  CHECK(reused.context == fresh.context);
  CHECK(reused.pos_item == fresh.pos_item);
  CHECK(reused.neg_item == fresh.neg_item);
}

TEST_CASE("loss: analytic gradient matches central finite differences") {
  Rng rng(808);
  constexpr double kH = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    FactorModel m = random_model(2, 5, 3, rng);
    ContextId c = static_cast<ContextId>(rng.next_below(2));
    ItemId i = static_cast<ItemId>(rng.next_below(5));
    ItemId j = static_cast<ItemId>(rng.next_below(5));
    if (i == j) continue;
    double alpha = 0.25 + rng.next_double();
    for (LossKind kind : {LossKind::kHingeWarp, LossKind::kLogisticLambda}) {
      double margin = 1.0 - (score(m, c, i) - score(m, c, j));
      // the hinge kink has no two-sided derivative; skip its neighborhood.
      if (kind == LossKind::kHingeWarp && std::abs(margin) < 1e-2) continue;
      PairGradient g = pair_gradient(kind, m, c, i, j, alpha);
      for (std::int32_t f = 0; f < 3; ++f) {
        double fd_c = (loss_at(kind, m, c, i, j, alpha, true, c, f, kH) -
                       loss_at(kind, m, c, i, j, alpha, true, c, f, -kH)) /
                      (2.0 * kH);
        double fd_i = (loss_at(kind, m, c, i, j, alpha, false, i, f, kH) -
                       loss_at(kind, m, c, i, j, alpha, false, i, f, -kH)) /
                      (2.0 * kH);
        double fd_j = (loss_at(kind, m, c, i, j, alpha, false, j, f, kH) -
                       loss_at(kind, m, c, i, j, alpha, false, j, f, -kH)) /
                      (2.0 * kH);
        CHECK(g.context_grad[f] == doctest::Approx(fd_c).epsilon(1e-6).scale(1.0));
        CHECK(g.pos_grad[f] == doctest::Approx(fd_i).epsilon(1e-6).scale(1.0));
        CHECK(g.neg_grad[f] == doctest::Approx(fd_j).epsilon(1e-6).scale(1.0));
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("loss: pair gradient validates its arguments") {
  FactorModel m;
  m.n_contexts = 1;
  m.n_items = 2;
  m.dim = 1;
  m.context_factors = {1.0};
  m.item_factors = {0.0, 0.0};
  CHECK_THROWS_AS(pair_gradient(LossKind::kHingeWarp, m, 0, 0, 2, 1.0), ContractError);
  CHECK_THROWS_AS(pair_gradient(LossKind::kHingeWarp, m, 1, 0, 1, 1.0), ContractError);
  CHECK_THROWS_AS(pair_gradient(LossKind::kHingeWarp, m, 0, 0, 1, -1.0), ContractError);
}
