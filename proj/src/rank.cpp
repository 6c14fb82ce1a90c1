#include "rankcorrect/rank.hpp"

#include <cmath>

namespace rankcorrect {

std::int32_t true_rank(const FactorModel& model, ContextId c, ItemId i,
                       const ItemCatalog& catalog) {
  require(catalog.n_items == model.n_items, "true_rank: catalog/model size mismatch");
  const double target = score(model, c, i);
  std::int32_t above = 0;
  for (ItemId j = 0; j < catalog.n_items; ++j) {
    if (score(model, c, j) > target) ++above;
  }
  return above + 1;
}

std::int32_t sampled_rank(const FactorModel& model, ContextId c, ItemId i,
                          std::span<const ItemId> sample) {
  require(!sample.empty(), "sampled_rank: sample must be nonempty");
  const double target = score(model, c, i);
  std::int32_t above = 0;
  for (const ItemId j : sample) {
    if (score(model, c, j) > target) ++above;
  }
  return above + 1;
}

RankEstimate correct_rank(std::int32_t sampled_rank, std::int32_t m, std::int32_t n,
                          RankCorrection correction) {
  require(m >= 1, "correct_rank: sample size must be >= 1");
  require(n >= 2, "correct_rank: catalog size must be >= 2");
  require(sampled_rank >= 1 && sampled_rank <= m + 1,
          "correct_rank: sampled rank out of [1, m+1]");
  const double p_hat = static_cast<double>(sampled_rank - 1) / m;
  const double estimate = correction == RankCorrection::kCorrected
                              ? 1.0 + p_hat * (n - 1)
                              : static_cast<double>(sampled_rank);
  return RankEstimate{sampled_rank, m, n, p_hat, estimate};
}

double ndcg_discount(double rank) {
  require(rank >= 1.0, "ndcg_discount: rank must be >= 1");
  return 1.0 / std::log2(rank + 1.0);
}

double warp_weight(double rank) {
  require(rank >= 1.0, "warp_weight: rank must be >= 1");
  const auto r = static_cast<std::int64_t>(rank);  // floor for rank >= 1
  double sum = 0.0;
  for (std::int64_t k = 1; k <= r; ++k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

double lambda_weight(double rank_i, double rank_j) {
  return std::abs(ndcg_discount(rank_i) - ndcg_discount(rank_j));
}

}  // namespace rankcorrect
