#include "rankcorrect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "rankcorrect/log.hpp"

namespace rankcorrect {

void EvalSplit::validate() const {
  std::size_t tuning = 0;
  std::size_t test = 0;
  for (const auto& user : users) {
    require(user.context >= 0 && user.context < train.n_contexts(),
            "EvalSplit: user context out of range");
    require(!user.holdout.empty(), "EvalSplit: user with empty holdout");
    require(std::is_sorted(user.holdout.begin(), user.holdout.end()),
            "EvalSplit: holdout not sorted");
    require(std::adjacent_find(user.holdout.begin(), user.holdout.end()) ==
                user.holdout.end(),
            "EvalSplit: duplicate holdout item");
    require(!train.items_of(user.context).empty(),
            "EvalSplit: eval user has no training items");
    for (const ItemId i : user.holdout) {
      require(i >= 0 && i < train.n_items(), "EvalSplit: holdout item out of range");
      require(!train.contains(user.context, i),
              "EvalSplit: holdout item also present in train");
    }
    (user.partition == Partition::kTuning ? tuning : test) += 1;
  }
  const auto diff = static_cast<std::int64_t>(tuning) - static_cast<std::int64_t>(test);
  require(std::abs(diff) <= 1, "EvalSplit: tuning/test sizes differ by more than 1");
}

namespace {

bool in_holdout(std::span<const ItemId> holdout, ItemId i) {
  return std::binary_search(holdout.begin(), holdout.end(), i);
}

}  // namespace

double recall_at_k(std::span<const ItemId> ranked, std::span<const ItemId> holdout,
                   std::int32_t k) {
  require(k >= 1, "recall_at_k: k must be >= 1");
  require(!holdout.empty(), "recall_at_k: empty holdout");
  const std::size_t top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  std::int32_t hits = 0;
  for (std::size_t p = 0; p < top; ++p) {
    if (in_holdout(holdout, ranked[p])) ++hits;
  }
  const auto denom = std::min<std::size_t>(static_cast<std::size_t>(k), holdout.size());
  return static_cast<double>(hits) / static_cast<double>(denom);
}

double ndcg_at_k(std::span<const ItemId> ranked, std::span<const ItemId> holdout,
                 std::int32_t k) {
  require(k >= 1, "ndcg_at_k: k must be >= 1");
  require(!holdout.empty(), "ndcg_at_k: empty holdout");
  const std::size_t top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t p = 0; p < top; ++p) {
    if (in_holdout(holdout, ranked[p])) {
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
  }
  const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), holdout.size());
  double idcg = 0.0;
  for (std::size_t p = 0; p < ideal; ++p) {
    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  return dcg / idcg;
}

std::vector<ItemId> rank_candidates(const FactorModel& model, ContextId c,
                                    const InteractionSet& train) {
  const auto scores = score_all(model, c);
  std::vector<ItemId> order(static_cast<std::size_t>(model.n_items));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  std::vector<ItemId> candidates;
  candidates.reserve(order.size());
  for (const ItemId i : order) {
    if (!train.contains(c, i)) candidates.push_back(i);
  }
  return candidates;
}

EvalReport evaluate(const FactorModel& model, const EvalSplit& split,
                    Partition partition, const MetricCutoffs& cutoffs) {
  require(model.n_contexts == split.train.n_contexts() &&
              model.n_items == split.train.n_items(),
          "evaluate: model does not cover the split");
  EvalReport report;
  for (const std::int32_t k : cutoffs.recall_at) report.recall[k] = 0.0;
  for (const std::int32_t k : cutoffs.ndcg_at) report.ndcg[k] = 0.0;

  for (const auto& user : split.users) {
    if (user.partition != partition) continue;
    if (user.holdout.empty()) {
      log::warn("evaluate: skipping user " + std::to_string(user.context) +
                " with empty holdout");
      continue;
    }
    const auto ranked = rank_candidates(model, user.context, split.train);
    for (const std::int32_t k : cutoffs.recall_at) {
      report.recall[k] += recall_at_k(ranked, user.holdout, k);
    }
    for (const std::int32_t k : cutoffs.ndcg_at) {
      report.ndcg[k] += ndcg_at_k(ranked, user.holdout, k);
    }
    ++report.n_users;
  }
  if (report.n_users > 0) {
    for (auto& [k, v] : report.recall) v /= static_cast<double>(report.n_users);
    for (auto& [k, v] : report.ndcg) v /= static_cast<double>(report.n_users);
  }
  return report;
}

}  // namespace rankcorrect
