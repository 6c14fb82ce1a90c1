#pragma once

// Held-out evaluation: per-user Recall@k and NDCG@k over the full catalog,
// averaged across the tuning or test user partition.

#include <map>
#include <span>
#include <vector>

#include "rankcorrect/core.hpp"

namespace rankcorrect {

enum class Partition { kTuning, kTest };

struct EvalUser {
  ContextId context;
  std::vector<ItemId> holdout;  // sorted ascending
  Partition partition;
};

struct EvalSplit {
  InteractionSet train;
  std::vector<EvalUser> users;

  // Checks holdout/train disjointness, nonempty sides, near-equal partitions.
  void validate() const;
};

struct MetricCutoffs {
  std::vector<std::int32_t> recall_at{20, 50};
  std::vector<std::int32_t> ndcg_at{100};
};

struct EvalReport {
  std::map<std::int32_t, double> recall;  // cutoff -> mean over users
  std::map<std::int32_t, double> ndcg;
  std::size_t n_users = 0;

  double recall_at(std::int32_t k) const { return recall.at(k); }
  double ndcg_at(std::int32_t k) const { return ndcg.at(k); }
};

// |top-k of ranked ∩ holdout| / min(k, |holdout|). The ranked list must
// already exclude the user's training items.
double recall_at_k(std::span<const ItemId> ranked, std::span<const ItemId> holdout,
                   std::int32_t k);

// Binary-gain DCG@k with 1/log2(pos+1) discounts (1-based positions),
// normalized by the ideal DCG of min(k, |holdout|) leading hits.
double ndcg_at_k(std::span<const ItemId> ranked, std::span<const ItemId> holdout,
                 std::int32_t k);

// Catalog items ranked by descending score for one context, ties broken by
// ascending item id, with that user's training items removed.
std::vector<ItemId> rank_candidates(const FactorModel& model, ContextId c,
                                    const InteractionSet& train);

EvalReport evaluate(const FactorModel& model, const EvalSplit& split,
                    Partition partition, const MetricCutoffs& cutoffs = {});

}  // namespace rankcorrect
