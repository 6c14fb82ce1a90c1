#include "rankcorrect/sampling.hpp"

#include <algorithm>
#include <unordered_map>

namespace rankcorrect {

std::vector<Interaction> sample_positive_batch(const InteractionSet& data,
                                               std::int32_t k, Rng& rng) {
  require(k >= 1, "sample_positive_batch: k must be >= 1");
  require(!data.empty(), "sample_positive_batch: empty dataset");
  const auto entries = data.entries();
  std::vector<Interaction> batch;
  batch.reserve(static_cast<std::size_t>(k));
  for (std::int32_t t = 0; t < k; ++t) {
    batch.push_back(entries[rng.next_below(entries.size())]);
  }
  return batch;
}

std::vector<ItemId> sample_negative_items(std::int32_t n, std::int32_t m,
                                          ReplacementMode mode, Rng& rng) {
  require(n >= 1, "sample_negative_items: n must be >= 1");
  require(m >= 1, "sample_negative_items: m must be >= 1");
  std::vector<ItemId> items;
  items.reserve(static_cast<std::size_t>(m));
  if (mode == ReplacementMode::kWith) {
    for (std::int32_t t = 0; t < m; ++t) {
      items.push_back(static_cast<ItemId>(rng.next_below(static_cast<std::uint64_t>(n))));
    }
    return items;
  }
  require(m <= n, "sample_negative_items: m > n without replacement");
  // Sparse partial Fisher-Yates: only displaced positions are materialized.
  std::unordered_map<std::int32_t, ItemId> displaced;
  for (std::int32_t t = 0; t < m; ++t) {
    const auto pick = static_cast<std::int32_t>(
        t + rng.next_below(static_cast<std::uint64_t>(n - t)));
    const auto at = [&](std::int32_t pos) {
      const auto it = displaced.find(pos);
      return it == displaced.end() ? static_cast<ItemId>(pos) : it->second;
    };
    const ItemId value = at(pick);
    displaced[pick] = at(t);
    items.push_back(value);
  }
  return items;
}

RejectionOutcome warp_rejection_sample(const FactorModel& model, ContextId c,
                                       ItemId i, LossKind loss,
                                       std::int32_t max_trials, Rng& rng) {
  require(max_trials >= 1, "warp_rejection_sample: max_trials must be >= 1");
  require(i >= 0 && i < model.n_items, "warp_rejection_sample: item id out of range");
  require(model.n_items >= 2, "warp_rejection_sample: need at least one negative");
  const double s_pos = score(model, c, i);
  for (std::int32_t trial = 1; trial <= max_trials; ++trial) {
    ItemId j;
    do {
      j = static_cast<ItemId>(rng.next_below(static_cast<std::uint64_t>(model.n_items)));
    } while (j == i);
    if (pairwise_loss(loss, s_pos, score(model, c, j)) > 0.0) {
      return RejectionOutcome{true, j, trial};
    }
  }
  return RejectionOutcome{false, -1, max_trials};
}

std::int32_t warp_rank_from_trials(std::int32_t n, std::int32_t trials) {
  require(n >= 2, "warp_rank_from_trials: n must be >= 2");
  require(trials >= 1, "warp_rank_from_trials: trials must be >= 1");
  return std::max(1, (n - 1) / trials);
}

}  // namespace rankcorrect
