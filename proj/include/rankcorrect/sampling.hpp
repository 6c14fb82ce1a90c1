#pragma once

// Reproducible sampling of positive batches, uniform negative items, and
// WARP's rejection sampler with trial counting.

#include <vector>

#include "rankcorrect/core.hpp"
#include "rankcorrect/loss.hpp"
#include "rankcorrect/rng.hpp"

namespace rankcorrect {

enum class ReplacementMode { kWith, kWithout };

struct SampledBatch {
  std::vector<Interaction> positives;  // length k
  std::vector<ItemId> negatives;       // length m
  ReplacementMode replacement;
};

struct RejectionOutcome {
  bool accepted;
  ItemId item;         // valid when accepted
  std::int32_t trials; // draws consumed; equals max_trials when exhausted
};

// k entries drawn uniformly with replacement from the observation set.
std::vector<Interaction> sample_positive_batch(const InteractionSet& data,
                                               std::int32_t k, Rng& rng);

// m uniform draws from 0..n-1. Without replacement uses a sparse partial
// Fisher-Yates, so the result is pairwise distinct and requires m <= n.
std::vector<ItemId> sample_negative_items(std::int32_t n, std::int32_t m,
                                          ReplacementMode mode, Rng& rng);

// Draw candidates uniformly from the catalog minus {i} (resampling on a
// collision with i) until one has positive pairwise loss against i, or the
// trial budget runs out.
RejectionOutcome warp_rejection_sample(const FactorModel& model, ContextId c,
                                       ItemId i, LossKind loss,
                                       std::int32_t max_trials, Rng& rng);

// Classic rank estimate from the rejection trial count: max(1, floor((n-1)/trials)).
std::int32_t warp_rank_from_trials(std::int32_t n, std::int32_t trials);

}  // namespace rankcorrect
