#pragma once

// True and sampled item ranks, the binomial correction that maps a sampled
// rank back to a full-catalog estimate, and the rank-dependent update
// weights used by WARP and LambdaRank.

#include <span>

#include "rankcorrect/core.hpp"

namespace rankcorrect {

enum class RankCorrection { kNone, kCorrected };

struct RankEstimate {
  std::int32_t sampled_rank;  // r-tilde in [1, m+1]
  std::int32_t sample_size;   // m
  std::int32_t catalog_size;  // n
  double p_hat;               // (sampled_rank - 1) / m
  double estimated_rank;      // corrected: 1 + p_hat * (n - 1); else sampled_rank
};

// Rank of item i over the full catalog: 1 + |{j : score(c,j) > score(c,i)}|.
// Ties do not increase the rank.
std::int32_t true_rank(const FactorModel& model, ContextId c, ItemId i,
                       const ItemCatalog& catalog);

// Rank of item i within a sampled negative set; duplicates each count.
std::int32_t sampled_rank(const FactorModel& model, ContextId c, ItemId i,
                          std::span<const ItemId> sample);

// Full-catalog rank estimate from a sampled rank. With kNone the sampled
// rank passes through unchanged (the "without correction" training arm);
// p_hat is reported either way.
RankEstimate correct_rank(std::int32_t sampled_rank, std::int32_t m, std::int32_t n,
                          RankCorrection correction = RankCorrection::kCorrected);

// 1 / log2(rank + 1); accepts real-valued (corrected) ranks.
double ndcg_discount(double rank);

// Harmonic number of floor(rank): sum_{r=1}^{floor(rank)} 1/r.
double warp_weight(double rank);

// |ndcg_discount(rank_i) - ndcg_discount(rank_j)|.
double lambda_weight(double rank_i, double rank_j);

}  // namespace rankcorrect
