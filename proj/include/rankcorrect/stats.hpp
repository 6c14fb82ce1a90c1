#pragma once

// Small statistics kit backing the Monte-Carlo validation of the rank
// estimator: binomial pmf, chi-square goodness of fit, sample summaries.

#include <cstdint>
#include <span>
#include <vector>

namespace rankcorrect {

// P[X = k] for X ~ Binomial(n, p), computed in log space.
double binomial_pmf(std::int32_t n, double p, std::int32_t k);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double statistic, std::int32_t dof);

struct ChiSquareResult {
  double statistic;
  std::int32_t dof;       // pooled bins - 1
  double p_value;
  std::int32_t n_pooled;  // bins after pooling
};

// Pearson goodness-of-fit of observed counts against expected cell
// probabilities. Adjacent cells are pooled left to right until each pooled
// cell has expected count >= min_expected (a trailing light pool is merged
// backwards). No parameters are estimated from the data.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> expected_probs,
                               double min_expected = 5.0);

struct SampleSummary {
  double mean;
  double sd;  // unbiased
  double se;  // sd / sqrt(n)
  std::size_t n;
};

SampleSummary summarize(std::span<const double> values);

}  // namespace rankcorrect
