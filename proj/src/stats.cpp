#include "rankcorrect/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "rankcorrect/common.hpp"

namespace rankcorrect {

double binomial_pmf(std::int32_t n, double p, std::int32_t k) {
  require(n >= 0 && k >= 0 && k <= n, "binomial_pmf: need 0 <= k <= n");
  require(p >= 0.0 && p <= 1.0, "binomial_pmf: p out of [0,1]");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double log_coeff =
      std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_coeff + k * std::log(p) + (n - k) * std::log1p(-p));
}

double chi_square_sf(double statistic, std::int32_t dof) {
  require(dof >= 1, "chi_square_sf: dof must be >= 1");
  require(statistic >= 0.0, "chi_square_sf: statistic must be >= 0");
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> expected_probs,
                               double min_expected) {
  require(observed.size() == expected_probs.size(),
          "chi_square_gof: observed/expected size mismatch");
  require(observed.size() >= 2, "chi_square_gof: need at least 2 cells");
  std::int64_t total = 0;
  for (const auto c : observed) {
    require(c >= 0, "chi_square_gof: negative count");
    total += c;
  }
  require(total > 0, "chi_square_gof: no observations");

  std::vector<std::pair<double, double>> pooled;  // (observed, expected)
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    require(expected_probs[i] >= 0.0, "chi_square_gof: negative probability");
    obs_acc += static_cast<double>(observed[i]);
    exp_acc += expected_probs[i] * static_cast<double>(total);
    if (exp_acc >= min_expected) {
      pooled.emplace_back(obs_acc, exp_acc);
      obs_acc = 0.0;
      exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (pooled.empty()) {
      pooled.emplace_back(obs_acc, exp_acc);
    } else {
      pooled.back().first += obs_acc;
      pooled.back().second += exp_acc;
    }
  }
  require(pooled.size() >= 2, "chi_square_gof: fewer than 2 cells after pooling");

  double statistic = 0.0;
  for (const auto& [obs, exp] : pooled) {
    statistic += (obs - exp) * (obs - exp) / exp;
  }
  const auto dof = static_cast<std::int32_t>(pooled.size() - 1);
  return ChiSquareResult{statistic, dof, chi_square_sf(statistic, dof),
                         static_cast<std::int32_t>(pooled.size())};
}

SampleSummary summarize(std::span<const double> values) {
  require(!values.empty(), "summarize: empty sample");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return SampleSummary{mean, sd, sd / std::sqrt(n), values.size()};
}

}  // namespace rankcorrect
