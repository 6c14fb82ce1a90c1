#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rankcorrect/common.hpp"
#include "rankcorrect/stats.hpp"

using namespace rankcorrect;

// independently computed references (scipy.stats) appear as literals below.

TEST_CASE("stats: binomial pmf spot values") {
  CHECK(binomial_pmf(10, 0.3, 3) == doctest::Approx(0.26682793199999977).epsilon(1e-12));
  CHECK(binomial_pmf(50, 0.1, 5) == doctest::Approx(0.1849246008952154).epsilon(1e-12));
  CHECK(binomial_pmf(7, 0.5, 2) == doctest::Approx(21.0 / 128.0).epsilon(1e-13));
  CHECK(binomial_pmf(100, 100.0 / 999.0, 10) ==
        doctest::Approx(0.131864613208996).epsilon(1e-12));
  CHECK(binomial_pmf(100, 100.0 / 999.0, 0) ==
        doctest::Approx(2.6267597365664104e-05).epsilon(1e-12));
  // deep tail still finite and relatively accurate.
  CHECK(binomial_pmf(100, 100.0 / 999.0, 100) ==
        doctest::Approx(1.1052262148715708e-100).epsilon(1e-10));
}

TEST_CASE("stats: binomial pmf degenerate probabilities") {
  CHECK(binomial_pmf(5, 0.0, 0) == 1.0);
  CHECK(binomial_pmf(5, 0.0, 2) == 0.0);
  CHECK(binomial_pmf(5, 1.0, 5) == 1.0);
  CHECK(binomial_pmf(5, 1.0, 3) == 0.0);
  CHECK(binomial_pmf(0, 0.5, 0) == 1.0);
}

TEST_CASE("stats: binomial pmf sums to one") {
  for (double p : {0.05, 0.3, 0.77}) {
    double sum = 0.0;
    for (std::int32_t k = 0; k <= 40; ++k) sum += binomial_pmf(40, p, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("stats: binomial pmf validates arguments") {
  CHECK_THROWS_AS(binomial_pmf(5, 0.5, 6), ContractError);
  CHECK_THROWS_AS(binomial_pmf(5, 0.5, -1), ContractError);
  CHECK_THROWS_AS(binomial_pmf(5, 1.5, 2), ContractError);
  CHECK_THROWS_AS(binomial_pmf(5, -0.1, 2), ContractError);
}

TEST_CASE("stats: chi-square survival function spot values") {
  CHECK(chi_square_sf(3.84, 1) == doctest::Approx(0.05004352124870519).epsilon(1e-12));
  CHECK(chi_square_sf(10.0, 5) == doctest::Approx(0.07523524614651217).epsilon(1e-12));
  CHECK(chi_square_sf(25.0, 10) == doctest::Approx(0.005345505487134069).epsilon(1e-12));
  CHECK(chi_square_sf(0.0, 3) == 1.0);
  CHECK(chi_square_sf(100.0, 2) ==
        doctest::Approx(1.9287498479639183e-22).epsilon(1e-10));
}

TEST_CASE("stats: chi-square survival function is monotone") {
  double prev = 1.0;
  for (double s = 0.5; s < 40.0; s += 0.5) {
    double v = chi_square_sf(s, 4);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), ContractError);
  CHECK_THROWS_AS(chi_square_sf(-1.0, 2), ContractError);
}

TEST_CASE("stats: goodness of fit pools light cells left to right") {
  // expected counts 2, 4, 44, 50 -> pools {0,1}, {2}, {3}.
  std::vector<std::int64_t> obs{3, 4, 43, 50};
  std::vector<double> probs{0.02, 0.04, 0.44, 0.5};
  ChiSquareResult r = chi_square_gof(obs, probs);
  CHECK(r.n_pooled == 3);
  CHECK(r.dof == 2);
  CHECK(r.statistic == doctest::Approx(0.1893939393939394).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.9096485437810087).epsilon(1e-12));
}

TEST_CASE("stats: goodness of fit merges a light tail backwards") {
  // expected counts 50, 44, 4, 2: the trailing 4+2 pool joins cell 2.
  std::vector<std::int64_t> obs{50, 43, 4, 3};
  std::vector<double> probs{0.5, 0.44, 0.04, 0.02};
  ChiSquareResult r = chi_square_gof(obs, probs);
  CHECK(r.n_pooled == 3);
  CHECK(r.dof == 2);
  CHECK(r.statistic == doctest::Approx(0.1893939393939394).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.9096485437810087).epsilon(1e-12));
}

TEST_CASE("stats: goodness of fit accepts its own expectation") {
  // observed exactly equal to expected -> statistic 0, p-value 1.
  std::vector<std::int64_t> obs{10, 20, 30, 40};
  std::vector<double> probs{0.1, 0.2, 0.3, 0.4};
  ChiSquareResult r = chi_square_gof(obs, probs);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.n_pooled == 4);
  CHECK(r.dof == 3);
}

TEST_CASE("stats: goodness of fit rejects a gross mismatch") {
  std::vector<std::int64_t> obs{100, 0, 0, 100};
  std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  ChiSquareResult r = chi_square_gof(obs, probs);
  CHECK(r.p_value < 1e-6);
}

TEST_CASE("stats: goodness of fit respects min_expected") {
  std::vector<std::int64_t> obs{5, 5, 5, 5};
  std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  // min_expected 10 forces pooling into pairs of cells.
  ChiSquareResult r = chi_square_gof(obs, probs, 10.0);
  CHECK(r.n_pooled == 2);
  CHECK(r.dof == 1);
  CHECK(r.statistic == 0.0);
}

TEST_CASE("stats: goodness of fit validates inputs") {
  std::vector<std::int64_t> obs{1, 2};
  std::vector<double> probs3{0.2, 0.3, 0.5};
  CHECK_THROWS_AS(chi_square_gof(obs, probs3), ContractError);

  std::vector<std::int64_t> one{5};
  std::vector<double> pone{1.0};
  CHECK_THROWS_AS(chi_square_gof(one, pone), ContractError);

  std::vector<std::int64_t> zeros{0, 0};
  std::vector<double> ptwo{0.5, 0.5};
  CHECK_THROWS_AS(chi_square_gof(zeros, ptwo), ContractError);

  std::vector<std::int64_t> neg{-1, 3};
  CHECK_THROWS_AS(chi_square_gof(neg, ptwo), ContractError);

  // everything pools into one cell -> no test possible.
  std::vector<std::int64_t> tiny{1, 1};
  CHECK_THROWS_AS(chi_square_gof(tiny, ptwo), ContractError);
}

TEST_CASE("stats: summarize fixture") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  SampleSummary s = summarize(x);
  CHECK(s.n == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(1.2909944487358056).epsilon(1e-14));
  CHECK(s.se == doctest::Approx(0.6454972243679028).epsilon(1e-14));
}

TEST_CASE("stats: summarize edge cases") {
  std::vector<double> single{7.5};
  SampleSummary s = summarize(single);
  CHECK(s.mean == 7.5);
  CHECK(s.sd == 0.0);
  CHECK(s.se == 0.0);
  CHECK(s.n == 1);

  std::vector<double> constant{3.0, 3.0, 3.0};
  SampleSummary c = summarize(constant);
  CHECK(c.mean == 3.0);
  CHECK(c.sd == 0.0);

  std::vector<double> empty;
  CHECK_THROWS_AS(summarize(empty), ContractError);
}
