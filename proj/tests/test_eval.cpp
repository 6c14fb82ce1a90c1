#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rankcorrect/eval.hpp"
#include "rankcorrect/rng.hpp"

using namespace rankcorrect;

namespace {

FactorModel score_model(std::vector<double> scores) {
  FactorModel m;
  m.n_contexts = 1;
  m.n_items = static_cast<std::int32_t>(scores.size());
  m.dim = 1;
  m.context_factors = {1.0};
  m.item_factors = std::move(scores);
  return m;
}

// 3 users x 6 items with one-hot contexts, so score(c, i) = item row column c.
// u0 trains on {0}, holds out {1, 3}; u1 trains on {2}, holds out {0};
// u2 trains on {4}, holds out {5}.
struct Fixture {
  FactorModel model;
  EvalSplit split;

  Fixture()
      : split{InteractionSet(3, 6, {{0, 0}, {1, 2}, {2, 4}}), {}} {
    model.n_contexts = 3;
    model.n_items = 6;
    model.dim = 3;
    model.context_factors = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    model.item_factors = {9, 6, 9,   // item 0
                          5, 7, 8,   // item 1
                          4, 3, 7,   // item 2
                          3, 2, 5,   // item 3
                          2, 1, 4,   // item 4
                          1, 0, 6};  // item 5
    split.users = {{0, {1, 3}, Partition::kTuning},
                   {1, {0}, Partition::kTuning},
                   {2, {5}, Partition::kTuning}};
  }
};

}  // namespace

TEST_CASE("eval: recall against a top-k window") {
  std::vector<ItemId> ranked{4, 7, 1, 9, 2};
  std::vector<ItemId> holdout{1, 4, 9};  // hit at position 1 within the top 2
  CHECK(recall_at_k(ranked, holdout, 2) == 0.5);
  CHECK(recall_at_k(ranked, holdout, 4) == doctest::Approx(3.0 / 3.0));
  std::vector<ItemId> single{7};
  CHECK(recall_at_k(ranked, single, 2) == 1.0);  // denominator min(k, |holdout|) = 1
  std::vector<ItemId> miss{8};
  CHECK(recall_at_k(ranked, miss, 5) == 0.0);
}

TEST_CASE("eval: recall is nondecreasing in k") {
  std::vector<ItemId> ranked{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<ItemId> holdout{2, 5, 7};
  double prev = 0.0;
  for (std::int32_t k = 1; k <= 10; ++k) {
    double r = recall_at_k(ranked, holdout, k);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("eval: ndcg spot values") {
  // one relevant item at position 3 of the ranking, k = 3.
  std::vector<ItemId> ranked{10, 11, 5, 12};
  std::vector<ItemId> holdout{5};
  CHECK(ndcg_at_k(ranked, holdout, 3) == 0.5);  // (1/log2 4) / 1

  // two relevant items at positions 1 and 3, k = 3, |holdout| = 2.
  std::vector<ItemId> ranked2{5, 11, 6, 12};
  std::vector<ItemId> holdout2{5, 6};
  CHECK(ndcg_at_k(ranked2, holdout2, 3) ==
        doctest::Approx(0.9197207891481876).epsilon(1e-14));

  // perfect prefix -> exactly 1.
  std::vector<ItemId> ranked3{5, 6, 1, 2};
  CHECK(ndcg_at_k(ranked3, holdout2, 3) == 1.0);

  // nothing found -> 0.
  std::vector<ItemId> ranked4{1, 2, 3};
  CHECK(ndcg_at_k(ranked4, holdout2, 3) == 0.0);
}

TEST_CASE("eval: metric argument validation") {
  std::vector<ItemId> ranked{1, 2};
  std::vector<ItemId> holdout{1};
  std::vector<ItemId> empty;
  CHECK_THROWS_AS(recall_at_k(ranked, holdout, 0), ContractError);
  CHECK_THROWS_AS(recall_at_k(ranked, empty, 2), ContractError);
  CHECK_THROWS_AS(ndcg_at_k(ranked, holdout, 0), ContractError);
  CHECK_THROWS_AS(ndcg_at_k(ranked, empty, 2), ContractError);
}

TEST_CASE("eval: candidates are ranked by score with id tie-break") {
  FactorModel m = score_model({2.0, 7.0, 7.0, 1.0, 9.0});
  InteractionSet train(1, 5, std::vector<Interaction>{});
  std::vector<ItemId> ranked = rank_candidates(m, 0, train);
  CHECK(ranked == std::vector<ItemId>{4, 1, 2, 0, 3});
}

TEST_CASE("eval: candidates exclude the context's training items") {
  FactorModel m = score_model({5.0, 4.0, 3.0, 2.0});
  InteractionSet train(1, 4, {{0, 0}, {0, 2}});
  std::vector<ItemId> ranked = rank_candidates(m, 0, train);
  CHECK(ranked == std::vector<ItemId>{1, 3});
}

TEST_CASE("eval: three-user fixture reproduces frozen means") {
  Fixture fx;
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {2};
  cutoffs.ndcg_at = {3};
  EvalReport report = evaluate(fx.model, fx.split, Partition::kTuning, cutoffs);
  CHECK(report.n_users == 3);
  // per user: recall@2 = 0.5, 1.0, 0.0; ndcg@3 = 0.91972..., 0.63092..., 0.
  CHECK(report.recall_at(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(report.ndcg_at(3) == doctest::Approx(0.5168835142398817).epsilon(1e-12));
}

TEST_CASE("eval: fixture per-user rankings are as designed") {
  Fixture fx;
  CHECK(rank_candidates(fx.model, 0, fx.split.train) ==
        std::vector<ItemId>{1, 2, 3, 4, 5});
  CHECK(rank_candidates(fx.model, 1, fx.split.train) ==
        std::vector<ItemId>{1, 0, 3, 4, 5});
  CHECK(rank_candidates(fx.model, 2, fx.split.train) ==
        std::vector<ItemId>{0, 1, 2, 5, 3});
}

TEST_CASE("eval: a perfect model scores 1 on every metric") {
  FactorModel m;
  m.n_contexts = 2;
  m.n_items = 4;
  m.dim = 2;
  m.context_factors = {1, 0, 0, 1};
  m.item_factors = {9, 1,   // item 0: u0 train
                    5, 0,   // item 1: u0 holdout
                    1, 9,   // item 2: u1 train
                    0, 5};  // item 3: u1 holdout
  EvalSplit split{InteractionSet(2, 4, {{0, 0}, {1, 2}}),
                  {{0, {1}, Partition::kTuning}, {1, {3}, Partition::kTest}}};
  split.validate();
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {1, 2};
  cutoffs.ndcg_at = {2};
  for (Partition p : {Partition::kTuning, Partition::kTest}) {
    EvalReport report = evaluate(m, split, p, cutoffs);
    CHECK(report.n_users == 1);
    CHECK(report.recall_at(1) == 1.0);
    CHECK(report.recall_at(2) == 1.0);
    CHECK(report.ndcg_at(2) == 1.0);
  }
}

TEST_CASE("eval: a worst-case model scores 0 at small cutoffs") {
  // holdout item ranked dead last among candidates.
  FactorModel m = score_model({1.0, 5.0, 4.0, 3.0, 2.0});
  EvalSplit split{InteractionSet(1, 5, {{0, 1}}), {{0, {0}, Partition::kTuning}}};
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {3};
  cutoffs.ndcg_at = {3};
  EvalReport report = evaluate(m, split, Partition::kTuning, cutoffs);
  CHECK(report.recall_at(3) == 0.0);
  CHECK(report.ndcg_at(3) == 0.0);
}

TEST_CASE("eval: metrics are invariant under monotone score transforms") {
  Rng rng(1234);
  std::vector<double> scores(20);
  for (double& s : scores) s = rng.next_gaussian();
  FactorModel a = score_model(scores);
  for (double& s : scores) s = 3.0 * std::tanh(s) + 5.0;  // strictly increasing map
  FactorModel b = score_model(std::move(scores));

  EvalSplit split{InteractionSet(1, 20, {{0, 3}, {0, 8}}),
                  {{0, {1, 5, 11}, Partition::kTuning}}};
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {2, 5, 10};
  cutoffs.ndcg_at = {5, 10};
  EvalReport ra = evaluate(a, split, Partition::kTuning, cutoffs);
  EvalReport rb = evaluate(b, split, Partition::kTuning, cutoffs);
  CHECK(rank_candidates(a, 0, split.train) == rank_candidates(b, 0, split.train));
  CHECK(ra.recall == rb.recall);
  CHECK(ra.ndcg == rb.ndcg);
}

TEST_CASE("eval: metrics match a brute-force oracle on random models") {
  Rng rng(9090);
  for (int trial = 0; trial < 25; ++trial) {
    FactorModel m;
    m.n_contexts = 3;
    m.n_items = 15;
    m.dim = 4;
    m.context_factors.resize(12);
    m.item_factors.resize(60);
    for (double& x : m.context_factors) x = rng.next_gaussian();
    for (double& x : m.item_factors) x = rng.next_gaussian();

    ContextId c = static_cast<ContextId>(rng.next_below(3));
    InteractionSet train(3, 15, {{c, static_cast<ItemId>(rng.next_below(15))}});
    std::vector<ItemId> holdout;
    for (ItemId i = 0; i < 15; ++i)
      if (!train.contains(c, i) && rng.next_below(4) == 0) holdout.push_back(i);
    if (holdout.empty()) continue;

    std::vector<ItemId> ranked = rank_candidates(m, c, train);

    // oracle: stable order by (-score, id), then walk the prefix.
    std::vector<ItemId> expect;
    for (ItemId i = 0; i < 15; ++i)
      if (!train.contains(c, i)) expect.push_back(i);
    std::sort(expect.begin(), expect.end(), [&](ItemId x, ItemId y) {
      double sx = score(m, c, x);
      double sy = score(m, c, y);
      return sx != sy ? sx > sy : x < y;
    });
    REQUIRE(ranked == expect);

    for (std::int32_t k : {1, 3, 7, 20}) {
      std::int32_t hits = 0;
      double dcg = 0.0;
      for (std::size_t p = 0; p < ranked.size() && p < static_cast<std::size_t>(k); ++p)
        if (std::binary_search(holdout.begin(), holdout.end(), ranked[p])) {
          ++hits;
          dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
        }
      double idcg = 0.0;
      std::size_t ideal = std::min<std::size_t>(k, holdout.size());
      for (std::size_t p = 0; p < ideal; ++p)
        idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
      double want_recall =
          static_cast<double>(hits) /
          static_cast<double>(std::min<std::size_t>(k, holdout.size()));
      CHECK(recall_at_k(ranked, holdout, k) == want_recall);
      CHECK(ndcg_at_k(ranked, holdout, k) == dcg / idcg);
    }
  }
}

TEST_CASE("eval: evaluate respects the partition filter") {
  Fixture fx;
  fx.split.users[1].partition = Partition::kTest;
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {2};
  cutoffs.ndcg_at = {3};
  EvalReport tuning = evaluate(fx.model, fx.split, Partition::kTuning, cutoffs);
  EvalReport test = evaluate(fx.model, fx.split, Partition::kTest, cutoffs);
  CHECK(tuning.n_users == 2);
  CHECK(test.n_users == 1);
  CHECK(test.recall_at(2) == 1.0);  // u1 alone
  CHECK(tuning.recall_at(2) == 0.25);  // (0.5 + 0) / 2
}

TEST_CASE("eval: users with empty holdout are skipped") {
  Fixture fx;
  fx.split.users.push_back({1, {}, Partition::kTuning});
  MetricCutoffs cutoffs;
  cutoffs.recall_at = {2};
  cutoffs.ndcg_at = {3};
  EvalReport report = evaluate(fx.model, fx.split, Partition::kTuning, cutoffs);
  CHECK(report.n_users == 3);  // the empty user does not count
}

TEST_CASE("eval: an empty partition yields an empty report") {
  Fixture fx;
  EvalReport report = evaluate(fx.model, fx.split, Partition::kTest);
  CHECK(report.n_users == 0);
  for (const auto& [k, v] : report.recall) CHECK(v == 0.0);
}

TEST_CASE("eval: evaluate rejects a mismatched model") {
  Fixture fx;
  FactorModel small = fx.model;
  small.n_items = 5;
  small.item_factors.resize(15);
  CHECK_THROWS_AS(evaluate(small, fx.split, Partition::kTuning), ContractError);
}

TEST_CASE("eval: split validation catches malformed splits") {
  EvalSplit split{InteractionSet(2, 4, {{0, 0}, {1, 2}}),
                  {{0, {1}, Partition::kTuning}, {1, {3}, Partition::kTest}}};
  CHECK_NOTHROW(split.validate());

  SUBCASE("unsorted holdout") {
    split.users[0].holdout = {3, 1};
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("duplicate holdout item") {
    split.users[0].holdout = {1, 1};
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("holdout overlaps train") {
    split.users[0].holdout = {0, 1};
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("empty holdout") {
    split.users[0].holdout = {};
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("context out of range") {
    split.users[0].context = 9;
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("holdout item out of range") {
    split.users[0].holdout = {1, 99};
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
  SUBCASE("eval user without training items") {
    EvalSplit orphan{InteractionSet(2, 4, {{1, 2}}),
                     {{0, {1}, Partition::kTuning}, {1, {3}, Partition::kTest}}};
    CHECK_THROWS_AS(orphan.validate(), ContractError);
  }
  SUBCASE("partitions too lopsided") {
    split.users[1].partition = Partition::kTuning;
    split.users.push_back({1, {3}, Partition::kTuning});
    CHECK_THROWS_AS(split.validate(), ContractError);
  }
}
