#include "rankcorrect/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rankcorrect/log.hpp"

namespace rankcorrect {

void TrainConfig::validate() const {
  require(eta >= 0.0 && std::isfinite(eta), "TrainConfig: eta must be finite and >= 0");
  require(l2 >= 0.0 && std::isfinite(l2), "TrainConfig: l2 must be finite and >= 0");
  require(k >= 1, "TrainConfig: k must be >= 1");
  require(m >= 1, "TrainConfig: m must be >= 1");
  require(dim >= 1, "TrainConfig: dim must be >= 1");
  require(epochs >= 1, "TrainConfig: epochs must be >= 1");
  require(max_trials >= 1, "TrainConfig: max_trials must be >= 1");
  require(eval_every >= 1, "TrainConfig: eval_every must be >= 1");
  require(early_stop_patience >= 0, "TrainConfig: patience must be >= 0");
}

void GradientAccumulator::add(const PairGradient& grad) {
  const auto is_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  // An all-zero pair gradient marks no rows, so inactive pairs neither
  // update nor decay anything.
  if (is_zero(grad.context_grad) && is_zero(grad.pos_grad) && is_zero(grad.neg_grad)) {
    return;
  }
  const auto add_into = [this](std::vector<double>& row, const std::vector<double>& g) {
    row.resize(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t f = 0; f < g.size(); ++f) row[f] += g[f];
  };
  add_into(context_rows_[grad.context], grad.context_grad);
  add_into(item_rows_[grad.pos_item], grad.pos_grad);
  add_into(item_rows_[grad.neg_item], grad.neg_grad);
}

namespace {

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void quantize_model(FactorModel& model) {
  for (auto& v : model.context_factors) v = quantize_f32(v);
  for (auto& v : model.item_factors) v = quantize_f32(v);
}

std::int32_t count_above(std::span<const double> scores, double target) {
  std::int32_t above = 0;
  for (const double s : scores) {
    if (s > target) ++above;
  }
  return above;
}

RankEstimate negative_estimate_from_scores(std::span<const double> neg_scores,
                                           std::size_t index, std::int32_t n,
                                           RankCorrection correction) {
  // The entry at `index` is the negative itself; it never scores strictly
  // above itself, so counting over the whole sample equals counting over the
  // sample minus that entry. The informative sample size is m - 1.
  const auto m = static_cast<std::int32_t>(neg_scores.size());
  if (m == 1) {
    // No other draws: no rank information, estimate stays at the top.
    return RankEstimate{1, 0, n, 0.0, 1.0};
  }
  const std::int32_t r = count_above(neg_scores, neg_scores[index]) + 1;
  return correct_rank(r, m - 1, n, correction);
}

struct EpochStats {
  double weighted_loss_sum = 0.0;
  std::int64_t pairs = 0;
};

void run_iterative_epoch(FactorModel& model, const InteractionSet& data,
                         const ItemCatalog& catalog, const TrainConfig& config,
                         Rng& rng, EpochStats& stats) {
  const auto entries = data.entries();
  const auto n = static_cast<std::uint64_t>(catalog.n_items);
  PairGradient grad;
  for (std::size_t step = 0; step < entries.size(); ++step) {
    const auto [c, i] = entries[rng.next_below(entries.size())];
    ItemId j = -1;
    double alpha = 0.0;
    if (config.loss == LossKind::kHingeWarp) {
      const auto outcome =
          warp_rejection_sample(model, c, i, config.loss, config.max_trials, rng);
      if (!outcome.accepted) continue;  // budget exhausted: discard the step
      j = outcome.item;
      alpha = warp_weight(warp_rank_from_trials(catalog.n_items, outcome.trials));
    } else {
      do {
        j = static_cast<ItemId>(rng.next_below(n));
      } while (j == i);
      alpha = lambda_weight(true_rank(model, c, i, catalog),
                            true_rank(model, c, j, catalog));
    }
    stats.weighted_loss_sum +=
        alpha * pairwise_loss(config.loss, score(model, c, i), score(model, c, j));
    stats.pairs += 1;

    pair_gradient(config.loss, model, c, i, j, alpha, grad);
    GradientAccumulator acc(model.dim);
    acc.add(grad);
    apply_step(model, acc, config.eta, config.l2, config.precision);
  }
}

void run_batched_epoch(FactorModel& model, const InteractionSet& data,
                       const ItemCatalog& catalog, const TrainConfig& config,
                       Rng& rng, EpochStats& stats, StepTrace* trace) {
  const std::int32_t n = catalog.n_items;
  const std::size_t steps =
      (data.size() + static_cast<std::size_t>(config.k) - 1) /
      static_cast<std::size_t>(config.k);
  PairGradient grad;
  std::vector<double> neg_scores(static_cast<std::size_t>(config.m));

  for (std::size_t step = 0; step < steps; ++step) {
    const auto positives = sample_positive_batch(data, config.k, rng);
    const auto negatives = sample_negative_items(n, config.m, config.replacement, rng);
    if (trace != nullptr) {
      trace->positives = positives;
      trace->negatives = negatives;
    }

    GradientAccumulator acc(model.dim);
    // Accumulation order is fixed: positives-major, negatives-minor.
    for (const auto& [c, i] : positives) {
      const double s_pos = score(model, c, i);
      for (std::size_t t = 0; t < negatives.size(); ++t) {
        neg_scores[t] = score(model, c, negatives[t]);
      }
      const auto est_i =
          correct_rank(count_above(neg_scores, s_pos) + 1, config.m, n, config.correction);

      for (std::size_t t = 0; t < negatives.size(); ++t) {
        const ItemId j = negatives[t];
        if (j == i) continue;  // a positive drawn as its own negative
        double alpha = 0.0;
        RankEstimate est_j{0, 0, n, 0.0, 0.0};
        if (config.loss == LossKind::kHingeWarp) {
          alpha = warp_weight(est_i.estimated_rank);
        } else {
          est_j = negative_estimate_from_scores(neg_scores, t, n, config.correction);
          alpha = lambda_weight(est_i.estimated_rank, est_j.estimated_rank);
        }
        const double loss = pairwise_loss(config.loss, s_pos, neg_scores[t]);
        stats.weighted_loss_sum += alpha * loss;
        stats.pairs += 1;
        if (trace != nullptr) {
          trace->pairs.push_back(PairTrace{c, i, j, est_i.sampled_rank,
                                           est_i.estimated_rank, est_j.sampled_rank,
                                           est_j.estimated_rank, alpha, loss});
        }
        if (alpha == 0.0) continue;
        if (config.loss == LossKind::kHingeWarp && s_pos - neg_scores[t] >= 1.0) {
          continue;  // inactive hinge: zero slope
        }
        pair_gradient(config.loss, model, c, i, j, alpha, grad);
        acc.add(grad);
      }
    }
    apply_step(model, acc, config.eta, config.l2, config.precision);
    trace = nullptr;  // only the first step is traced
  }
}

TrainResult train_impl(const InteractionSet& data, const ItemCatalog& catalog,
                       const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  require(data.n_items() == catalog.n_items, "train: data/catalog item count mismatch");
  require(!data.empty(), "train: empty training set");

  FactorModel model;
  if (hooks.initial_model != nullptr) {
    require(hooks.initial_model->n_contexts == data.n_contexts() &&
                hooks.initial_model->n_items == catalog.n_items &&
                hooks.initial_model->dim == config.dim,
            "train: initial model shape mismatch");
    model = *hooks.initial_model;
  } else {
    model = init_model(data.n_contexts(), catalog.n_items, config.dim,
                       derive_seed(config.seed, kStreamModelInit));
  }
  if (config.precision == Precision::kFloat32) quantize_model(model);
  require(model.all_finite(), "train: non-finite initial model");

  Rng rng(derive_seed(config.seed, kStreamTraining));
  TrainReport report;
  FactorModel best_model = model;
  std::vector<double> tuning_history;
  StepTrace* trace = hooks.first_step_trace;

  for (std::int32_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats stats;
    if (config.algorithm == Algorithm::kIterative) {
      run_iterative_epoch(model, data, catalog, config, rng, stats);
    } else {
      run_batched_epoch(model, data, catalog, config, rng, stats, trace);
      trace = nullptr;
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    const double loss_mean =
        stats.pairs > 0 ? stats.weighted_loss_sum / static_cast<double>(stats.pairs) : 0.0;
    report.epoch_loss_mean.push_back(loss_mean);
    report.epoch_wall_ms.push_back(wall_ms);
    report.epochs_run = epoch;

    const bool eval_due = hooks.tuning_split != nullptr &&
                          (epoch % config.eval_every == 0 || epoch == config.epochs);
    if (!eval_due) continue;
    EvalPoint point{epoch, loss_mean,
                    evaluate(model, *hooks.tuning_split, Partition::kTuning), wall_ms};
    report.evals.push_back(point);
    if (hooks.on_eval) hooks.on_eval(point);

    tuning_history.push_back(point.report.ndcg_at(100));
    const auto decision = early_stop(tuning_history, config.early_stop_patience);
    if (decision.best_index + 1 == tuning_history.size()) {
      best_model = model;
      report.best_epoch = epoch;
      report.best_metric = tuning_history.back();
    }
    if (config.early_stop_patience > 0 && decision.stop) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  if (report.stop_reason.empty()) report.stop_reason = "epoch_budget";

  const bool return_best =
      config.early_stop_patience > 0 && hooks.tuning_split != nullptr &&
      report.best_epoch > 0;
  return TrainResult{return_best ? std::move(best_model) : std::move(model),
                     std::move(report)};
}

}  // namespace

void apply_step(FactorModel& model, const GradientAccumulator& grads, double eta,
                double l2, Precision precision) {
  require(grads.dim() == model.dim, "apply_step: gradient/model dim mismatch");
  const auto update_row = [&](std::span<double> row, const std::vector<double>& g,
                              const char* what, std::int64_t id) {
    for (std::size_t f = 0; f < g.size(); ++f) {
      if (!std::isfinite(g[f])) {
        throw std::runtime_error("apply_step: non-finite gradient in " +
                                 std::string(what) + " row " + std::to_string(id) +
                                 ", component " + std::to_string(f));
      }
      row[f] -= eta * (g[f] + l2 * row[f]);
      if (precision == Precision::kFloat32) row[f] = quantize_f32(row[f]);
    }
  };
  for (const auto& [c, g] : grads.context_rows()) {
    require(c >= 0 && c < model.n_contexts, "apply_step: context row out of range");
    update_row(model.context_row(c), g, "context", c);
  }
  for (const auto& [i, g] : grads.item_rows()) {
    require(i >= 0 && i < model.n_items, "apply_step: item row out of range");
    update_row(model.item_row(i), g, "item", i);
  }
}

EarlyStopDecision early_stop(std::span<const double> history, std::int32_t patience) {
  require(!history.empty(), "early_stop: empty history");
  require(patience >= 0, "early_stop: patience must be >= 0");
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[best]) best = i;
  }
  const bool stop = history.size() - 1 - best >= static_cast<std::size_t>(patience);
  return EarlyStopDecision{stop, best};
}

RankEstimate positive_rank_estimate(const FactorModel& model, ContextId c, ItemId i,
                                    std::span<const ItemId> negatives,
                                    RankCorrection correction) {
  const std::int32_t r = sampled_rank(model, c, i, negatives);
  return correct_rank(r, static_cast<std::int32_t>(negatives.size()), model.n_items,
                      correction);
}

RankEstimate negative_rank_estimate(const FactorModel& model, ContextId c, ItemId j,
                                    std::span<const ItemId> negatives,
                                    RankCorrection correction) {
  require(!negatives.empty(), "negative_rank_estimate: empty sample");
  std::vector<double> scores;
  scores.reserve(negatives.size());
  std::size_t index = negatives.size();
  for (std::size_t t = 0; t < negatives.size(); ++t) {
    scores.push_back(score(model, c, negatives[t]));
    if (negatives[t] == j && index == negatives.size()) index = t;
  }
  require(index < negatives.size(), "negative_rank_estimate: j not in the sample");
  return negative_estimate_from_scores(scores, index, model.n_items, correction);
}

TrainResult train(const InteractionSet& data, const ItemCatalog& catalog,
                  const TrainConfig& config, const TrainHooks& hooks) {
  return train_impl(data, catalog, config, hooks);
}

TrainResult train_iterative(const InteractionSet& data, const ItemCatalog& catalog,
                            const TrainConfig& config, const TrainHooks& hooks) {
  require(config.algorithm == Algorithm::kIterative,
          "train_iterative: config.algorithm mismatch");
  return train_impl(data, catalog, config, hooks);
}

TrainResult train_batched(const InteractionSet& data, const ItemCatalog& catalog,
                          const TrainConfig& config, const TrainHooks& hooks) {
  require(config.algorithm == Algorithm::kBatched,
          "train_batched: config.algorithm mismatch");
  return train_impl(data, catalog, config, hooks);
}

}  // namespace rankcorrect
