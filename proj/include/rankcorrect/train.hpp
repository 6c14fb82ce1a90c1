#pragma once

// SGD training of the factorization model: iterative pairwise WARP /
// LambdaRank, and the sampled-batch variant that estimates ranks within the
// negative sample (optionally corrected to full-catalog estimates).

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankcorrect/eval.hpp"
#include "rankcorrect/loss.hpp"
#include "rankcorrect/rank.hpp"
#include "rankcorrect/sampling.hpp"

namespace rankcorrect {

enum class Algorithm { kIterative, kBatched };
enum class Precision { kFloat64, kFloat32 };

struct TrainConfig {
  LossKind loss = LossKind::kLogisticLambda;
  Algorithm algorithm = Algorithm::kBatched;
  RankCorrection correction = RankCorrection::kCorrected;
  std::int32_t k = 32;            // positives per batch
  std::int32_t m = 64;            // negatives per batch
  double eta = 0.05;              // learning rate; 0 is a legal no-op run
  double l2 = 0.0;                // row-wise L2 coefficient
  std::int32_t dim = 32;
  std::int32_t epochs = 20;
  std::int32_t max_trials = 100;  // WARP rejection budget
  std::uint64_t seed = 1;
  ReplacementMode replacement = ReplacementMode::kWith;
  std::int32_t eval_every = 1;          // epochs between tuning evaluations
  std::int32_t early_stop_patience = 0; // 0 disables early stopping
  Precision precision = Precision::kFloat64;

  void validate() const;
};

struct EvalPoint {
  std::int32_t epoch;
  double loss_mean;   // mean weighted pair loss alpha*l over the epoch
  EvalReport report;
  double wall_ms;     // timestamp-like; excluded from determinism checks
};

struct TrainReport {
  std::vector<double> epoch_loss_mean;
  std::vector<double> epoch_wall_ms;
  std::vector<EvalPoint> evals;
  std::int32_t epochs_run = 0;
  std::int32_t best_epoch = -1;  // epoch of the best tuning NDCG, when evaluated
  double best_metric = 0.0;
  std::string stop_reason;
};

// Instrumentation of one batched step, for verifying the correction-mode
// contract (identical streams, alphas differing only through rank estimates).
struct PairTrace {
  ContextId context;
  ItemId pos_item;
  ItemId neg_item;
  std::int32_t pos_sampled_rank;
  double pos_rank_estimate;
  std::int32_t neg_sampled_rank;
  double neg_rank_estimate;  // 0 for WARP (unused)
  double alpha;
  double loss;
};

struct StepTrace {
  std::vector<Interaction> positives;
  std::vector<ItemId> negatives;
  std::vector<PairTrace> pairs;
};

struct TrainHooks {
  const EvalSplit* tuning_split = nullptr;   // enables evals and early stopping
  const FactorModel* initial_model = nullptr;  // overrides the seeded init
  std::function<void(const EvalPoint&)> on_eval;
  StepTrace* first_step_trace = nullptr;     // batched only: captures step 1
};

struct TrainResult {
  FactorModel model;
  TrainReport report;
};

// Dispatches on config.algorithm.
TrainResult train(const InteractionSet& data, const ItemCatalog& catalog,
                  const TrainConfig& config, const TrainHooks& hooks = {});

TrainResult train_iterative(const InteractionSet& data, const ItemCatalog& catalog,
                            const TrainConfig& config, const TrainHooks& hooks = {});

TrainResult train_batched(const InteractionSet& data, const ItemCatalog& catalog,
                          const TrainConfig& config, const TrainHooks& hooks = {});

// Gradient sum over the pairs of one step. A row counts as touched only if
// some pair contributed a nonzero weighted slope to it, so margin-satisfied
// batches decay nothing.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(std::int32_t dim) : dim_(dim) {}

  void add(const PairGradient& grad);
  bool empty() const { return context_rows_.empty() && item_rows_.empty(); }
  std::int32_t dim() const { return dim_; }

  // Deterministic iteration: ascending row id.
  const std::map<ContextId, std::vector<double>>& context_rows() const {
    return context_rows_;
  }
  const std::map<ItemId, std::vector<double>>& item_rows() const { return item_rows_; }

 private:
  std::int32_t dim_;
  std::map<ContextId, std::vector<double>> context_rows_;
  std::map<ItemId, std::vector<double>> item_rows_;
};

// row <- row - eta * (grad + l2 * row) for each touched row. Float32
// precision additionally rounds updated entries through float storage.
void apply_step(FactorModel& model, const GradientAccumulator& grads, double eta,
                double l2, Precision precision = Precision::kFloat64);

struct EarlyStopDecision {
  bool stop;
  std::size_t best_index;  // argmax of the history (first maximum)
};

// Stop once `patience` consecutive evaluations failed to improve on the best.
EarlyStopDecision early_stop(std::span<const double> history, std::int32_t patience);

// The batched trainer's rank-estimation path, exposed for verification.
// The positive's rank uses the whole sample (size m); a negative's rank uses
// the sample minus itself (size m-1), falling back to rank 1 when m == 1.
RankEstimate positive_rank_estimate(const FactorModel& model, ContextId c, ItemId i,
                                    std::span<const ItemId> negatives,
                                    RankCorrection correction);
RankEstimate negative_rank_estimate(const FactorModel& model, ContextId c, ItemId j,
                                    std::span<const ItemId> negatives,
                                    RankCorrection correction);

}  // namespace rankcorrect
