#include "rankcorrect/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankcorrect/binary_io.hpp"
#include "rankcorrect/data.hpp"
#include "rankcorrect/log.hpp"
#include "rankcorrect/stats.hpp"
#include "rankcorrect/train.hpp"

namespace rankcorrect::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hex_u64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::int64_t unix_ms_now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// Every subcommand drops a manifest next to its outputs: artifact list, the
// effective config, and a hash of that config for provenance. The timestamp
// is confined to its own field so the rest of the manifest is reproducible.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    const json& config, const std::vector<std::string>& artifacts) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["config_hash"] = hex_u64(detail::fnv1a64(config.dump()));
  manifest["artifacts"] = artifacts;
  manifest["created_unix_ms"] = unix_ms_now();
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
  require(!out.empty(), "--out must not be empty");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// prep

struct PrepArgs {
  std::string input;
  std::string format = "csv";
  std::string out;
  bool force = false;
  bool synthetic = false;
  bool has_rating_threshold = false;
  double rating_threshold = 0.0;
  PrepConfig config;
};

PrepConfig effective_prep_config(const PrepArgs& args) {
  PrepConfig config = args.config;
  if (args.has_rating_threshold) config.rating_threshold = args.rating_threshold;
  if (!args.synthetic) config.synthetic = SyntheticConfig{};
  return config;
}

json prep_config_json(const PrepArgs& args, const PrepConfig& config) {
  json j;
  j["input"] = args.input;
  j["format"] = args.format;
  j["synthetic"] = args.synthetic;
  j["min_user_interactions"] = config.min_user_interactions;
  j["min_item_interactions"] = config.min_item_interactions;
  if (config.rating_threshold) {
    j["rating_threshold"] = *config.rating_threshold;
  } else {
    j["rating_threshold"] = nullptr;
  }
  j["holdout_fraction"] = config.holdout_fraction;
  j["eval_users"] = config.n_eval_users;
  j["split_seed"] = config.split_seed;
  if (args.synthetic) {
    j["synth_users"] = config.synthetic.n_users;
    j["synth_items"] = config.synthetic.n_items;
    j["synth_dim"] = config.synthetic.dim;
    j["synth_top"] = config.synthetic.top_items;
    j["synth_seed"] = config.synthetic.seed;
  }
  return j;
}

int cmd_prep(const PrepArgs& args) {
  if (!args.synthetic && args.input.empty()) {
    // Reported as a usage problem: the flag set is incomplete.
    std::fprintf(stderr, "prep: either --input or --synthetic is required\n");
    return 2;
  }
  const PrepConfig config = effective_prep_config(args);
  config.validate();

  const fs::path out_dir = prepare_out_dir(args.out);
  const fs::path cache_path = out_dir / "cache.bin";

  if (fs::exists(cache_path)) {
    bool valid = false;
    std::uint64_t found_hash = 0;
    try {
      found_hash = load_cache(cache_path.string()).config_hash;
      valid = true;
    } catch (const std::exception& e) {
      log::warn(std::string("prep: existing cache is unreadable, rebuilding (") +
                e.what() + ")");
    }
    if (valid && !args.force) {
      if (found_hash == config.hash()) {
        std::printf("prep: cache up to date: %s\n", cache_path.string().c_str());
        return 0;
      }
      std::fprintf(stderr,
                   "prep: %s was built with a different config; pass --force to rebuild\n",
                   cache_path.string().c_str());
      return 1;
    }
  }

  PreparedData data = [&] {
    if (args.synthetic) return prepare_synthetic(config);
    const LogFormat format = args.format == "tsv" ? LogFormat::kTsv : LogFormat::kCsv;
    const auto raw = load_interactions(args.input, format);
    return prepare(raw, config);
  }();
  save_cache(data, cache_path.string());

  std::size_t n_holdout = 0;
  std::size_t n_tuning = 0;
  for (const auto& user : data.split.users) {
    n_holdout += user.holdout.size();
    if (user.partition == Partition::kTuning) ++n_tuning;
  }
  std::printf("users              %d\n", data.split.train.n_contexts());
  std::printf("items              %d\n", data.catalog.n_items);
  std::printf("train interactions %zu\n", data.split.train.size());
  std::printf("eval users         %zu (tuning %zu, test %zu)\n",
              data.split.users.size(), n_tuning, data.split.users.size() - n_tuning);
  std::printf("held-out           %zu\n", n_holdout);

  write_manifest(out_dir, "prep", prep_config_json(args, config), {"cache.bin"});
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string cache;
  std::string out;
  std::string algorithm = "batched";
  std::string loss = "lambdarank";
  std::string correction = "corrected";
  std::string replacement = "with";
  std::string precision = "f64";
  TrainConfig config;
  // Flags whose presence matters for warnings.
  bool correction_given = false;
  bool m_given = false;
  bool k_given = false;
};

TrainConfig effective_train_config(const TrainArgs& args) {
  TrainConfig config = args.config;
  config.algorithm =
      args.algorithm == "iterative" ? Algorithm::kIterative : Algorithm::kBatched;
  config.loss =
      args.loss == "warp" ? LossKind::kHingeWarp : LossKind::kLogisticLambda;
  config.correction = args.correction == "none" ? RankCorrection::kNone
                                                : RankCorrection::kCorrected;
  config.replacement = args.replacement == "without" ? ReplacementMode::kWithout
                                                     : ReplacementMode::kWith;
  config.precision =
      args.precision == "f32" ? Precision::kFloat32 : Precision::kFloat64;
  return config;
}

json train_config_json(const TrainArgs& args, const TrainConfig& config,
                       std::uint64_t cache_hash) {
  json j;
  j["cache"] = args.cache;
  j["cache_config_hash"] = hex_u64(cache_hash);
  j["algorithm"] = args.algorithm;
  j["loss"] = args.loss;
  j["correction"] = args.correction;
  j["replacement"] = args.replacement;
  j["precision"] = args.precision;
  j["k"] = config.k;
  j["m"] = config.m;
  j["eta"] = config.eta;
  j["l2"] = config.l2;
  j["dim"] = config.dim;
  j["epochs"] = config.epochs;
  j["max_trials"] = config.max_trials;
  j["seed"] = config.seed;
  j["eval_every"] = config.eval_every;
  j["patience"] = config.early_stop_patience;
  return j;
}

json eval_point_json(const EvalPoint& point) {
  json j;
  j["epoch"] = point.epoch;
  j["loss_mean"] = point.loss_mean;
  j["recall20"] = point.report.recall_at(20);
  j["recall50"] = point.report.recall_at(50);
  j["ndcg100"] = point.report.ndcg_at(100);
  j["wall_ms"] = point.wall_ms;
  return j;
}

int cmd_train(const TrainArgs& args) {
  const TrainConfig config = effective_train_config(args);
  config.validate();
  if (config.algorithm == Algorithm::kIterative) {
    if (args.correction_given) {
      log::warn("train: --correction applies to batched ranks only; "
                "the iterative algorithm ignores it");
    }
    if (args.m_given) log::warn("train: --m is ignored by the iterative algorithm");
    if (args.k_given) log::warn("train: --k is ignored by the iterative algorithm");
  }

  const PreparedData data = load_cache(args.cache);
  const fs::path out_dir = prepare_out_dir(args.out);

  std::ofstream train_log(out_dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!train_log) throw IoError("cannot open train_log.jsonl under " + args.out);
  const json config_json = train_config_json(args, config, data.config_hash);
  {
    json header = config_json;
    header["type"] = "config";
    train_log << header.dump() << "\n";
  }

  TrainHooks hooks;
  hooks.tuning_split = &data.split;
  hooks.on_eval = [&](const EvalPoint& point) {
    train_log << eval_point_json(point).dump() << "\n";
    log::info("epoch " + std::to_string(point.epoch) +
              " loss_mean=" + fmt_double(point.loss_mean) +
              " tuning ndcg@100=" + fmt_double(point.report.ndcg_at(100)));
  };

  const TrainResult result = train(data.split.train, data.catalog, config, hooks);
  train_log.flush();
  if (!train_log) throw IoError("failed writing train_log.jsonl under " + args.out);
  save_model(result.model, (out_dir / "model.ckpt").string());

  require(!result.report.evals.empty(), "train: no evaluation points recorded");
  const EvalPoint& last = result.report.evals.back();
  std::printf("stop_reason  %s\n", result.report.stop_reason.c_str());
  std::printf("epochs_run   %d\n", result.report.epochs_run);
  if (result.report.best_epoch > 0) {
    std::printf("best_epoch   %d (tuning ndcg@100 %s)\n", result.report.best_epoch,
                fmt_double(result.report.best_metric).c_str());
  }
  std::printf("tuning recall@20  %s\n", fmt_double(last.report.recall_at(20)).c_str());
  std::printf("tuning recall@50  %s\n", fmt_double(last.report.recall_at(50)).c_str());
  std::printf("tuning ndcg@100   %s\n", fmt_double(last.report.ndcg_at(100)).c_str());

  write_manifest(out_dir, "train", config_json, {"model.ckpt", "train_log.jsonl"});
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string cache;
  std::string checkpoint;
  std::string partition = "test";
  std::string out;
  std::vector<std::int32_t> recall_at{20, 50};
  std::vector<std::int32_t> ndcg_at{100};
};

int cmd_eval(const EvalArgs& args) {
  const PreparedData data = load_cache(args.cache);
  const FactorModel model = load_model(args.checkpoint);
  require(model.n_contexts == data.split.train.n_contexts() &&
              model.n_items == data.catalog.n_items,
          "eval: model/cache dimension mismatch");

  MetricCutoffs cutoffs;
  cutoffs.recall_at = args.recall_at;
  cutoffs.ndcg_at = args.ndcg_at;
  const Partition partition =
      args.partition == "tuning" ? Partition::kTuning : Partition::kTest;
  const EvalReport report = evaluate(model, data.split, partition, cutoffs);

  std::string text;
  text += "checkpoint = " + args.checkpoint + "\n";
  text += "cache = " + args.cache + "\n";
  text += "partition = " + args.partition + "\n";
  text += "n_users = " + std::to_string(report.n_users) + "\n";
  for (const auto& [k, v] : report.recall) {
    text += "recall@" + std::to_string(k) + " = " + fmt_double(v) + "\n";
  }
  for (const auto& [k, v] : report.ndcg) {
    text += "ndcg@" + std::to_string(k) + " = " + fmt_double(v) + "\n";
  }
  std::fputs(text.c_str(), stdout);

  const fs::path out_dir = prepare_out_dir(args.out);
  write_text_file(out_dir / "eval_report.txt", text);

  json config_json;
  config_json["cache"] = args.cache;
  config_json["checkpoint"] = args.checkpoint;
  config_json["partition"] = args.partition;
  config_json["recall_at"] = args.recall_at;
  config_json["ndcg_at"] = args.ndcg_at;
  write_manifest(out_dir, "eval", config_json, {"eval_report.txt"});
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::int32_t n = 1000;
  std::int32_t true_rank = 1;
  std::int32_t m = 50;
  std::int64_t trials = 10000;
  std::string mode = "with";
  std::uint64_t seed = 1;
  std::string out;
};

// One context, one-dimensional embeddings: item 0 is the target with score 0,
// true_rank-1 items score +1, the rest score -1.
FactorModel plant_model(std::int32_t n, std::int32_t true_rank) {
  FactorModel model;
  model.n_contexts = 1;
  model.n_items = n;
  model.dim = 1;
  model.context_factors = {1.0};
  model.item_factors.assign(static_cast<std::size_t>(n), -1.0);
  model.item_factors[0] = 0.0;
  for (std::int32_t i = 1; i < true_rank; ++i) {
    model.item_factors[static_cast<std::size_t>(i)] = 1.0;
  }
  return model;
}

int cmd_simulate(const SimulateArgs& args) {
  require(args.n >= 2, "simulate: --n must be >= 2");
  require(args.true_rank >= 1 && args.true_rank <= args.n,
          "simulate: --true-rank must lie in [1, n]");
  require(args.m >= 1, "simulate: --m must be >= 1");
  require(args.trials >= 1, "simulate: --trials must be >= 1");
  const ReplacementMode mode =
      args.mode == "without" ? ReplacementMode::kWithout : ReplacementMode::kWith;
  if (mode == ReplacementMode::kWithout) {
    require(args.m <= args.n - 1, "simulate: without replacement needs m <= n-1");
  }

  const FactorModel model = plant_model(args.n, args.true_rank);
  require(true_rank(model, 0, 0, ItemCatalog(args.n)) == args.true_rank,
          "simulate: planted configuration failed its own rank check");

  Rng rng(derive_seed(args.seed, kStreamSimulate));
  std::vector<std::int64_t> hist(static_cast<std::size_t>(args.m) + 1, 0);
  std::vector<double> sampled(static_cast<std::size_t>(args.trials));
  std::vector<double> estimated(static_cast<std::size_t>(args.trials));
  std::vector<ItemId> negatives;
  for (std::int64_t t = 0; t < args.trials; ++t) {
    // Negatives are uniform over the catalog minus the target item 0; shift
    // draws over n-1 values up by one.
    negatives = sample_negative_items(args.n - 1, args.m, mode, rng);
    for (ItemId& j : negatives) ++j;
    const std::int32_t r = sampled_rank(model, 0, 0, negatives);
    const RankEstimate est = correct_rank(r, args.m, args.n, RankCorrection::kCorrected);
    ++hist[static_cast<std::size_t>(r - 1)];
    sampled[static_cast<std::size_t>(t)] = r;
    estimated[static_cast<std::size_t>(t)] = est.estimated_rank;
  }

  const SampleSummary sampled_summary = summarize(sampled);
  const SampleSummary estimated_summary = summarize(estimated);
  const double p = static_cast<double>(args.true_rank - 1) / (args.n - 1);
  const double analytic_mean = 1.0 + static_cast<double>(args.m) * p;

  std::vector<double> probs(hist.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    probs[k] = binomial_pmf(args.m, p, static_cast<std::int32_t>(k));
  }
  // A degenerate binomial (every trial lands in one cell) leaves nothing to
  // test; the chi-square columns stay empty then.
  const bool degenerate = p == 0.0 || p == 1.0;
  ChiSquareResult chi{0.0, 0, 0.0, 0};
  if (!degenerate) chi = chi_square_gof(hist, probs);

  const fs::path out_dir = prepare_out_dir(args.out);
  {
    std::string csv = "sampled_rank,count,empirical_probability,binomial_probability\n";
    for (std::size_t k = 0; k < hist.size(); ++k) {
      csv += std::to_string(k + 1) + "," + std::to_string(hist[k]) + "," +
             fmt_double(static_cast<double>(hist[k]) / static_cast<double>(args.trials)) +
             "," + fmt_double(probs[k]) + "\n";
    }
    write_text_file(out_dir / "distribution.csv", csv);
  }
  {
    std::string csv =
        "n,true_rank,m,trials,mode,mean_sampled_rank,se_sampled_rank,"
        "analytic_mean_sampled_rank,mean_estimated_rank,se_estimated_rank,"
        "chi_square,chi_square_dof,p_value\n";
    csv += std::to_string(args.n) + "," + std::to_string(args.true_rank) + "," +
           std::to_string(args.m) + "," + std::to_string(args.trials) + "," +
           args.mode + "," + fmt_double(sampled_summary.mean) + "," +
           fmt_double(sampled_summary.se) + "," + fmt_double(analytic_mean) + "," +
           fmt_double(estimated_summary.mean) + "," + fmt_double(estimated_summary.se);
    if (degenerate) {
      csv += ",,,\n";
    } else {
      csv += "," + fmt_double(chi.statistic) + "," + std::to_string(chi.dof) + "," +
             fmt_double(chi.p_value) + "\n";
    }
    write_text_file(out_dir / "summary.csv", csv);
  }

  std::printf("mean_sampled_rank          %s\n", fmt_double(sampled_summary.mean).c_str());
  std::printf("analytic_mean_sampled_rank %s\n", fmt_double(analytic_mean).c_str());
  std::printf("mean_estimated_rank        %s\n", fmt_double(estimated_summary.mean).c_str());
  std::printf("se_estimated_rank          %s\n", fmt_double(estimated_summary.se).c_str());
  if (degenerate) {
    std::printf("chi_square                 n/a (degenerate binomial)\n");
  } else {
    std::printf("chi_square                 %s (dof %d, p %s)\n",
                fmt_double(chi.statistic).c_str(), chi.dof,
                fmt_double(chi.p_value).c_str());
  }

  json config_json;
  config_json["n"] = args.n;
  config_json["true_rank"] = args.true_rank;
  config_json["m"] = args.m;
  config_json["trials"] = args.trials;
  config_json["mode"] = args.mode;
  config_json["seed"] = args.seed;
  write_manifest(out_dir, "simulate", config_json,
                 {"distribution.csv", "summary.csv"});
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string cache;
  std::string out;
  std::vector<std::int32_t> m_list{8, 64};
  std::vector<std::string> correction_list{"corrected", "none"};
  std::vector<std::uint64_t> seed_list{1};
  std::string partition = "test";
  std::vector<std::int32_t> recall_at{20, 50};
  std::vector<std::int32_t> ndcg_at{100};
  std::int32_t jobs = 1;
  TrainArgs base;  // shared training flags; m/correction/seed come from lists
};

struct SweepCell {
  std::int32_t m;
  std::string correction;
  std::uint64_t seed;
};

struct SweepRow {
  const SweepCell* cell;
  std::string partition;
  std::string metric;
  std::int32_t cutoff;
  double value;
};

int cmd_sweep(const SweepArgs& args) {
  require(args.jobs >= 1, "sweep: --jobs must be >= 1");
  require(!args.m_list.empty() && !args.correction_list.empty() &&
              !args.seed_list.empty(),
          "sweep: empty --m-list/--correction-list/--seed-list");
  for (const auto& c : args.correction_list) {
    require(c == "corrected" || c == "none", "sweep: unknown correction mode " + c);
  }

  const PreparedData data = load_cache(args.cache);
  const fs::path out_dir = prepare_out_dir(args.out);

  std::vector<SweepCell> cells;
  for (const std::int32_t m : args.m_list) {
    for (const auto& correction : args.correction_list) {
      for (const std::uint64_t seed : args.seed_list) {
        cells.push_back(SweepCell{m, correction, seed});
      }
    }
  }

  std::vector<std::string> partitions;
  if (args.partition == "both") {
    partitions = {"tuning", "test"};
  } else {
    partitions = {args.partition};
  }
  MetricCutoffs cutoffs;
  cutoffs.recall_at = args.recall_at;
  cutoffs.ndcg_at = args.ndcg_at;

  std::vector<std::vector<SweepRow>> rows(cells.size());
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};

  const auto run_cell = [&](std::size_t index) {
    const SweepCell& cell = cells[index];
    TrainArgs cell_args = args.base;
    cell_args.correction = cell.correction;
    TrainConfig config = effective_train_config(cell_args);
    config.m = cell.m;
    config.seed = cell.seed;
    config.validate();

    TrainHooks hooks;
    hooks.tuning_split = &data.split;
    const TrainResult result = train(data.split.train, data.catalog, config, hooks);

    for (const auto& partition : partitions) {
      const EvalReport report =
          evaluate(result.model, data.split,
                   partition == "tuning" ? Partition::kTuning : Partition::kTest,
                   cutoffs);
      for (const auto& [k, v] : report.recall) {
        rows[index].push_back(SweepRow{&cell, partition, "recall", k, v});
      }
      for (const auto& [k, v] : report.ndcg) {
        rows[index].push_back(SweepRow{&cell, partition, "ndcg", k, v});
      }
    }
  };

  const auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= cells.size()) return;
      try {
        run_cell(index);
        log::info("sweep: finished m=" + std::to_string(cells[index].m) +
                  " correction=" + cells[index].correction +
                  " seed=" + std::to_string(cells[index].seed));
      } catch (const std::exception& e) {
        failures[index] = e.what();
        log::error("sweep: cell m=" + std::to_string(cells[index].m) +
                   " correction=" + cells[index].correction +
                   " seed=" + std::to_string(cells[index].seed) +
                   " failed: " + e.what());
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(args.jobs), cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Assembled serially in cell order, so the CSV is identical however many
  // jobs ran.
  std::string csv = "m,correction,seed,partition,metric,cutoff,value\n";
  for (const auto& cell_rows : rows) {
    for (const auto& row : cell_rows) {
      csv += std::to_string(row.cell->m) + "," + row.cell->correction + "," +
             std::to_string(row.cell->seed) + "," + row.partition + "," +
             row.metric + "," + std::to_string(row.cutoff) + "," +
             fmt_double(row.value) + "\n";
    }
  }
  write_text_file(out_dir / "sweep.csv", csv);

  std::size_t n_failed = 0;
  for (std::size_t index = 0; index < cells.size(); ++index) {
    if (!failures[index].empty()) ++n_failed;
  }
  std::printf("sweep: %zu cells, %zu failed, results in %s\n", cells.size(), n_failed,
              (out_dir / "sweep.csv").string().c_str());

  json config_json = train_config_json(args.base, effective_train_config(args.base),
                                       data.config_hash);
  config_json["cache"] = args.cache;
  config_json.erase("m");
  config_json.erase("seed");
  config_json.erase("correction");
  config_json["m_list"] = args.m_list;
  config_json["correction_list"] = args.correction_list;
  config_json["seed_list"] = args.seed_list;
  config_json["partition"] = args.partition;
  config_json["recall_at"] = args.recall_at;
  config_json["ndcg_at"] = args.ndcg_at;
  write_manifest(out_dir, "sweep", config_json, {"sweep.csv"});
  return n_failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// flag wiring

void add_train_flags(CLI::App* cmd, TrainArgs& args, bool sweep_variant) {
  cmd->add_option("--algorithm", args.algorithm, "training algorithm")
      ->check(CLI::IsMember({"iterative", "batched"}))
      ->capture_default_str();
  cmd->add_option("--loss", args.loss, "pairwise loss / weighting")
      ->check(CLI::IsMember({"warp", "lambdarank"}))
      ->capture_default_str();
  cmd->add_option("--eta", args.config.eta, "learning rate (0 runs without updates)")
      ->capture_default_str();
  cmd->add_option("--l2", args.config.l2, "L2 coefficient on touched rows")
      ->capture_default_str();
  cmd->add_option("--dim", args.config.dim, "embedding dimension")
      ->capture_default_str();
  cmd->add_option("--epochs", args.config.epochs, "training epochs")
      ->capture_default_str();
  cmd->add_option("--max-trials", args.config.max_trials,
                  "WARP rejection budget per step (iterative)")
      ->capture_default_str();
  cmd->add_option("--replacement", args.replacement,
                  "negative sampling with/without replacement (batched)")
      ->check(CLI::IsMember({"with", "without"}))
      ->capture_default_str();
  cmd->add_option("--eval-every", args.config.eval_every,
                  "epochs between tuning evaluations")
      ->capture_default_str();
  cmd->add_option("--patience", args.config.early_stop_patience,
                  "early-stop patience in evaluations (0 disables)")
      ->capture_default_str();
  cmd->add_option("--precision", args.precision, "update arithmetic storage")
      ->check(CLI::IsMember({"f64", "f32"}))
      ->capture_default_str();
  cmd->add_option("--k", args.config.k, "positives per batch (batched)")
      ->capture_default_str();
  if (!sweep_variant) {
    cmd->add_option("--m", args.config.m, "negatives per batch (batched)")
        ->capture_default_str();
    cmd->add_option("--correction", args.correction,
                    "rank correction of sampled ranks (batched)")
        ->check(CLI::IsMember({"corrected", "none"}))
        ->capture_default_str();
    cmd->add_option("--seed", args.config.seed, "master RNG seed")
        ->capture_default_str();
  }
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"matrix-factorization ranking trainer with sampled-rank correction",
               "rankcorrect"};
  app.require_subcommand(1);
  // One config flag for every subcommand; file keys live in [prep]/[train]/...
  // sections. Flags beat the file, the file beats built-in defaults. Subcommands
  // fall through so --config can be given before or after the subcommand name.
  app.set_config("--config", "",
                 "read flag defaults from a TOML/INI file ([prep], [train], ... sections)");

  PrepArgs prep_args;
  CLI::App* prep_cmd =
      app.add_subcommand("prep", "ingest or generate a dataset and cache the split");
  prep_cmd->fallthrough();
  prep_cmd->add_option("--input", prep_args.input, "interaction log (CSV/TSV)");
  prep_cmd->add_option("--format", prep_args.format, "input format")
      ->check(CLI::IsMember({"csv", "tsv"}))
      ->capture_default_str();
  prep_cmd->add_option("--out", prep_args.out, "output directory")->required();
  prep_cmd->add_flag("--force", prep_args.force, "rebuild an existing cache");
  prep_cmd->add_flag("--synthetic", prep_args.synthetic,
                     "generate a planted low-rank dataset instead of reading --input");
  prep_cmd
      ->add_option("--min-user-interactions", prep_args.config.min_user_interactions,
                   "drop users with fewer interactions")
      ->capture_default_str();
  prep_cmd
      ->add_option("--min-item-interactions", prep_args.config.min_item_interactions,
                   "drop items with fewer interactions")
      ->capture_default_str();
  CLI::Option* rating_opt = prep_cmd->add_option(
      "--rating-threshold", prep_args.rating_threshold,
      "keep interactions rated at or above this (unrated rows always kept)");
  prep_cmd
      ->add_option("--holdout-fraction", prep_args.config.holdout_fraction,
                   "held-out share of each eval user's interactions")
      ->capture_default_str();
  prep_cmd
      ->add_option("--eval-users", prep_args.config.n_eval_users,
                   "evaluation users, split evenly into tuning/test")
      ->capture_default_str();
  prep_cmd->add_option("--split-seed", prep_args.config.split_seed, "split RNG seed")
      ->capture_default_str();
  prep_cmd
      ->add_option("--synth-users", prep_args.config.synthetic.n_users,
                   "synthetic: number of users")
      ->capture_default_str();
  prep_cmd
      ->add_option("--synth-items", prep_args.config.synthetic.n_items,
                   "synthetic: catalog size")
      ->capture_default_str();
  prep_cmd
      ->add_option("--synth-dim", prep_args.config.synthetic.dim,
                   "synthetic: ground-truth dimension")
      ->capture_default_str();
  prep_cmd
      ->add_option("--synth-top", prep_args.config.synthetic.top_items,
                   "synthetic: positives per user (top scored)")
      ->capture_default_str();
  prep_cmd
      ->add_option("--synth-seed", prep_args.config.synthetic.seed,
                   "synthetic: generator seed")
      ->capture_default_str();

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a model against a prepared cache");
  train_cmd->fallthrough();
  train_cmd->add_option("--cache", train_args.cache, "dataset cache from `prep`")
      ->required();
  train_cmd->add_option("--out", train_args.out, "output directory")->required();
  add_train_flags(train_cmd, train_args, /*sweep_variant=*/false);

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on a partition");
  eval_cmd->fallthrough();
  eval_cmd->add_option("--cache", eval_args.cache, "dataset cache")->required();
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "model checkpoint")
      ->required();
  eval_cmd->add_option("--partition", eval_args.partition, "user partition")
      ->check(CLI::IsMember({"tuning", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("--recall-at", eval_args.recall_at, "recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--ndcg-at", eval_args.ndcg_at, "NDCG cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Monte-Carlo study of the sampled-rank estimator");
  sim_cmd->fallthrough();
  sim_cmd->add_option("--n", sim_args.n, "catalog size")->capture_default_str();
  sim_cmd->add_option("--true-rank", sim_args.true_rank, "planted full-catalog rank")
      ->capture_default_str();
  sim_cmd->add_option("--m", sim_args.m, "negative sample size")->capture_default_str();
  sim_cmd->add_option("--trials", sim_args.trials, "Monte-Carlo repetitions")
      ->capture_default_str();
  sim_cmd->add_option("--mode", sim_args.mode, "negative sampling mode")
      ->check(CLI::IsMember({"with", "without"}))
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_args.out, "output directory")->required();

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "train the cross-product of sample sizes, corrections and seeds");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--cache", sweep_args.cache, "dataset cache")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "output directory")->required();
  add_train_flags(sweep_cmd, sweep_args.base, /*sweep_variant=*/true);
  sweep_cmd->add_option("--m-list", sweep_args.m_list, "negative sample sizes")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd
      ->add_option("--correction-list", sweep_args.correction_list,
                   "correction modes (corrected, none)")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--seed-list", sweep_args.seed_list, "seeds")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--partition", sweep_args.partition, "partition(s) to report")
      ->check(CLI::IsMember({"tuning", "test", "both"}))
      ->capture_default_str();
  sweep_cmd->add_option("--recall-at", sweep_args.recall_at, "recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--ndcg-at", sweep_args.ndcg_at, "NDCG cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel sweep cells")
      ->capture_default_str();

  CLI::Option* train_correction_opt = train_cmd->get_option("--correction");
  CLI::Option* train_m_opt = train_cmd->get_option("--m");
  CLI::Option* train_k_opt = train_cmd->get_option("--k");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prep_cmd->parsed()) {
      prep_args.has_rating_threshold = rating_opt->count() > 0;
      return cmd_prep(prep_args);
    }
    if (train_cmd->parsed()) {
      train_args.correction_given = train_correction_opt->count() > 0;
      train_args.m_given = train_m_opt->count() > 0;
      train_args.k_given = train_k_opt->count() > 0;
      return cmd_train(train_args);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
    std::fprintf(stderr, "no subcommand given\n");
    return 2;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int a = 1; a < argc; ++a) args.emplace_back(argv[a]);
  return run(std::move(args));
}

}  // namespace rankcorrect::cli
