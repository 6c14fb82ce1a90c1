#pragma once

// Ingestion of raw interaction logs, preprocessing filters with dense
// reindexing, train/tuning/test splitting, a planted synthetic generator,
// and the versioned binary cache that ties a prepared dataset to its config.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rankcorrect/core.hpp"
#include "rankcorrect/eval.hpp"
#include "rankcorrect/rng.hpp"

namespace rankcorrect {

struct RawInteraction {
  std::string user_key;
  std::string item_key;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;  // seconds

  friend bool operator==(const RawInteraction&, const RawInteraction&) = default;
};

enum class LogFormat { kCsv, kTsv };

// Planted low-rank dataset: ground-truth factors are i.i.d. Gaussian and each
// user's top_items highest-scoring items become their positives.
struct SyntheticConfig {
  std::int32_t n_users = 0;  // > 0 switches prep to the generator
  std::int32_t n_items = 0;
  std::int32_t dim = 8;
  std::int32_t top_items = 20;
  std::uint64_t seed = 1;

  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

struct PrepConfig {
  std::int32_t min_user_interactions = 1;
  std::int32_t min_item_interactions = 1;
  std::optional<double> rating_threshold;  // keep rating >= threshold; unrated rows kept
  double holdout_fraction = 0.20;
  std::int32_t n_eval_users = 0;
  std::uint64_t split_seed = 1;
  SyntheticConfig synthetic;

  void validate() const;
  // Stable digest of every field; caches carry it so a cache can be matched
  // against the config that would regenerate it.
  std::uint64_t hash() const;

  friend bool operator==(const PrepConfig&, const PrepConfig&) = default;
};

// File-order records. Malformed lines are warned with their line number and
// skipped; more than 1% malformed aborts with an error.
std::vector<RawInteraction> load_interactions(const std::string& path, LogFormat format);

// Bijections between surviving raw keys and dense ids (position = dense id).
struct IdMaps {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::unordered_map<std::string, ContextId> user_ids;
  std::unordered_map<std::string, ItemId> item_ids;

  friend bool operator==(const IdMaps& a, const IdMaps& b) {
    return a.users == b.users && a.items == b.items;
  }
};

IdMaps make_id_maps(std::vector<std::string> users, std::vector<std::string> items);

struct Prepared {
  ItemCatalog catalog;
  InteractionSet interactions;
  IdMaps ids;
};

// Rating threshold, dedup, then alternating user/item min-count passes until
// a fixed point, then dense reindexing in first-appearance order.
Prepared preprocess(const std::vector<RawInteraction>& raw, const PrepConfig& config);

// Selects n_eval_users among users with >= 2 interactions, holds out
// round-half-up(holdout_fraction * count) of each one's items (clamped to
// [1, count-1]), and labels the selected users half tuning, half test.
EvalSplit make_split(const InteractionSet& data, const PrepConfig& config, Rng& rng);

std::pair<ItemCatalog, InteractionSet> generate_synthetic(const SyntheticConfig& config);

// A fully prepared dataset as stored in the cache.
struct PreparedData {
  ItemCatalog catalog;
  EvalSplit split;
  IdMaps ids;
  std::uint64_t config_hash = 0;
};

// End to end: load-or-generate, preprocess, split.
PreparedData prepare(const std::vector<RawInteraction>& raw, const PrepConfig& config);
PreparedData prepare_synthetic(const PrepConfig& config);

// Versioned binary cache (magic + version + config hash + checksum).
void save_cache(const PreparedData& data, const std::string& path);
PreparedData load_cache(const std::string& path);
// Additionally rejects a cache whose config hash differs from expected_hash,
// with an instruction to re-run prep.
PreparedData load_cache(const std::string& path, std::uint64_t expected_hash);

}  // namespace rankcorrect
