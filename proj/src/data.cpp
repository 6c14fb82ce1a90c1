#include "rankcorrect/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "rankcorrect/binary_io.hpp"
#include "rankcorrect/log.hpp"

namespace rankcorrect {
namespace {

constexpr char kCacheMagic[] = "RCCACHE1";
constexpr std::uint32_t kCacheVersion = 1;

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

// Rounds half-up: round_half_up(0.5) == 1.
std::int32_t round_half_up(double x) {
  return static_cast<std::int32_t>(std::floor(x + 0.5));
}

// Takes the first `take` elements of a partial Fisher-Yates shuffle of `pool`,
// consuming one bounded draw per taken element.
template <typename T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t take, Rng& rng) {
  require(take <= pool.size(), "draw_without_replacement: take > pool");
  for (std::size_t t = 0; t < take; ++t) {
    const std::uint64_t pick = t + rng.next_below(pool.size() - t);
    std::swap(pool[t], pool[pick]);
  }
  pool.resize(take);
  return pool;
}

std::string cache_instruction() {
  return " -- delete the cache and re-run `rankcorrect prep`";
}

}  // namespace

void PrepConfig::validate() const {
  require(min_user_interactions >= 1, "PrepConfig: min_user_interactions must be >= 1");
  require(min_item_interactions >= 1, "PrepConfig: min_item_interactions must be >= 1");
  require(holdout_fraction > 0.0 && holdout_fraction < 1.0,
          "PrepConfig: holdout_fraction must lie in (0,1)");
  require(n_eval_users >= 2, "PrepConfig: n_eval_users must be >= 2");
  if (rating_threshold) {
    require(std::isfinite(*rating_threshold), "PrepConfig: rating_threshold must be finite");
  }
  if (synthetic.n_users > 0) {
    require(synthetic.n_items >= 2, "PrepConfig: synthetic.n_items must be >= 2");
    require(synthetic.dim >= 1, "PrepConfig: synthetic.dim must be >= 1");
    require(synthetic.top_items >= 1 && synthetic.top_items < synthetic.n_items,
            "PrepConfig: synthetic.top_items must lie in [1, n_items)");
  }
}

std::uint64_t PrepConfig::hash() const {
  // Canonical text rendering hashed with FNV-1a; %a keeps doubles exact.
  char buf[256];
  std::snprintf(buf, sizeof(buf), "prep1|%d|%d|%d|%a|%a|%d|%llu|%d|%d|%d|%d|%llu",
                min_user_interactions, min_item_interactions,
                rating_threshold.has_value() ? 1 : 0,
                rating_threshold.value_or(0.0), holdout_fraction, n_eval_users,
                static_cast<unsigned long long>(split_seed), synthetic.n_users,
                synthetic.n_items, synthetic.dim, synthetic.top_items,
                static_cast<unsigned long long>(synthetic.seed));
  return detail::fnv1a64(std::string(buf));
}

std::vector<RawInteraction> load_interactions(const std::string& path, LogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open interaction log: " + path);
  const char delim = format == LogFormat::kCsv ? ',' : '\t';

  std::vector<RawInteraction> records;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;
  std::size_t malformed = 0;
  bool saw_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      saw_header = true;  // first line is the header
      continue;
    }
    ++data_lines;
    const auto fields = split_fields(line, delim);
    const auto bad = [&](const char* why) {
      ++malformed;
      log::warn("load_interactions: " + path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 2 || fields.size() > 4) {
      bad("expected 2-4 columns");
      continue;
    }
    RawInteraction rec;
    rec.user_key = fields[0];
    rec.item_key = fields[1];
    if (rec.user_key.empty() || rec.item_key.empty()) {
      bad("empty user or item key");
      continue;
    }
    if (fields.size() >= 3) {
      double rating = 0.0;
      if (!parse_double(fields[2], rating)) {
        bad("unparseable rating");
        continue;
      }
      rec.rating = rating;
    }
    if (fields.size() == 4) {
      std::int64_t ts = 0;
      if (!parse_i64(fields[3], ts)) {
        bad("unparseable timestamp");
        continue;
      }
      rec.timestamp = ts;
    }
    records.push_back(std::move(rec));
  }
  if (malformed * 100 > data_lines) {
    throw IoError("load_interactions: " + std::to_string(malformed) + " of " +
                  std::to_string(data_lines) + " lines malformed (> 1%) in " + path);
  }
  return records;
}

IdMaps make_id_maps(std::vector<std::string> users, std::vector<std::string> items) {
  IdMaps ids;
  ids.users = std::move(users);
  ids.items = std::move(items);
  for (std::size_t u = 0; u < ids.users.size(); ++u) {
    ids.user_ids.emplace(ids.users[u], static_cast<ContextId>(u));
  }
  for (std::size_t i = 0; i < ids.items.size(); ++i) {
    ids.item_ids.emplace(ids.items[i], static_cast<ItemId>(i));
  }
  require(ids.user_ids.size() == ids.users.size(), "IdMaps: duplicate user key");
  require(ids.item_ids.size() == ids.items.size(), "IdMaps: duplicate item key");
  return ids;
}

Prepared preprocess(const std::vector<RawInteraction>& raw, const PrepConfig& config) {
  config.validate();
  require(!raw.empty(), "preprocess: empty input");

  // Rating threshold, then binarize + dedup, keeping first-appearance order.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rec : raw) {
    require(!rec.user_key.empty() && !rec.item_key.empty(),
            "preprocess: empty user or item key");
    if (config.rating_threshold && rec.rating &&
        *rec.rating < *config.rating_threshold) {
      continue;
    }
    auto key = std::make_pair(rec.user_key, rec.item_key);
    if (seen.insert(key).second) pairs.push_back(std::move(key));
  }

  // Alternate user/item min-count passes until neither removes anything.
  std::map<std::string, std::int32_t> user_count;
  std::map<std::string, std::int32_t> item_count;
  bool changed = true;
  while (changed && !pairs.empty()) {
    changed = false;
    user_count.clear();
    for (const auto& [u, i] : pairs) ++user_count[u];
    std::size_t removed = std::erase_if(pairs, [&](const auto& p) {
      return user_count[p.first] < config.min_user_interactions;
    });
    changed |= removed > 0;

    item_count.clear();
    for (const auto& [u, i] : pairs) ++item_count[i];
    removed = std::erase_if(pairs, [&](const auto& p) {
      return item_count[p.second] < config.min_item_interactions;
    });
    changed |= removed > 0;
  }
  require(!pairs.empty(), "preprocess: every interaction was filtered out");

  // Dense reindexing in first-appearance order of the survivors.
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::unordered_map<std::string, ContextId> user_ids;
  std::unordered_map<std::string, ItemId> item_ids;
  std::vector<Interaction> entries;
  entries.reserve(pairs.size());
  for (const auto& [u, i] : pairs) {
    auto [uit, unew] = user_ids.emplace(u, static_cast<ContextId>(users.size()));
    if (unew) users.push_back(u);
    auto [iit, inew] = item_ids.emplace(i, static_cast<ItemId>(items.size()));
    if (inew) items.push_back(i);
    entries.push_back(Interaction{uit->second, iit->second});
  }
  require(items.size() >= 2, "preprocess: fewer than 2 items survived");

  const auto n_users = static_cast<std::int32_t>(users.size());
  const auto n_items = static_cast<std::int32_t>(items.size());
  return Prepared{ItemCatalog(n_items),
                  InteractionSet(n_users, n_items, std::move(entries)),
                  make_id_maps(std::move(users), std::move(items))};
}

EvalSplit make_split(const InteractionSet& data, const PrepConfig& config, Rng& rng) {
  config.validate();
  require(!data.empty(), "make_split: empty data");

  std::vector<ContextId> eligible;
  for (ContextId c = 0; c < data.n_contexts(); ++c) {
    if (data.items_of(c).size() >= 2) eligible.push_back(c);
  }
  require(eligible.size() >= static_cast<std::size_t>(config.n_eval_users),
          "make_split: not enough users with >= 2 interactions");

  const auto selected = draw_without_replacement(
      std::move(eligible), static_cast<std::size_t>(config.n_eval_users), rng);

  // Half tuning, half test; an odd count gives the extra user to test.
  const std::size_t n_tuning = selected.size() / 2;
  std::vector<EvalUser> users;
  std::set<std::pair<ContextId, ItemId>> held_out;
  for (std::size_t s = 0; s < selected.size(); ++s) {
    const ContextId c = selected[s];
    const auto items = data.items_of(c);
    const auto count = static_cast<std::int32_t>(items.size());
    const std::int32_t h = std::clamp(
        round_half_up(config.holdout_fraction * count), 1, count - 1);
    std::vector<ItemId> holdout = draw_without_replacement(
        std::vector<ItemId>(items.begin(), items.end()),
        static_cast<std::size_t>(h), rng);
    std::sort(holdout.begin(), holdout.end());
    for (const ItemId i : holdout) held_out.emplace(c, i);
    users.push_back(EvalUser{c, std::move(holdout),
                             s < n_tuning ? Partition::kTuning : Partition::kTest});
  }
  std::sort(users.begin(), users.end(),
            [](const EvalUser& a, const EvalUser& b) { return a.context < b.context; });

  std::vector<Interaction> train_entries;
  train_entries.reserve(data.size() - held_out.size());
  for (const auto& e : data.entries()) {
    if (!held_out.contains({e.context, e.item})) train_entries.push_back(e);
  }

  EvalSplit split{InteractionSet(data.n_contexts(), data.n_items(),
                                 std::move(train_entries)),
                  std::move(users)};
  split.validate();
  return split;
}

std::pair<ItemCatalog, InteractionSet> generate_synthetic(const SyntheticConfig& config) {
  require(config.n_users >= 1, "generate_synthetic: n_users must be >= 1");
  require(config.n_items >= 2, "generate_synthetic: n_items must be >= 2");
  require(config.dim >= 1, "generate_synthetic: dim must be >= 1");
  require(config.top_items >= 1 && config.top_items < config.n_items,
          "generate_synthetic: top_items must lie in [1, n_items)");

  const FactorModel truth =
      init_model(config.n_users, config.n_items, config.dim,
                 derive_seed(config.seed, kStreamSynthetic));

  std::vector<Interaction> entries;
  entries.reserve(static_cast<std::size_t>(config.n_users) * config.top_items);
  std::vector<ItemId> order(static_cast<std::size_t>(config.n_items));
  for (ContextId u = 0; u < config.n_users; ++u) {
    const auto scores = score_all(truth, u);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
      if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
      }
      return a < b;
    });
    for (std::int32_t t = 0; t < config.top_items; ++t) {
      entries.push_back(Interaction{u, order[static_cast<std::size_t>(t)]});
    }
  }
  return {ItemCatalog(config.n_items),
          InteractionSet(config.n_users, config.n_items, std::move(entries))};
}

PreparedData prepare(const std::vector<RawInteraction>& raw, const PrepConfig& config) {
  Prepared prep = preprocess(raw, config);
  Rng rng(derive_seed(config.split_seed, kStreamSplit));
  EvalSplit split = make_split(prep.interactions, config, rng);
  return PreparedData{prep.catalog, std::move(split), std::move(prep.ids),
                      config.hash()};
}

PreparedData prepare_synthetic(const PrepConfig& config) {
  config.validate();
  require(config.synthetic.n_users > 0, "prepare_synthetic: synthetic.n_users not set");
  auto [catalog, interactions] = generate_synthetic(config.synthetic);

  // Dense ids double as raw keys for generated data.
  std::vector<std::string> users(static_cast<std::size_t>(interactions.n_contexts()));
  for (std::size_t u = 0; u < users.size(); ++u) users[u] = "u" + std::to_string(u);
  std::vector<std::string> items(static_cast<std::size_t>(interactions.n_items()));
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = "i" + std::to_string(i);

  Rng rng(derive_seed(config.split_seed, kStreamSplit));
  EvalSplit split = make_split(interactions, config, rng);
  return PreparedData{catalog, std::move(split),
                      make_id_maps(std::move(users), std::move(items)), config.hash()};
}

void save_cache(const PreparedData& data, const std::string& path) {
  std::string buf;
  buf.append(kCacheMagic, 8);
  detail::put_u32(buf, kCacheVersion);
  detail::put_u64(buf, data.config_hash);

  detail::put_u32(buf, static_cast<std::uint32_t>(data.catalog.n_items));

  const auto& train = data.split.train;
  detail::put_u32(buf, static_cast<std::uint32_t>(train.n_contexts()));
  detail::put_u32(buf, static_cast<std::uint32_t>(train.n_items()));
  detail::put_u64(buf, train.size());
  for (const auto& e : train.entries()) {
    detail::put_u32(buf, static_cast<std::uint32_t>(e.context));
    detail::put_u32(buf, static_cast<std::uint32_t>(e.item));
  }

  detail::put_u64(buf, data.split.users.size());
  for (const auto& user : data.split.users) {
    detail::put_u32(buf, static_cast<std::uint32_t>(user.context));
    detail::put_u32(buf, user.partition == Partition::kTuning ? 0 : 1);
    detail::put_u64(buf, user.holdout.size());
    for (const ItemId i : user.holdout) {
      detail::put_u32(buf, static_cast<std::uint32_t>(i));
    }
  }

  detail::put_u64(buf, data.ids.users.size());
  for (const auto& key : data.ids.users) detail::put_string(buf, key);
  detail::put_u64(buf, data.ids.items.size());
  for (const auto& key : data.ids.items) detail::put_string(buf, key);

  detail::put_u64(buf, detail::fnv1a64(buf));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open cache for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("cache write failed: " + path);
}

PreparedData load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cache: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 8 + 4 + 8 + 8 || buf.compare(0, 8, kCacheMagic, 8) != 0) {
    throw IoError("not a dataset cache: " + path + cache_instruction());
  }
  const std::string payload = buf.substr(0, buf.size() - 8);
  detail::Reader tail(buf);
  tail.skip(buf.size() - 8);
  if (tail.u64() != detail::fnv1a64(payload)) {
    throw IoError("cache checksum mismatch (truncated or corrupt): " + path +
                  cache_instruction());
  }

  detail::Reader r(payload);
  r.skip(8);  // magic
  const std::uint32_t version = r.u32();
  if (version != kCacheVersion) {
    throw IoError("unsupported cache version " + std::to_string(version) +
                  cache_instruction());
  }
  const std::uint64_t config_hash = r.u64();

  const auto n_catalog = static_cast<std::int32_t>(r.u32());
  const auto n_contexts = static_cast<std::int32_t>(r.u32());
  const auto n_items = static_cast<std::int32_t>(r.u32());
  const std::uint64_t n_entries = r.u64();
  std::vector<Interaction> entries;
  entries.reserve(n_entries);
  for (std::uint64_t e = 0; e < n_entries; ++e) {
    const auto c = static_cast<ContextId>(r.u32());
    const auto i = static_cast<ItemId>(r.u32());
    entries.push_back(Interaction{c, i});
  }

  const std::uint64_t n_users = r.u64();
  std::vector<EvalUser> users;
  users.reserve(n_users);
  for (std::uint64_t u = 0; u < n_users; ++u) {
    EvalUser user;
    user.context = static_cast<ContextId>(r.u32());
    user.partition = r.u32() == 0 ? Partition::kTuning : Partition::kTest;
    const std::uint64_t n_holdout = r.u64();
    user.holdout.reserve(n_holdout);
    for (std::uint64_t h = 0; h < n_holdout; ++h) {
      user.holdout.push_back(static_cast<ItemId>(r.u32()));
    }
    users.push_back(std::move(user));
  }

  std::vector<std::string> user_keys(r.u64());
  for (auto& key : user_keys) key = r.string();
  std::vector<std::string> item_keys(r.u64());
  for (auto& key : item_keys) key = r.string();
  if (r.remaining() != 0) {
    throw IoError("trailing bytes in cache: " + path + cache_instruction());
  }

  PreparedData data{ItemCatalog(n_catalog),
                    EvalSplit{InteractionSet(n_contexts, n_items, std::move(entries)),
                              std::move(users)},
                    make_id_maps(std::move(user_keys), std::move(item_keys)),
                    config_hash};
  data.split.validate();
  return data;
}

PreparedData load_cache(const std::string& path, std::uint64_t expected_hash) {
  PreparedData data = load_cache(path);
  if (data.config_hash != expected_hash) {
    throw IoError("cache was built with a different prep config: " + path +
                  cache_instruction());
  }
  return data;
}

}  // namespace rankcorrect
