#include "rankcorrect/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rankcorrect/binary_io.hpp"
#include "rankcorrect/rng.hpp"

namespace rankcorrect {

namespace {
constexpr char kModelMagic[] = "RCMODEL1";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

InteractionSet::InteractionSet(std::int32_t n_contexts, std::int32_t n_items,
                               std::vector<Interaction> entries)
    : n_contexts_(n_contexts), n_items_(n_items), entries_(std::move(entries)) {
  require(n_contexts_ >= 1, "InteractionSet: n_contexts must be positive");
  require(n_items_ >= 1, "InteractionSet: n_items must be positive");
  for (const auto& e : entries_) {
    require(e.context >= 0 && e.context < n_contexts_,
            "InteractionSet: context id out of range");
    require(e.item >= 0 && e.item < n_items_, "InteractionSet: item id out of range");
  }
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());

  offsets_.assign(static_cast<std::size_t>(n_contexts_) + 1, 0);
  items_.reserve(entries_.size());
  for (const auto& e : entries_) {
    ++offsets_[static_cast<std::size_t>(e.context) + 1];
    items_.push_back(e.item);
  }
  for (std::size_t c = 0; c < static_cast<std::size_t>(n_contexts_); ++c) {
    offsets_[c + 1] += offsets_[c];
  }
}

std::span<const ItemId> InteractionSet::items_of(ContextId c) const {
  require(c >= 0 && c < n_contexts_, "InteractionSet::items_of: context out of range");
  const std::size_t begin = offsets_[static_cast<std::size_t>(c)];
  const std::size_t end = offsets_[static_cast<std::size_t>(c) + 1];
  return {items_.data() + begin, end - begin};
}

bool InteractionSet::contains(ContextId c, ItemId i) const {
  const auto items = items_of(c);
  return std::binary_search(items.begin(), items.end(), i);
}

bool FactorModel::all_finite() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(context_factors.begin(), context_factors.end(), finite) &&
         std::all_of(item_factors.begin(), item_factors.end(), finite);
}

double score(const FactorModel& model, ContextId c, ItemId i) {
  require(c >= 0 && c < model.n_contexts, "score: context id out of range");
  require(i >= 0 && i < model.n_items, "score: item id out of range");
  const auto u = model.context_row(c);
  const auto v = model.item_row(i);
  double s = 0.0;
  for (std::int32_t f = 0; f < model.dim; ++f) s += u[f] * v[f];
  return s;
}

std::vector<double> score_all(const FactorModel& model, ContextId c) {
  require(c >= 0 && c < model.n_contexts, "score_all: context id out of range");
  const auto u = model.context_row(c);
  std::vector<double> scores(static_cast<std::size_t>(model.n_items));
  for (std::int32_t i = 0; i < model.n_items; ++i) {
    const auto v = model.item_row(i);
    double s = 0.0;
    for (std::int32_t f = 0; f < model.dim; ++f) s += u[f] * v[f];
    scores[static_cast<std::size_t>(i)] = s;
  }
  return scores;
}

FactorModel init_model(std::int32_t n_contexts, std::int32_t n_items,
                       std::int32_t dim, std::uint64_t seed) {
  require(n_contexts >= 1, "init_model: n_contexts must be positive");
  require(n_items >= 1, "init_model: n_items must be positive");
  require(dim >= 1, "init_model: dim must be >= 1");
  FactorModel model;
  model.n_contexts = n_contexts;
  model.n_items = n_items;
  model.dim = dim;
  model.seed = seed;
  const double sigma = 1.0 / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  model.context_factors.resize(static_cast<std::size_t>(n_contexts) * dim);
  model.item_factors.resize(static_cast<std::size_t>(n_items) * dim);
  for (auto& v : model.context_factors) v = sigma * rng.next_gaussian();
  for (auto& v : model.item_factors) v = sigma * rng.next_gaussian();
  return model;
}

void save_model(const FactorModel& model, const std::string& path) {
  std::string buf;
  buf.reserve(64 + 8 * (model.context_factors.size() + model.item_factors.size()));
  buf.append(kModelMagic, 8);
  detail::put_u32(buf, kModelVersion);
  detail::put_u32(buf, static_cast<std::uint32_t>(model.dim));
  detail::put_u64(buf, static_cast<std::uint64_t>(model.n_contexts));
  detail::put_u64(buf, static_cast<std::uint64_t>(model.n_items));
  detail::put_u64(buf, model.seed);
  for (const double v : model.context_factors) detail::put_f64(buf, v);
  for (const double v : model.item_factors) detail::put_f64(buf, v);
  detail::put_u64(buf, detail::fnv1a64(buf));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("checkpoint write failed: " + path);
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 8 + 4 + 8 || buf.compare(0, 8, kModelMagic, 8) != 0) {
    throw IoError("not a model checkpoint: " + path);
  }
  const std::string payload = buf.substr(0, buf.size() - 8);
  detail::Reader tail(buf);
  tail.skip(buf.size() - 8);
  if (tail.u64() != detail::fnv1a64(payload)) {
    throw IoError("checkpoint checksum mismatch: " + path);
  }

  detail::Reader r(payload);
  r.skip(8);  // magic
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) throw IoError("unsupported checkpoint version: " + path);
  FactorModel model;
  model.dim = static_cast<std::int32_t>(r.u32());
  model.n_contexts = static_cast<std::int32_t>(r.u64());
  model.n_items = static_cast<std::int32_t>(r.u64());
  model.seed = r.u64();
  require(model.dim >= 1 && model.n_contexts >= 1 && model.n_items >= 1,
          "load_model: corrupt dimensions");
  model.context_factors.resize(static_cast<std::size_t>(model.n_contexts) * model.dim);
  model.item_factors.resize(static_cast<std::size_t>(model.n_items) * model.dim);
  for (auto& v : model.context_factors) v = r.f64();
  for (auto& v : model.item_factors) v = r.f64();
  if (r.remaining() != 0) throw IoError("checkpoint has trailing bytes: " + path);
  return model;
}

}  // namespace rankcorrect
