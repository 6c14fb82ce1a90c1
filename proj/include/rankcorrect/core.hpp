#pragma once

// Item catalog, implicit-feedback observations and the matrix factorization
// model that every other module scores against.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rankcorrect/common.hpp"

namespace rankcorrect {

struct ItemCatalog {
  explicit ItemCatalog(std::int32_t n) : n_items(n) {
    require(n >= 2, "ItemCatalog: need at least 2 items");
  }
  std::int32_t n_items;
};

struct Interaction {
  ContextId context;
  ItemId item;
  friend bool operator==(const Interaction&, const Interaction&) = default;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

// Deduplicated positive observations, indexed per context for O(log) lookups.
class InteractionSet {
 public:
  InteractionSet(std::int32_t n_contexts, std::int32_t n_items,
                 std::vector<Interaction> entries);

  std::int32_t n_contexts() const { return n_contexts_; }
  std::int32_t n_items() const { return n_items_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // All entries, sorted by (context, item).
  std::span<const Interaction> entries() const { return entries_; }

  // Items of one context, sorted ascending.
  std::span<const ItemId> items_of(ContextId c) const;

  bool contains(ContextId c, ItemId i) const;

  friend bool operator==(const InteractionSet&, const InteractionSet&) = default;

 private:
  std::int32_t n_contexts_;
  std::int32_t n_items_;
  std::vector<Interaction> entries_;
  std::vector<std::size_t> offsets_;  // per-context ranges into items_
  std::vector<ItemId> items_;
};

struct FactorModel {
  std::int32_t n_contexts = 0;
  std::int32_t n_items = 0;
  std::int32_t dim = 0;
  std::uint64_t seed = 0;  // seed the model was initialized from
  std::vector<double> context_factors;  // n_contexts x dim, row-major
  std::vector<double> item_factors;     // n_items x dim, row-major

  std::span<double> context_row(ContextId c) {
    return {context_factors.data() + static_cast<std::size_t>(c) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> context_row(ContextId c) const {
    return {context_factors.data() + static_cast<std::size_t>(c) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<double> item_row(ItemId i) {
    return {item_factors.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> item_row(ItemId i) const {
    return {item_factors.data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }

  bool all_finite() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

// Inner product of the context and item embedding rows.
double score(const FactorModel& model, ContextId c, ItemId i);

// Scores of every catalog item for one context; element i equals score(c, i).
std::vector<double> score_all(const FactorModel& model, ContextId c);

// Entries ~ iid Gaussian(0, 1/sqrt(dim)), drawn from the pinned generator:
// context rows first, then item rows, row-major.
FactorModel init_model(std::int32_t n_contexts, std::int32_t n_items,
                       std::int32_t dim, std::uint64_t seed);

// Versioned binary checkpoint; round-trips bit-exactly.
void save_model(const FactorModel& model, const std::string& path);
FactorModel load_model(const std::string& path);

}  // namespace rankcorrect
