#include "kbc/dataset.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <unordered_set>

#include "kbc/rng.hpp"

namespace kbc {

std::vector<TypeId> select_top_types(const KBSnapshot& train, std::int32_t k) {
  if (k < 1) throw DataError("num_types must be >= 1");
  auto counts = train.type_counts();
  if (static_cast<std::size_t>(k) > counts.size()) {
    throw DataError("num_types " + std::to_string(k) + " exceeds the " +
                    std::to_string(counts.size()) + " types with observed facts");
  }
  std::vector<std::pair<TypeId, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<TypeId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int32_t i = 0; i < k; ++i) out.push_back(ranked[static_cast<std::size_t>(i)].first);
  return out;
}

std::vector<Fact> build_training_positives(const KBSnapshot& train,
                                           std::span<const TypeId> types) {
  std::unordered_set<TypeId> selected(types.begin(), types.end());
  std::vector<Fact> out;
  for (const Fact& f : train.facts()) {
    if (selected.contains(f.type)) out.push_back(f);
  }
  return out;
}

std::vector<LabeledExample> build_test_set(const KBSnapshot& train, const KBSnapshot& test,
                                           std::span<const TypeId> types,
                                           const DatasetConfig& cfg) {
  if (cfg.extra_negative_fraction < 0.0 || cfg.extra_negative_fraction > 1.0) {
    throw DataError("extra_negative_fraction must lie in [0, 1]");
  }
  std::unordered_set<TypeId> selected(types.begin(), types.end());
  std::vector<TypeId> types_ascending(types.begin(), types.end());
  std::sort(types_ascending.begin(), types_ascending.end());

  std::vector<LabeledExample> out;
  std::unordered_set<EntityId> entities_with_positive;
  for (const Fact& f : diff_snapshots(train, test)) {
    if (!selected.contains(f.type)) continue;
    out.push_back({f.entity, f.type, true});
    entities_with_positive.insert(f.entity);
  }

  // (a) every unobserved selected type of an entity that gained a fact
  for (EntityId e : entities_with_positive) {
    for (TypeId t : types_ascending) {
      if (!test.contains(e, t)) out.push_back({e, t, false});
    }
  }

  // (b) seeded portion of negatives from entities unseen by the training
  // positives and without a positive above; single pass for determinism
  std::unordered_set<EntityId> training_entities;
  for (const Fact& f : train.facts()) {
    if (selected.contains(f.type)) training_entities.insert(f.entity);
  }
  Rng rng(cfg.seed);
  const std::int32_t num_entities = test.num_entities();
  for (EntityId e = 0; e < num_entities; ++e) {
    if (entities_with_positive.contains(e) || training_entities.contains(e)) continue;
    for (TypeId t : types_ascending) {
      if (test.contains(e, t)) continue;
      if (rng.next_double() < cfg.extra_negative_fraction) out.push_back({e, t, false});
    }
  }

  std::sort(out.begin(), out.end());
  return out;
}

DatasetStats dataset_stats(std::span<const Fact> train_positives,
                           std::span<const LabeledExample> test_examples,
                           std::int64_t num_entities) {
  DatasetStats stats;
  stats.num_entities = num_entities;
  stats.num_positive_train = static_cast<std::int64_t>(train_positives.size());
  for (const LabeledExample& ex : test_examples) {
    if (ex.label) {
      ++stats.num_positive_test;
    } else {
      ++stats.num_negative_test;
    }
  }
  if (stats.num_positive_test > 0) {
    stats.neg_pos_ratio = static_cast<double>(stats.num_negative_test) /
                          static_cast<double>(stats.num_positive_test);
  }
  std::map<TypeId, std::int64_t> per_type;
  for (const Fact& f : train_positives) ++per_type[f.type];
  for (const auto& [t, c] : per_type) {
    stats.max_positives_per_type = std::max(stats.max_positives_per_type, c);
    stats.min_positives_per_type =
        stats.min_positives_per_type == 0 ? c : std::min(stats.min_positives_per_type, c);
  }
  return stats;
}

}  // namespace kbc
