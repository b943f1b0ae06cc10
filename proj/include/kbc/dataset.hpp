#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kbc/snapshot.hpp"

namespace kbc {

struct DatasetConfig {
  std::int32_t num_types = 0;
  // Inclusion probability for negatives of entities that have no positive in
  // the test set and contributed no training positive.
  double extra_negative_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct LabeledExample {
  EntityId entity;
  TypeId type;
  bool label;
  friend auto operator<=>(const LabeledExample&, const LabeledExample&) = default;
};

struct DatasetStats {
  std::int64_t num_entities = 0;
  std::int64_t num_positive_train = 0;
  std::int64_t num_positive_test = 0;
  std::int64_t num_negative_test = 0;
  std::optional<double> neg_pos_ratio;  // absent when there are no test positives
  std::int64_t max_positives_per_type = 0;
  std::int64_t min_positives_per_type = 0;
};

// The k types with the most facts in the train snapshot, descending count,
// ties broken by ascending type id. k must not exceed the number of types
// with at least one fact.
std::vector<TypeId> select_top_types(const KBSnapshot& train, std::int32_t k);

// Train facts restricted to the selected types, ordered by (entity, type).
std::vector<Fact> build_training_positives(const KBSnapshot& train, std::span<const TypeId> types);

// Labeled test examples, ordered by (entity, type):
//   positives  = (test \ train) restricted to the selected types;
//   negatives (a) for every entity with >=1 positive, all selected-type pairs
//                 absent from the test snapshot;
//   negatives (b) for entities with no positive and no training positive among
//                 the selected types, each eligible pair independently with
//                 probability extra_negative_fraction under the seeded stream.
std::vector<LabeledExample> build_test_set(const KBSnapshot& train, const KBSnapshot& test,
                                           std::span<const TypeId> types,
                                           const DatasetConfig& cfg);

DatasetStats dataset_stats(std::span<const Fact> train_positives,
                           std::span<const LabeledExample> test_examples,
                           std::int64_t num_entities);

}  // namespace kbc
