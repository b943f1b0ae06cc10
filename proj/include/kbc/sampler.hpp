#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kbc/rng.hpp"
#include "kbc/snapshot.hpp"

namespace kbc {

// m = |N_E|, n = |N_T| per positive fact. m=0 selects the negative-type
// objective, n=0 the negative-entity objective, both positive the global one.
struct NegativeConfig {
  std::int32_t m = 1;
  std::int32_t n = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Uniform sample without replacement of entities e' != e with (e', t)
// unobserved. Returns min(m, #eligible) ids, ascending. (e, t) must be an
// observed fact.
std::vector<EntityId> sample_negative_entities(EntityId e, TypeId t, const KBSnapshot& train,
                                               std::int32_t m, Rng& rng);

// Uniform sample without replacement of types t' != t with (e, t')
// unobserved. Returns min(n, #eligible) ids, ascending.
std::vector<TypeId> sample_negative_types(EntityId e, TypeId t, const KBSnapshot& train,
                                          std::int32_t n, Rng& rng);

// Negative sets for a fixed positive list, index-aligned with it.
struct SampledNegatives {
  std::vector<std::vector<EntityId>> entities;
  std::vector<std::vector<TypeId>> types;

  std::size_t size() const { return entities.size(); }
};

// Draws every positive's negatives from a substream keyed by (seed,
// stream_tag, entity, type), so results do not depend on visitation order.
// stream_tag 0 gives the frozen per-positive sets; trainers that resample
// pass the epoch number.
SampledNegatives sample_all_negatives(std::span<const Fact> positives, const KBSnapshot& train,
                                      const NegativeConfig& cfg, std::uint64_t stream_tag = 0);

}  // namespace kbc
