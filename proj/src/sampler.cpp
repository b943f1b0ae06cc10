#include "kbc/sampler.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

namespace kbc {
namespace {

constexpr std::uint64_t kNegativeStreamSalt = 0x6b62632d6e656773ULL;

// Uniform without-replacement draw of `want` values from [0, universe) minus
// the values `reject` says no to. eligible_count must equal the true number
// of eligible values.
template <typename Reject>
std::vector<std::int32_t> draw_distinct(std::int64_t universe, std::int64_t eligible_count,
                                        std::int32_t want, Rng& rng, Reject&& reject) {
  std::vector<std::int32_t> out;
  if (eligible_count <= 0 || want <= 0) return out;
  if (want >= eligible_count) {
    for (std::int64_t v = 0; v < universe; ++v) {
      if (!reject(static_cast<std::int32_t>(v))) out.push_back(static_cast<std::int32_t>(v));
    }
    return out;
  }
  if (want * 2 >= eligible_count) {
    // dense regime: enumerate eligible values, then partial Fisher-Yates
    std::vector<std::int32_t> eligible;
    eligible.reserve(static_cast<std::size_t>(eligible_count));
    for (std::int64_t v = 0; v < universe; ++v) {
      if (!reject(static_cast<std::int32_t>(v))) eligible.push_back(static_cast<std::int32_t>(v));
    }
    for (std::int32_t i = 0; i < want; ++i) {
      std::size_t j = static_cast<std::size_t>(i) +
                      static_cast<std::size_t>(rng.below(eligible.size() - static_cast<std::size_t>(i)));
      std::swap(eligible[static_cast<std::size_t>(i)], eligible[j]);
    }
    out.assign(eligible.begin(), eligible.begin() + want);
  } else {
    std::unordered_set<std::int32_t> drawn;
    while (static_cast<std::int32_t>(drawn.size()) < want) {
      auto v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(universe)));
      if (reject(v)) continue;
      drawn.insert(v);
    }
    out.assign(drawn.begin(), drawn.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void NegativeConfig::validate() const {
  if (m < 0 || n < 0 || m + n < 1) {
    throw UsageError("negative counts must satisfy m >= 0, n >= 0, m + n >= 1");
  }
}

std::vector<EntityId> sample_negative_entities(EntityId e, TypeId t, const KBSnapshot& train,
                                               std::int32_t m, Rng& rng) {
  if (!train.contains(e, t)) {
    throw DataError("positive fact (" + std::to_string(e) + ", " + std::to_string(t) +
                    ") not observed in the training snapshot");
  }
  // every entity carrying type t is ineligible, and e is one of them
  std::int64_t eligible = static_cast<std::int64_t>(train.num_entities()) - train.count_for_type(t);
  return draw_distinct(train.num_entities(), eligible, m, rng, [&](EntityId candidate) {
    return candidate == e || train.contains(candidate, t);
  });
}

std::vector<TypeId> sample_negative_types(EntityId e, TypeId t, const KBSnapshot& train,
                                          std::int32_t n, Rng& rng) {
  if (!train.contains(e, t)) {
    throw DataError("positive fact (" + std::to_string(e) + ", " + std::to_string(t) +
                    ") not observed in the training snapshot");
  }
  std::int64_t eligible = static_cast<std::int64_t>(train.num_types()) -
                          static_cast<std::int64_t>(train.types_of(e).size());
  return draw_distinct(train.num_types(), eligible, n, rng, [&](TypeId candidate) {
    return candidate == t || train.contains(e, candidate);
  });
}

SampledNegatives sample_all_negatives(std::span<const Fact> positives, const KBSnapshot& train,
                                      const NegativeConfig& cfg, std::uint64_t stream_tag) {
  cfg.validate();
  SampledNegatives out;
  out.entities.resize(positives.size());
  out.types.resize(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Fact& f = positives[i];
    std::uint64_t pair_key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(f.entity)) << 32) |
                             static_cast<std::uint32_t>(f.type);
    Rng rng(mix_seed(cfg.seed, stream_tag, pair_key, kNegativeStreamSalt));
    out.entities[i] = sample_negative_entities(f.entity, f.type, train, cfg.m, rng);
    out.types[i] = sample_negative_types(f.entity, f.type, train, cfg.n, rng);
  }
  return out;
}

}  // namespace kbc
