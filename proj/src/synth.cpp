#include "kbc/synth.hpp"

#include <algorithm>
#include <numeric>

#include "kbc/errors.hpp"
#include "kbc/rng.hpp"

namespace kbc {
namespace {

constexpr std::uint64_t kProfileSalt = 0x73796e2d70726f66ULL;
constexpr std::uint64_t kAssignSalt = 0x73796e2d61736e67ULL;
constexpr std::uint64_t kTextSalt = 0x73796e2d74657874ULL;
constexpr std::uint64_t kHoldoutSalt = 0x73796e2d686f6c64ULL;

constexpr std::int32_t kSignatureTokens = 20;
constexpr std::int32_t kSharedPoolTokens = 100;

std::string entity_symbol(std::int64_t e) { return "e" + std::to_string(e); }
std::string type_symbol(std::int64_t t) { return "/t" + std::to_string(t); }

}  // namespace

void SynthConfig::validate() const {
  if (entities < 1 || types < 1 || clusters < 1) {
    throw UsageError("entities, types and clusters must all be >= 1");
  }
  if (missing_rate < 0.0 || missing_rate > 1.0) {
    throw UsageError("missing-rate must lie in [0, 1]");
  }
  if (tokens_per_doc < 0) throw UsageError("tokens-per-doc must be >= 0");
  if (text_noise < 0.0 || text_noise > 1.0) throw UsageError("text-noise must lie in [0, 1]");
}

SynthOutput generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();

  // cluster profiles: type (c mod K) is forced into cluster c so every type
  // keeps coverage, plus Zipf-weighted extras up to 1 + types/5 total. The
  // skew gives a heavy-tailed type frequency distribution.
  Rng profile_rng(mix_seed(cfg.seed, kProfileSalt));
  std::vector<double> zipf_cdf(static_cast<std::size_t>(cfg.types));
  double mass = 0.0;
  for (std::int64_t t = 0; t < cfg.types; ++t) {
    mass += 1.0 / static_cast<double>(t + 1);
    zipf_cdf[static_cast<std::size_t>(t)] = mass;
  }
  auto draw_zipf_type = [&](Rng& rng) {
    double u = rng.next_double() * mass;
    auto it = std::lower_bound(zipf_cdf.begin(), zipf_cdf.end(), u);
    if (it == zipf_cdf.end()) --it;
    return static_cast<std::int64_t>(it - zipf_cdf.begin());
  };
  std::int64_t max_profile = std::min<std::int64_t>(cfg.types, std::max<std::int64_t>(2, 1 + cfg.types / 5));
  std::vector<std::vector<std::int64_t>> profile(static_cast<std::size_t>(cfg.clusters));
  for (std::int64_t c = 0; c < cfg.clusters; ++c) {
    std::int64_t want = max_profile <= 2 ? max_profile
                                         : 2 + static_cast<std::int64_t>(
                                                   profile_rng.below(static_cast<std::uint64_t>(max_profile - 1)));
    auto& types_of_c = profile[static_cast<std::size_t>(c)];
    types_of_c.push_back(c % cfg.types);
    std::int64_t attempts = 0;
    while (static_cast<std::int64_t>(types_of_c.size()) < want && attempts < 64 * want) {
      ++attempts;
      std::int64_t t = draw_zipf_type(profile_rng);
      if (std::find(types_of_c.begin(), types_of_c.end(), t) == types_of_c.end()) {
        types_of_c.push_back(t);
      }
    }
    std::sort(types_of_c.begin(), types_of_c.end());
  }

  // cluster token signatures drawn with replacement from a pool of 5*clusters
  // tokens, so nearby clusters share some vocabulary
  std::vector<std::vector<std::string>> signature(static_cast<std::size_t>(cfg.clusters));
  const std::uint64_t signature_pool = static_cast<std::uint64_t>(5 * cfg.clusters);
  for (std::int64_t c = 0; c < cfg.clusters; ++c) {
    for (std::int32_t j = 0; j < kSignatureTokens; ++j) {
      signature[static_cast<std::size_t>(c)].push_back(
          "w" + std::to_string(profile_rng.below(signature_pool)));
    }
  }

  Rng assign_rng(mix_seed(cfg.seed, kAssignSalt));
  std::vector<std::int64_t> cluster_of(static_cast<std::size_t>(cfg.entities));
  for (std::int64_t e = 0; e < cfg.entities; ++e) {
    cluster_of[static_cast<std::size_t>(e)] =
        static_cast<std::int64_t>(assign_rng.below(static_cast<std::uint64_t>(cfg.clusters)));
  }

  SynthOutput out;
  Rng text_rng(mix_seed(cfg.seed, kTextSalt));
  for (std::int64_t e = 0; e < cfg.entities; ++e) {
    const auto& sig = signature[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(e)])];
    std::string doc;
    for (std::int32_t j = 0; j < cfg.tokens_per_doc; ++j) {
      if (j > 0) doc.push_back(' ');
      if (text_rng.next_double() < cfg.text_noise) {
        doc += "g" + std::to_string(text_rng.below(kSharedPoolTokens));
      } else {
        doc += sig[text_rng.below(sig.size())];
      }
    }
    out.documents.emplace_back(entity_symbol(e), std::move(doc));
  }

  Rng holdout_rng(mix_seed(cfg.seed, kHoldoutSalt));
  for (std::int64_t e = 0; e < cfg.entities; ++e) {
    for (std::int64_t t : profile[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(e)])]) {
      out.test_facts.emplace_back(entity_symbol(e), type_symbol(t));
      if (holdout_rng.next_double() >= cfg.missing_rate) {
        out.train_facts.emplace_back(entity_symbol(e), type_symbol(t));
      }
    }
  }
  return out;
}

}  // namespace kbc
