#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kbc {

// Latent-cluster corpus generator for desk-scale experiments. Every entity
// belongs to one cluster; a cluster fixes the entity's full type set and the
// token distribution of its description. A seeded fraction of the facts is
// hidden from the train snapshot and shows up only in the test snapshot.
struct SynthConfig {
  std::int64_t entities = 0;
  std::int64_t types = 0;
  std::int64_t clusters = 0;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  std::int32_t tokens_per_doc = 30;
  // probability a document token comes from the shared pool instead of the
  // cluster signature
  double text_noise = 0.3;

  void validate() const;
};

struct SynthOutput {
  std::vector<std::pair<std::string, std::string>> train_facts;
  std::vector<std::pair<std::string, std::string>> test_facts;
  std::vector<std::pair<std::string, std::string>> documents;  // entity -> text
};

SynthOutput generate_synthetic(const SynthConfig& cfg);

}  // namespace kbc
