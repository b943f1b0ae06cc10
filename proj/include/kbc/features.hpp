#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kbc/snapshot.hpp"
#include "kbc/sparse.hpp"

namespace kbc {

// Lowercases and splits on any non-alphanumeric character; empty tokens dropped.
std::vector<std::string> tokenize(std::string_view text);

// Token index space with document frequencies, built once over a corpus and
// frozen. Tokens below min_df are pruned; indices follow lexicographic order.
class TextVocabulary {
 public:
  struct TokenInfo {
    std::uint32_t index;
    std::int64_t document_frequency;
  };

  static TextVocabulary build(std::span<const std::pair<EntityId, std::string>> corpus,
                              std::int64_t min_df = 2);

  std::optional<TokenInfo> find(std::string_view token) const;
  const std::string& token(std::uint32_t index) const;
  std::int64_t document_frequency(std::uint32_t index) const;

  // Smoothed idf: ln((1+N)/(1+df)) + 1.
  double idf(std::uint32_t index) const;

  std::int64_t num_documents() const { return num_documents_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(tokens_.size()); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> dfs_;
  std::int64_t num_documents_ = 0;
};

// tf-idf vector over the vocabulary, L2-normalized; raw term counts as tf,
// unknown tokens ignored. Zero when no token is in vocabulary.
SparseVector tfidf_vector(std::string_view text, const TextVocabulary& vocab);

// Boolean indicators over the selected type list: position i carries 1.0 iff
// (e, types[i]) is observed in the train snapshot.
SparseVector type_feature_vector(EntityId e, const KBSnapshot& train,
                                 std::span<const TypeId> types);

// One-hot type representation of dimension num_types.
SparseVector type_one_hot(TypeId t, std::int32_t num_types);

struct FeatureBlock {
  char name;  // 'T', 'D' or 'W'
  std::uint32_t offset;
  std::uint32_t width;
};

// Fixed concatenation layout of the entity feature blocks, in T, D, W order
// (present blocks only), with cumulative offsets.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  static FeatureSpace make(std::span<const std::pair<char, std::uint32_t>> widths);

  std::uint32_t total_dim() const { return total_dim_; }
  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  const FeatureBlock* find(char name) const;

  bool operator==(const FeatureSpace&) const = default;

 private:
  std::vector<FeatureBlock> blocks_;
  std::uint32_t total_dim_ = 0;
};

// Shifts each block vector by its offset and merges into one vector over the
// full space. Every named block must exist and match the declared width.
SparseVector compose_entity_features(std::span<const std::pair<char, SparseVector>> blocks,
                                     const FeatureSpace& space);

// Per-entity rows over one feature space; absent rows read as empty vectors.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(FeatureSpace space) : space_(std::move(space)) {
    empty_row_ = SparseVector(space_.total_dim());
  }

  void set_row(EntityId e, SparseVector row);
  const SparseVector& row(EntityId e) const;
  bool has_row(EntityId e) const;

  std::int32_t num_rows_allocated() const { return static_cast<std::int32_t>(rows_.size()); }
  const FeatureSpace& space() const { return space_; }
  std::uint32_t dim() const { return space_.total_dim(); }

 private:
  FeatureSpace space_;
  SparseVector empty_row_;
  std::vector<SparseVector> rows_;
  std::vector<char> present_;
};

}  // namespace kbc
