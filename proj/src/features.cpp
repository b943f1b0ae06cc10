#include "kbc/features.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

namespace kbc {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TextVocabulary TextVocabulary::build(std::span<const std::pair<EntityId, std::string>> corpus,
                                     std::int64_t min_df) {
  TextVocabulary vocab;
  std::map<std::string, std::int64_t> df;
  std::unordered_set<EntityId> seen;
  for (const auto& [entity, text] : corpus) {
    if (!seen.insert(entity).second) {
      throw DataError("duplicate document for entity id " + std::to_string(entity));
    }
    ++vocab.num_documents_;
    std::unordered_set<std::string> in_doc;
    for (std::string& tok : tokenize(text)) in_doc.insert(std::move(tok));
    for (const std::string& tok : in_doc) ++df[tok];
  }
  // map iteration is lexicographic, so indices are assignment-order stable
  for (auto& [token, count] : df) {
    if (count < min_df) continue;
    std::uint32_t index = static_cast<std::uint32_t>(vocab.tokens_.size());
    vocab.tokens_.push_back(token);
    vocab.dfs_.push_back(count);
    vocab.index_.emplace(vocab.tokens_.back(), index);
  }
  return vocab;
}

std::optional<TextVocabulary::TokenInfo> TextVocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return TokenInfo{it->second, dfs_[it->second]};
}

const std::string& TextVocabulary::token(std::uint32_t index) const {
  if (index >= tokens_.size()) throw DataError("token index out of range");
  return tokens_[index];
}

std::int64_t TextVocabulary::document_frequency(std::uint32_t index) const {
  if (index >= dfs_.size()) throw DataError("token index out of range");
  return dfs_[index];
}

double TextVocabulary::idf(std::uint32_t index) const {
  return std::log(static_cast<double>(1 + num_documents_) /
                  static_cast<double>(1 + document_frequency(index))) +
         1.0;
}

SparseVector tfidf_vector(std::string_view text, const TextVocabulary& vocab) {
  std::map<std::uint32_t, std::int64_t> tf;
  for (const std::string& tok : tokenize(text)) {
    if (auto info = vocab.find(tok)) ++tf[info->index];
  }
  SparseVector out(vocab.size());
  for (const auto& [index, count] : tf) {
    out.push_back(index, static_cast<double>(count) * vocab.idf(index));
  }
  out.l2_normalize();
  return out;
}

SparseVector type_feature_vector(EntityId e, const KBSnapshot& train,
                                 std::span<const TypeId> types) {
  SparseVector out(static_cast<std::uint32_t>(types.size()));
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (train.contains(e, types[i])) out.push_back(static_cast<std::uint32_t>(i), 1.0);
  }
  return out;
}

SparseVector type_one_hot(TypeId t, std::int32_t num_types) {
  if (t < 0 || t >= num_types) {
    throw DataError("type id " + std::to_string(t) + " out of range for one-hot dimension " +
                    std::to_string(num_types));
  }
  SparseVector out(static_cast<std::uint32_t>(num_types));
  out.push_back(static_cast<std::uint32_t>(t), 1.0);
  return out;
}

FeatureSpace FeatureSpace::make(std::span<const std::pair<char, std::uint32_t>> widths) {
  static constexpr std::string_view kOrder = "TDW";
  FeatureSpace space;
  std::size_t last_rank = 0;
  for (const auto& [name, width] : widths) {
    auto rank = kOrder.find(name);
    if (rank == std::string_view::npos) {
      throw DataError(std::string("unknown feature block '") + name + "'");
    }
    if (!space.blocks_.empty() && rank + 1 <= last_rank) {
      throw DataError("feature blocks must appear once, in T, D, W order");
    }
    last_rank = rank + 1;
    space.blocks_.push_back({name, space.total_dim_, width});
    space.total_dim_ += width;
  }
  return space;
}

const FeatureBlock* FeatureSpace::find(char name) const {
  for (const FeatureBlock& b : blocks_) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

SparseVector compose_entity_features(std::span<const std::pair<char, SparseVector>> blocks,
                                     const FeatureSpace& space) {
  std::vector<SparseVector::Entry> entries;
  std::vector<char> used;
  for (const auto& [name, vec] : blocks) {
    const FeatureBlock* block = space.find(name);
    if (block == nullptr) {
      throw DataError(std::string("block '") + name + "' not declared in feature space");
    }
    if (std::find(used.begin(), used.end(), name) != used.end()) {
      throw DataError(std::string("block '") + name + "' given twice");
    }
    used.push_back(name);
    if (vec.dim() != block->width) {
      throw DataError(std::string("block '") + name + "' has dimension " +
                      std::to_string(vec.dim()) + ", expected " + std::to_string(block->width));
    }
    for (const auto& e : vec.entries()) entries.push_back({block->offset + e.index, e.value});
  }
  return SparseVector::from_unsorted(std::move(entries), space.total_dim());
}

void FeatureMatrix::set_row(EntityId e, SparseVector row) {
  if (e < 0) throw DataError("negative entity id");
  if (row.dim() != space_.total_dim()) {
    throw DataError("feature row dimension " + std::to_string(row.dim()) +
                    " does not match feature space dimension " +
                    std::to_string(space_.total_dim()));
  }
  std::size_t idx = static_cast<std::size_t>(e);
  if (idx >= rows_.size()) {
    rows_.resize(idx + 1, SparseVector(space_.total_dim()));
    present_.resize(idx + 1, 0);
  }
  rows_[idx] = std::move(row);
  present_[idx] = 1;
}

const SparseVector& FeatureMatrix::row(EntityId e) const {
  if (e < 0) throw DataError("negative entity id");
  std::size_t idx = static_cast<std::size_t>(e);
  if (idx >= rows_.size()) return empty_row_;
  return rows_[idx];
}

bool FeatureMatrix::has_row(EntityId e) const {
  if (e < 0) return false;
  std::size_t idx = static_cast<std::size_t>(e);
  return idx < present_.size() && present_[idx] != 0;
}

}  // namespace kbc
