#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kbc/vocab.hpp"

namespace kbc {

struct Fact {
  EntityId entity;
  TypeId type;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

enum class VocabMode { kExtend, kReject };

// Immutable set of observed (entity, type) facts at one point in time.
// Safe for concurrent reads once constructed.
class KBSnapshot {
 public:
  KBSnapshot(std::shared_ptr<const Vocab> entities, std::shared_ptr<const Vocab> types,
             std::vector<Fact> facts, std::string timestamp_label);

  // True iff (e, t) is an observed fact. Ids must be valid in the vocabs.
  bool contains(EntityId e, TypeId t) const;

  // Facts sorted by (entity, type), deduplicated.
  const std::vector<Fact>& facts() const { return facts_; }
  std::int64_t num_facts() const { return static_cast<std::int64_t>(facts_.size()); }

  // Observed types of one entity, ascending. Empty for entities without facts.
  std::span<const TypeId> types_of(EntityId e) const;

  // Number of facts (= distinct entities) observed for one type.
  std::int64_t count_for_type(TypeId t) const;

  // Fact count per type; types with zero facts are absent.
  std::map<TypeId, std::int64_t> type_counts() const;

  std::int32_t num_entities() const { return entity_vocab_->size(); }
  std::int32_t num_types() const { return type_vocab_->size(); }
  const std::shared_ptr<const Vocab>& entity_vocab() const { return entity_vocab_; }
  const std::shared_ptr<const Vocab>& type_vocab() const { return type_vocab_; }
  const std::string& timestamp_label() const { return timestamp_label_; }

 private:
  void check_ids(EntityId e, TypeId t) const;

  std::shared_ptr<const Vocab> entity_vocab_;
  std::shared_ptr<const Vocab> type_vocab_;
  std::string timestamp_label_;
  std::vector<Fact> facts_;
  std::unordered_set<std::uint64_t> index_;
  std::vector<std::vector<TypeId>> types_of_;
  std::vector<std::int64_t> counts_;
};

// Builds a snapshot from symbol pairs, interning through the shared vocabs.
// In reject mode an unseen symbol raises a DataError.
KBSnapshot load_snapshot(const std::vector<std::pair<std::string, std::string>>& facts,
                         const std::shared_ptr<Vocab>& entities,
                         const std::shared_ptr<Vocab>& types,
                         VocabMode mode = VocabMode::kExtend, std::string timestamp_label = "");

// Same, from a TSV stream of `entity<TAB>type` lines. Lines starting with '#'
// and blank lines are skipped; any other malformed line raises a DataError
// naming the line number.
KBSnapshot load_snapshot_stream(std::istream& in, const std::shared_ptr<Vocab>& entities,
                                const std::shared_ptr<Vocab>& types,
                                VocabMode mode = VocabMode::kExtend,
                                std::string timestamp_label = "");

KBSnapshot load_snapshot_file(const std::filesystem::path& path,
                              const std::shared_ptr<Vocab>& entities,
                              const std::shared_ptr<Vocab>& types,
                              VocabMode mode = VocabMode::kExtend);

// test.facts \ train.facts; deletions are ignored. Both snapshots must share
// the same vocab objects.
std::vector<Fact> diff_snapshots(const KBSnapshot& train, const KBSnapshot& test);

}  // namespace kbc
