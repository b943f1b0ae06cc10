#include "kbc/snapshot.hpp"

#include <algorithm>
#include <fstream>

namespace kbc {
namespace {

std::uint64_t pack(EntityId e, TypeId t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e)) << 32) |
         static_cast<std::uint32_t>(t);
}

}  // namespace

KBSnapshot::KBSnapshot(std::shared_ptr<const Vocab> entities, std::shared_ptr<const Vocab> types,
                       std::vector<Fact> facts, std::string timestamp_label)
    : entity_vocab_(std::move(entities)),
      type_vocab_(std::move(types)),
      timestamp_label_(std::move(timestamp_label)),
      facts_(std::move(facts)) {
  std::sort(facts_.begin(), facts_.end());
  facts_.erase(std::unique(facts_.begin(), facts_.end()), facts_.end());
  index_.reserve(facts_.size() * 2);
  types_of_.resize(static_cast<std::size_t>(entity_vocab_->size()));
  counts_.assign(static_cast<std::size_t>(type_vocab_->size()), 0);
  for (const Fact& f : facts_) {
    check_ids(f.entity, f.type);
    index_.insert(pack(f.entity, f.type));
    types_of_[static_cast<std::size_t>(f.entity)].push_back(f.type);
    ++counts_[static_cast<std::size_t>(f.type)];
  }
}

void KBSnapshot::check_ids(EntityId e, TypeId t) const {
  if (e < 0 || e >= entity_vocab_->size()) {
    throw DataError("entity id " + std::to_string(e) + " out of range");
  }
  if (t < 0 || t >= type_vocab_->size()) {
    throw DataError("type id " + std::to_string(t) + " out of range");
  }
}

bool KBSnapshot::contains(EntityId e, TypeId t) const {
  check_ids(e, t);
  return index_.contains(pack(e, t));
}

std::span<const TypeId> KBSnapshot::types_of(EntityId e) const {
  if (e < 0 || e >= entity_vocab_->size()) {
    throw DataError("entity id " + std::to_string(e) + " out of range");
  }
  if (static_cast<std::size_t>(e) >= types_of_.size()) return {};
  return types_of_[static_cast<std::size_t>(e)];
}

std::int64_t KBSnapshot::count_for_type(TypeId t) const {
  if (t < 0 || t >= type_vocab_->size()) {
    throw DataError("type id " + std::to_string(t) + " out of range");
  }
  if (static_cast<std::size_t>(t) >= counts_.size()) return 0;
  return counts_[static_cast<std::size_t>(t)];
}

std::map<TypeId, std::int64_t> KBSnapshot::type_counts() const {
  std::map<TypeId, std::int64_t> out;
  for (std::size_t t = 0; t < counts_.size(); ++t) {
    if (counts_[t] > 0) out[static_cast<TypeId>(t)] = counts_[t];
  }
  return out;
}

namespace {

Fact intern_fact(std::string_view entity_sym, std::string_view type_sym,
                 const std::shared_ptr<Vocab>& entities, const std::shared_ptr<Vocab>& types,
                 VocabMode mode) {
  if (mode == VocabMode::kReject) {
    auto e = entities->find(entity_sym);
    if (!e) throw DataError("unknown entity symbol '" + std::string(entity_sym) + "'");
    auto t = types->find(type_sym);
    if (!t) throw DataError("unknown type symbol '" + std::string(type_sym) + "'");
    return {*e, *t};
  }
  return {entities->intern(entity_sym), types->intern(type_sym)};
}

}  // namespace

KBSnapshot load_snapshot(const std::vector<std::pair<std::string, std::string>>& fact_symbols,
                         const std::shared_ptr<Vocab>& entities,
                         const std::shared_ptr<Vocab>& types, VocabMode mode,
                         std::string timestamp_label) {
  std::vector<Fact> facts;
  facts.reserve(fact_symbols.size());
  for (const auto& [e, t] : fact_symbols) {
    facts.push_back(intern_fact(e, t, entities, types, mode));
  }
  return KBSnapshot(entities, types, std::move(facts), std::move(timestamp_label));
}

KBSnapshot load_snapshot_stream(std::istream& in, const std::shared_ptr<Vocab>& entities,
                                const std::shared_ptr<Vocab>& types, VocabMode mode,
                                std::string timestamp_label) {
  std::vector<Fact> facts;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError("malformed fact record at line " + std::to_string(line_no));
    }
    std::string_view view(line);
    facts.push_back(intern_fact(view.substr(0, tab), view.substr(tab + 1), entities, types, mode));
  }
  return KBSnapshot(entities, types, std::move(facts), std::move(timestamp_label));
}

KBSnapshot load_snapshot_file(const std::filesystem::path& path,
                              const std::shared_ptr<Vocab>& entities,
                              const std::shared_ptr<Vocab>& types, VocabMode mode) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open facts file: " + path.string());
  try {
    return load_snapshot_stream(in, entities, types, mode, path.filename().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<Fact> diff_snapshots(const KBSnapshot& train, const KBSnapshot& test) {
  if (train.entity_vocab() != test.entity_vocab() || train.type_vocab() != test.type_vocab()) {
    throw DataError("snapshots do not share vocabularies");
  }
  std::vector<Fact> out;
  std::set_difference(test.facts().begin(), test.facts().end(), train.facts().begin(),
                      train.facts().end(), std::back_inserter(out));
  return out;
}

}  // namespace kbc
