#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kbc/errors.hpp"

namespace kbc {

using EntityId = std::int32_t;
using TypeId = std::int32_t;

// Interns external string symbols to dense ids, contiguous from 0.
// The symbol<->id mapping is a bijection.
class Vocab {
 public:
  std::int32_t intern(std::string_view symbol) {
    auto it = index_.find(symbol);
    if (it != index_.end()) return it->second;
    std::int32_t id = static_cast<std::int32_t>(symbols_.size());
    symbols_.emplace_back(symbol);
    index_.emplace(symbols_.back(), id);
    return id;
  }

  std::optional<std::int32_t> find(std::string_view symbol) const {
    auto it = index_.find(symbol);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& symbol(std::int32_t id) const {
    if (id < 0 || id >= size()) {
      throw DataError("id " + std::to_string(id) + " out of range for vocabulary of size " +
                      std::to_string(size()));
    }
    return symbols_[static_cast<std::size_t>(id)];
  }

  std::int32_t size() const { return static_cast<std::int32_t>(symbols_.size()); }
  bool empty() const { return symbols_.empty(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::int32_t, Hash, std::equal_to<>> index_;
  std::vector<std::string> symbols_;
};

}  // namespace kbc
