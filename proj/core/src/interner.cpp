#include "incagg/interner.hpp"

#include "incagg/error.hpp"

namespace incagg {

std::uint32_t Interner::intern(std::string_view name) {
  std::string key(name);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<std::uint32_t> Interner::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::uint32_t Interner::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw LookupError("unknown identifier '" + std::string(name) + "'");
}

const std::string& Interner::name(std::uint32_t id) const {
  if (id >= names_.size()) throw LookupError("identifier id " + std::to_string(id) + " out of range");
  return names_[id];
}

}  // namespace incagg
