#pragma once

/// Shared vocabulary types: strong ids, symbol tables, fractions and the
/// exception hierarchy used throughout qsuggest.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qsuggest {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; carries the 1-based line number when one applies.
class ParseError : public Error {
 public:
  ParseError(std::string const& source, std::size_t line, std::string const& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operation not permitted in the current state (pending connection, closed
/// session, stale suggestion batch, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Strong ids

template <class Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr auto operator<=>(Id const&) const = default;
};

using NodeIndex = Id<struct NodeIndexTag>;
using NodeTypeId = Id<struct NodeTypeTag>;
using EdgeTypeId = Id<struct EdgeTypeTag>;

// ---------------------------------------------------------------------------
// Symbol table: dense interning of names to ids.

template <class IdT>
class SymbolTable {
 public:
  IdT intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return IdT(it->second);
    auto const id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return IdT(id);
  }

  std::optional<IdT> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return IdT(it->second);
  }

  IdT at(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw NotFoundError("unknown symbol '" + std::string(name) + "'");
  }

  std::string const& name(IdT id) const { return names_.at(id.value); }
  std::size_t size() const noexcept { return names_.size(); }
  bool contains(IdT id) const noexcept { return id.value < names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

using EdgeTypeTable = SymbolTable<EdgeTypeId>;
using NodeTypeTable = SymbolTable<NodeTypeId>;

// ---------------------------------------------------------------------------

/// Exact ratio of two counts. `value()` is 0 for an empty denominator.
struct Fraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;

  double value() const noexcept {
    return denominator == 0 ? 0.0
                            : static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  bool defined() const noexcept { return denominator != 0; }
};

/// splitmix64 finalizer; used to derive independent RNG streams from a seed.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t ordinal) noexcept {
  return mix64(seed ^ mix64(ordinal + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, bound) from a 64-bit engine, by rejection. Used
/// instead of std::uniform_int_distribution so results do not depend on the
/// standard library implementation.
template <class Engine>
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  if (bound <= 1) return 0;
  std::uint64_t const limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  std::uint64_t x = 0;
  do {
    x = engine();
  } while (x >= limit);
  return x % bound;
}

}  // namespace qsuggest

template <class Tag>
struct std::hash<qsuggest::Id<Tag>> {
  std::size_t operator()(qsuggest::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
