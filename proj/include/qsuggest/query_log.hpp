#pragma once

/// Query log storage with an inverted index from signed edge to sessions,
/// path counting and the support function.

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qsuggest/common.hpp"
#include "qsuggest/query_graph.hpp"
#include "qsuggest/text.hpp"

namespace qsuggest {

using SessionId = std::uint32_t;

/// Multiset of query sessions. Each session is kept in its original order
/// (duplicates removed) and as a sorted key set; postings map each signed
/// edge to the ascending ids of the sessions containing it.
class QueryLog {
 public:
  QueryLog() = default;

  SessionId add_session(std::span<SignedEdge const> edges) {
    auto const id = static_cast<SessionId>(sessions_.size());
    std::vector<SignedEdge> ordered;
    std::vector<std::uint32_t> keys;
    for (auto e : edges) {
      if (std::find(keys.begin(), keys.end(), e.key()) != keys.end()) continue;
      keys.push_back(e.key());
      ordered.push_back(e);
    }
    std::sort(keys.begin(), keys.end());
    for (auto k : keys) {
      if (k >= postings_.size()) postings_.resize(k + 1);
      postings_[k].push_back(id);
    }
    sessions_.push_back(std::move(ordered));
    keys_.push_back(std::move(keys));
    return id;
  }

  SessionId add_session(QuerySession const& s) { return add_session(s.edges()); }
  SessionId add_session(std::initializer_list<SignedEdge> edges) {
    return add_session(std::span<SignedEdge const>(edges.begin(), edges.size()));
  }

  std::size_t size() const noexcept { return sessions_.size(); }
  bool empty() const noexcept { return sessions_.empty(); }

  std::span<SignedEdge const> session(SessionId id) const { return sessions_.at(id); }
  /// Sorted signed-edge keys of a session.
  std::span<std::uint32_t const> session_keys(SessionId id) const { return keys_.at(id); }

  bool contains(SessionId id, SignedEdge e) const {
    auto const& k = keys_[id];
    return std::binary_search(k.begin(), k.end(), e.key());
  }

  /// Ascending ids of the sessions containing `e`.
  std::span<SessionId const> posting(SignedEdge e) const {
    auto const k = e.key();
    if (k >= postings_.size()) return {};
    return postings_[k];
  }

  bool positive_only() const {
    for (auto const& s : sessions_)
      for (auto e : s)
        if (e.negative()) return false;
    return true;
  }

  /// count(S) = |{w : S ⊆ w}|; count(∅) = |W|.
  std::size_t count(std::span<SignedEdge const> edges) const {
    if (edges.empty()) return size();
    std::vector<std::span<SessionId const>> lists;
    for (auto e : edges) lists.push_back(posting(e));
    std::sort(lists.begin(), lists.end(), [](auto const& a, auto const& b) { return a.size() < b.size(); });
    if (lists.front().empty()) return 0;
    std::vector<SessionId> acc(lists.front().begin(), lists.front().end());
    for (std::size_t i = 1; i < lists.size() && !acc.empty(); ++i) acc = intersect(acc, lists[i]);
    return acc.size();
  }
  std::size_t count(std::initializer_list<SignedEdge> edges) const {
    return count(std::span<SignedEdge const>(edges.begin(), edges.size()));
  }

  /// supp(e, S) = count(S ∪ {+e}) / count(S). The denominator is zero when no
  /// session contains S.
  Fraction supp(EdgeTypeId e, std::span<SignedEdge const> subset) const {
    std::vector<SignedEdge> with(subset.begin(), subset.end());
    with.push_back(SignedEdge::pos(e));
    return {count(with), count(subset)};
  }
  Fraction supp(EdgeTypeId e, std::initializer_list<SignedEdge> subset) const {
    return supp(e, std::span<SignedEdge const>(subset.begin(), subset.end()));
  }

  static std::vector<SessionId> intersect(std::span<SessionId const> a, std::span<SessionId const> b) {
    std::vector<SessionId> out;
    out.reserve(std::min(a.size(), b.size()));
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  /// Sessions as key sets, for multiset comparison.
  std::vector<std::vector<std::uint32_t>> sorted_sessions() const {
    auto out = keys_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::vector<SignedEdge>> sessions_;
  std::vector<std::vector<std::uint32_t>> keys_;
  std::vector<std::vector<SessionId>> postings_;
};

// ---------------------------------------------------------------------------
// Log files: one session per line, blank-separated edge type names, `~`
// prefix for a negative edge.

enum class Vocabulary {
  strict,  // unknown names are an error
  extend,  // unknown names are interned
};

inline QueryLog read_log(std::istream& in, EdgeTypeTable& vocab, Vocabulary policy,
                         std::string const& source = "log", bool allow_negative = true) {
  QueryLog log;
  std::string line;
  std::size_t lineno = 0;
  std::vector<SignedEdge> session;
  while (std::getline(in, line)) {
    ++lineno;
    auto const toks = tokens(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    session.clear();
    for (auto tok : toks) {
      bool const negative = tok.front() == '~';
      if (negative) {
        if (!allow_negative) throw ParseError(source, lineno, "negative edge '" + std::string(tok) + "' not allowed here");
        tok.remove_prefix(1);
      }
      if (tok.empty()) throw ParseError(source, lineno, "empty edge type token");
      EdgeTypeId id;
      if (policy == Vocabulary::extend) {
        id = vocab.intern(tok);
      } else if (auto found = vocab.find(tok)) {
        id = *found;
      } else {
        throw ParseError(source, lineno, "unknown edge type '" + std::string(tok) + "'");
      }
      session.push_back({id, negative ? Sign::negative : Sign::positive});
    }
    log.add_session(session);
  }
  return log;
}

inline QueryLog load_log(std::string const& path, EdgeTypeTable& vocab,
                         Vocabulary policy = Vocabulary::extend) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_log(in, vocab, policy, path);
}

/// Loads against a fixed vocabulary (typically a data graph's edge types).
inline QueryLog load_log(std::string const& path, EdgeTypeTable const& vocab) {
  auto copy = vocab;
  return load_log(path, copy, Vocabulary::strict);
}

inline void write_log(std::ostream& out, QueryLog const& log, EdgeTypeTable const& vocab) {
  for (SessionId i = 0; i < log.size(); ++i) {
    bool first = true;
    for (auto e : log.session(i)) {
      if (!first) out << ' ';
      out << format_signed(e, vocab);
      first = false;
    }
    out << '\n';
  }
}

inline void save_log(QueryLog const& log, std::string const& path, EdgeTypeTable const& vocab) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_log(out, log, vocab);
  if (!out) throw Error("write failed: " + path);
}

/// Positive-edge sets used verbatim as sessions (one per line, no pruning).
inline QueryLog import_positive_sets(std::istream& in, EdgeTypeTable const& vocab,
                                     std::string const& source = "positive sets") {
  auto copy = vocab;
  return read_log(in, copy, Vocabulary::strict, source, /*allow_negative=*/false);
}

inline QueryLog import_positive_sets(std::string const& path, EdgeTypeTable const& vocab) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return import_positive_sets(in, vocab, path);
}

}  // namespace qsuggest
