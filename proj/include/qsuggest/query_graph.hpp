#pragma once

/// Query graphs, signed edges and query sessions.

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qsuggest/common.hpp"
#include "qsuggest/graph.hpp"
#include "qsuggest/text.hpp"

namespace qsuggest {

enum class Sign : std::uint8_t { positive = 0, negative = 1 };

/// An edge type as it appears in a session: accepted (+) or ignored (-).
struct SignedEdge {
  EdgeTypeId etype;
  Sign sign = Sign::positive;

  static SignedEdge pos(EdgeTypeId e) { return {e, Sign::positive}; }
  static SignedEdge neg(EdgeTypeId e) { return {e, Sign::negative}; }

  bool positive() const noexcept { return sign == Sign::positive; }
  bool negative() const noexcept { return sign == Sign::negative; }

  /// Dense key: 2 * etype + (negative ? 1 : 0).
  std::uint32_t key() const noexcept {
    return etype.value * 2 + (sign == Sign::negative ? 1U : 0U);
  }
  static SignedEdge from_key(std::uint32_t key) {
    return {EdgeTypeId(key / 2), (key & 1U) ? Sign::negative : Sign::positive};
  }

  auto operator<=>(SignedEdge const&) const = default;
};

/// Ordered, duplicate-free record of signed edges for one construction episode.
class QuerySession {
 public:
  QuerySession() = default;
  QuerySession(std::initializer_list<SignedEdge> edges) {
    for (auto e : edges) append(e);
  }

  /// Returns false (and changes nothing) if the signed edge is already present.
  bool append(SignedEdge e) {
    if (!keys_.insert(e.key()).second) return false;
    edges_.push_back(e);
    return true;
  }

  bool contains(SignedEdge e) const { return keys_.contains(e.key()); }
  /// True if the edge type is present with either sign.
  bool mentions(EdgeTypeId e) const {
    return contains(SignedEdge::pos(e)) || contains(SignedEdge::neg(e));
  }

  std::span<SignedEdge const> edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }

  std::size_t positive_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [](SignedEdge e) { return e.positive(); }));
  }

  friend bool operator==(QuerySession const& a, QuerySession const& b) { return a.edges_ == b.edges_; }

 private:
  std::vector<SignedEdge> edges_;
  std::unordered_set<std::uint32_t> keys_;
};

inline std::string format_signed(SignedEdge e, EdgeTypeTable const& names) {
  return (e.negative() ? "~" : "") + names.name(e.etype);
}

// ---------------------------------------------------------------------------

using LocalId = std::uint32_t;

struct QueryEdge {
  LocalId src;
  LocalId dst;
  EdgeTypeId etype;

  auto operator<=>(QueryEdge const&) const = default;
};

/// Connected directed multigraph over entity / type labels. Connectivity may
/// lapse only between `add_node` on a non-empty graph and the `add_edge`
/// that attaches the new node ("pending connection").
class QueryGraph {
 public:
  std::span<QueryNodeLabel const> nodes() const noexcept { return nodes_; }
  std::span<QueryEdge const> edges() const noexcept { return edges_; }
  QueryNodeLabel const& label(LocalId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  bool pending_connection() const noexcept { return pending_; }

  /// Appends a node. Fails while a previously added node is still unattached.
  LocalId add_node(DataGraph const& g, QueryNodeLabel label) {
    g.validate(label);
    if (pending_) throw StateError("a new node must be connected before adding another node");
    nodes_.push_back(label);
    pending_ = nodes_.size() > 1;
    return static_cast<LocalId>(nodes_.size() - 1);
  }

  /// Appends an edge after checking it against the schema.
  void add_edge(DataGraph const& g, LocalId src, LocalId dst, EdgeTypeId etype) {
    check_local(src);
    check_local(dst);
    if (!g.edge_types().contains(etype)) throw NotFoundError("unknown edge type id");
    auto const cp = passive_candidates(g, nodes_[src], nodes_[dst]);
    bool const ok = std::any_of(cp.begin(), cp.end(), [&](PassiveCandidate const& c) {
      return c.etype == etype && c.forward;
    });
    if (!ok)
      throw InvalidArgument("edge type '" + g.edge_types().name(etype) +
                            "' is not permitted between these nodes in this direction");
    append_edge(src, dst, etype);
  }

  /// Adds a node and the edge attaching it in one step (active-mode accept).
  LocalId attach_node(DataGraph const& g, LocalId anchor, EdgeTypeId etype, bool outgoing,
                      QueryNodeLabel label) {
    g.validate(label);
    check_local(anchor);
    if (pending_) throw StateError("graph is waiting for a connecting edge");
    nodes_.push_back(label);
    auto const fresh = static_cast<LocalId>(nodes_.size() - 1);
    if (outgoing)
      append_edge(anchor, fresh, etype);
    else
      append_edge(fresh, anchor, etype);
    return fresh;
  }

  /// Unchecked construction used by file readers and generators.
  LocalId push_node(QueryNodeLabel label) {
    nodes_.push_back(label);
    refresh_pending();
    return static_cast<LocalId>(nodes_.size() - 1);
  }
  void push_edge(LocalId src, LocalId dst, EdgeTypeId etype) {
    check_local(src);
    check_local(dst);
    append_edge(src, dst, etype);
  }

  bool connected() const { return component_count() <= 1; }

  std::size_t component_count() const {
    if (nodes_.empty()) return 0;
    std::vector<LocalId> parent(nodes_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](LocalId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t components = nodes_.size();
    for (auto const& e : edges_) {
      auto a = find(e.src), b = find(e.dst);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    return components;
  }

  friend bool operator==(QueryGraph const& a, QueryGraph const& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void check_local(LocalId id) const {
    if (id >= nodes_.size()) throw NotFoundError("unknown local node id " + std::to_string(id));
  }
  void append_edge(LocalId src, LocalId dst, EdgeTypeId etype) {
    edges_.push_back({src, dst, etype});
    refresh_pending();
  }
  void refresh_pending() { pending_ = !connected(); }

  std::vector<QueryNodeLabel> nodes_;
  std::vector<QueryEdge> edges_;
  bool pending_ = false;
};

/// Value-returning forms of the two passive-mode edits.
inline QueryGraph add_node(QueryGraph qg, DataGraph const& g, QueryNodeLabel label) {
  qg.add_node(g, label);
  return qg;
}

inline QueryGraph add_edge(QueryGraph qg, DataGraph const& g, LocalId src, LocalId dst, EdgeTypeId etype) {
  qg.add_edge(g, src, dst, etype);
  return qg;
}

// ---------------------------------------------------------------------------
// Query-graph files:
//   #nodes
//   <local_id>\t<name|type>\t<label>
//   #edges
//   <src>\t<dst>\t<etype>

inline QueryGraph read_query_graph(std::istream& in, DataGraph const& g,
                                   std::string const& source = "query graph") {
  QueryGraph qg;
  std::unordered_map<std::string, LocalId> local;
  enum class Section { none, nodes, edges } section = Section::none;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto const t = trim(line);
    if (t.empty()) continue;
    if (t == "#nodes") {
      section = Section::nodes;
      continue;
    }
    if (t == "#edges") {
      section = Section::edges;
      continue;
    }
    if (t.front() == '#') continue;
    auto const f = split(line, '\t');
    try {
      if (section == Section::nodes) {
        if (f.size() != 3) throw ParseError(source, lineno, "expected local_id, kind, label");
        std::string key(f[0]);
        if (local.contains(key)) throw ParseError(source, lineno, "duplicate local id '" + key + "'");
        local.emplace(key, qg.push_node(g.resolve_label(f[1], f[2])));
      } else if (section == Section::edges) {
        if (f.size() != 3) throw ParseError(source, lineno, "expected src, dst, etype");
        auto s = local.find(std::string(f[0]));
        auto d = local.find(std::string(f[1]));
        if (s == local.end() || d == local.end())
          throw ParseError(source, lineno, "edge references an undeclared local id");
        auto e = g.edge_types().find(f[2]);
        if (!e) throw ParseError(source, lineno, "unknown edge type '" + std::string(f[2]) + "'");
        qg.push_edge(s->second, d->second, *e);
      } else {
        throw ParseError(source, lineno, "record before #nodes header");
      }
    } catch (ParseError const&) {
      throw;
    } catch (Error const& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return qg;
}

inline QueryGraph load_query_graph(std::string const& path, DataGraph const& g) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_query_graph(in, g, path);
}

inline void write_query_graph(std::ostream& out, QueryGraph const& qg, DataGraph const& g) {
  out << "#nodes\n";
  for (LocalId i = 0; i < qg.node_count(); ++i)
    out << i << '\t' << DataGraph::label_kind(qg.label(i)) << '\t' << g.label_text(qg.label(i)) << '\n';
  out << "#edges\n";
  for (auto const& e : qg.edges())
    out << e.src << '\t' << e.dst << '\t' << g.edge_types().name(e.etype) << '\n';
}

}  // namespace qsuggest
