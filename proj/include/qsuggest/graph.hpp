#pragma once

/// Data graph storage, the schema index derived from it, and the
/// neighbourhood queries (incident / neighbouring edge types) that candidate
/// generation is built on.

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qsuggest/common.hpp"
#include "qsuggest/text.hpp"

namespace qsuggest {

struct NodeRecord {
  std::string id;
  std::string name;
  std::string domain;
  std::vector<NodeTypeId> types;  // sorted, non-empty
};

struct EdgeRecord {
  NodeIndex src;
  NodeIndex dst;
  EdgeTypeId etype;
};

/// A (source type, edge type, target type) combination witnessed by at least
/// one edge instance.
struct SchemaTriple {
  NodeTypeId source;
  EdgeTypeId etype;
  NodeTypeId target;

  auto operator<=>(SchemaTriple const&) const = default;
};

/// Schema constraints derived from instance data.
class SchemaIndex {
 public:
  struct EdgeTypeEnds {
    std::vector<NodeTypeId> source_types;  // sorted
    std::vector<NodeTypeId> target_types;  // sorted
  };
  struct NodeTypeEdges {
    std::vector<EdgeTypeId> outgoing;  // sorted
    std::vector<EdgeTypeId> incoming;  // sorted
    std::vector<EdgeTypeId> incident;  // outgoing ∪ incoming, sorted
  };

  SchemaIndex() = default;

  SchemaIndex(std::span<NodeRecord const> nodes, std::span<EdgeRecord const> edges,
              std::size_t node_type_count, std::size_t edge_type_count)
      : edge_ends_(edge_type_count), node_edges_(node_type_count) {
    std::set<SchemaTriple> triples;
    for (auto const& e : edges) {
      for (auto s : nodes[e.src.value].types)
        for (auto t : nodes[e.dst.value].types) triples.insert({s, e.etype, t});
    }
    triples_.assign(triples.begin(), triples.end());
    for (auto const& tr : triples_) {
      edge_ends_[tr.etype.value].source_types.push_back(tr.source);
      edge_ends_[tr.etype.value].target_types.push_back(tr.target);
      node_edges_[tr.source.value].outgoing.push_back(tr.etype);
      node_edges_[tr.target.value].incoming.push_back(tr.etype);
    }
    for (auto& ends : edge_ends_) {
      sort_unique(ends.source_types);
      sort_unique(ends.target_types);
    }
    for (auto& ne : node_edges_) {
      sort_unique(ne.outgoing);
      sort_unique(ne.incoming);
      std::set_union(ne.outgoing.begin(), ne.outgoing.end(), ne.incoming.begin(),
                     ne.incoming.end(), std::back_inserter(ne.incident));
    }
  }

  EdgeTypeEnds const& ends(EdgeTypeId e) const { return edge_ends_.at(e.value); }
  NodeTypeEdges const& edges_of(NodeTypeId t) const { return node_edges_.at(t.value); }
  std::span<SchemaTriple const> triples() const noexcept { return triples_; }
  bool empty() const noexcept { return triples_.empty(); }

  bool witnessed(NodeTypeId source, EdgeTypeId etype, NodeTypeId target) const {
    return std::binary_search(triples_.begin(), triples_.end(), SchemaTriple{source, etype, target});
  }

  /// Target types reachable from `source` over `etype`.
  std::vector<NodeTypeId> targets_of(NodeTypeId source, EdgeTypeId etype) const {
    std::vector<NodeTypeId> out;
    auto lo = std::lower_bound(triples_.begin(), triples_.end(),
                               SchemaTriple{source, etype, NodeTypeId(0)});
    for (; lo != triples_.end() && lo->source == source && lo->etype == etype; ++lo)
      out.push_back(lo->target);
    return out;
  }

  /// Source types that reach `target` over `etype`.
  std::vector<NodeTypeId> sources_of(NodeTypeId target, EdgeTypeId etype) const {
    std::vector<NodeTypeId> out;
    for (auto s : ends(etype).source_types)
      if (witnessed(s, etype, target)) out.push_back(s);
    return out;
  }

  friend bool operator==(SchemaIndex const& a, SchemaIndex const& b) {
    return a.triples_ == b.triples_;
  }

 private:
  template <class T>
  static void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  std::vector<SchemaTriple> triples_;  // sorted
  std::vector<EdgeTypeEnds> edge_ends_;
  std::vector<NodeTypeEdges> node_edges_;
};

// ---------------------------------------------------------------------------

struct EntityName {
  NodeIndex node;
  auto operator<=>(EntityName const&) const = default;
};

struct TypeLabel {
  NodeTypeId type;
  auto operator<=>(TypeLabel const&) const = default;
};

/// Label of a query-graph node: a specific entity or a node type.
using QueryNodeLabel = std::variant<EntityName, TypeLabel>;

/// Node type names that denote literal values; such nodes are refused.
inline bool is_atomic_type_name(std::string_view name) {
  static constexpr std::array<std::string_view, 11> kLiteral = {
      "int", "integer", "float", "double", "decimal", "number",
      "string", "boolean", "bool", "date", "datetime"};
  if (name.starts_with("xsd:")) return true;
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::find(kLiteral.begin(), kLiteral.end(), lower) != kLiteral.end();
}

/// Directed multigraph of typed entities with a derived schema index.
/// Immutable once built.
class DataGraph {
 public:
  class Builder;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  NodeRecord const& node(NodeIndex v) const { return nodes_.at(v.value); }
  std::span<NodeRecord const> nodes() const noexcept { return nodes_; }
  std::span<EdgeRecord const> edges() const noexcept { return edges_; }

  NodeTypeTable const& node_types() const noexcept { return node_types_; }
  EdgeTypeTable const& edge_types() const noexcept { return edge_types_; }
  SchemaIndex const& schema() const noexcept { return schema_; }

  std::optional<NodeIndex> find_node(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex node_at(std::string_view id) const {
    if (auto v = find_node(id)) return *v;
    throw NotFoundError("unknown node id '" + std::string(id) + "'");
  }

  /// Resolves a node by id, falling back to its (unique) display name.
  std::optional<NodeIndex> find_node_by_id_or_name(std::string_view key) const {
    if (auto v = find_node(key)) return v;
    auto it = by_name_.find(std::string(key));
    if (it == by_name_.end() || it->second.size() != 1) return std::nullopt;
    return it->second.front();
  }

  /// Instances of a node type, in load order.
  std::span<NodeIndex const> instances(NodeTypeId t) const { return instances_.at(t.value); }

  /// (neighbour, edge type, outgoing?) for every edge touching v.
  struct Adjacent {
    NodeIndex other;
    EdgeTypeId etype;
    bool outgoing;
  };
  std::span<Adjacent const> adjacent(NodeIndex v) const { return adjacency_.at(v.value); }

  /// Domain name -> node types appearing in that domain (sorted by name).
  std::map<std::string, std::vector<NodeTypeId>> const& domains() const noexcept {
    return domains_;
  }

  /// IE(v): edge types incident on v in either direction, sorted by id.
  std::span<EdgeTypeId const> incident_edge_types(NodeIndex v) const {
    return incident_.at(v.value);
  }

  std::span<EdgeTypeId const> incident_edge_types(std::string_view id) const {
    return incident_edge_types(node_at(id));
  }

  /// NE(label): IE(v) for an entity; union of IE over all instances for a type.
  std::span<EdgeTypeId const> neighboring_candidate_edges(QueryNodeLabel const& label) const {
    validate(label);
    if (auto const* entity = std::get_if<EntityName>(&label))
      return incident_edge_types(entity->node);
    return schema_.edges_of(std::get<TypeLabel>(label).type).incident;
  }

  /// Node types a label stands for.
  std::span<NodeTypeId const> label_types(QueryNodeLabel const& label) const {
    validate(label);
    if (auto const* entity = std::get_if<EntityName>(&label)) return nodes_[entity->node.value].types;
    return {&std::get<TypeLabel>(label).type, 1};
  }

  void validate(QueryNodeLabel const& label) const {
    if (auto const* entity = std::get_if<EntityName>(&label)) {
      if (entity->node.value >= nodes_.size())
        throw NotFoundError("unknown node index " + std::to_string(entity->node.value));
    } else if (!node_types_.contains(std::get<TypeLabel>(label).type)) {
      throw NotFoundError("unknown node type id " +
                          std::to_string(std::get<TypeLabel>(label).type.value));
    }
  }

  /// Parses "name"/"type" style textual labels: kind is "name" or "type".
  QueryNodeLabel resolve_label(std::string_view kind, std::string_view text) const {
    if (kind == "type") {
      auto t = node_types_.find(text);
      if (!t) throw NotFoundError("unknown node type '" + std::string(text) + "'");
      return TypeLabel{*t};
    }
    if (kind == "name") {
      auto v = find_node_by_id_or_name(text);
      if (!v) throw NotFoundError("unknown node '" + std::string(text) + "'");
      return EntityName{*v};
    }
    throw InvalidArgument("label kind must be 'name' or 'type', got '" + std::string(kind) + "'");
  }

  std::string label_text(QueryNodeLabel const& label) const {
    if (auto const* entity = std::get_if<EntityName>(&label)) return nodes_.at(entity->node.value).id;
    return node_types_.name(std::get<TypeLabel>(label).type);
  }

  static char const* label_kind(QueryNodeLabel const& label) {
    return std::holds_alternative<EntityName>(label) ? "name" : "type";
  }

  /// Can an edge of `etype` run from a node labelled `src` to one labelled `dst`?
  bool admits(QueryNodeLabel const& src, EdgeTypeId etype, QueryNodeLabel const& dst) const {
    for (auto s : label_types(src))
      for (auto t : label_types(dst))
        if (schema_.witnessed(s, etype, t)) return true;
    return false;
  }

 private:
  friend class Builder;

  NodeTypeTable node_types_;
  EdgeTypeTable edge_types_;
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<std::string, NodeIndex> by_id_;
  std::unordered_map<std::string, std::vector<NodeIndex>> by_name_;
  std::vector<std::vector<NodeIndex>> instances_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::vector<std::vector<EdgeTypeId>> incident_;
  std::map<std::string, std::vector<NodeTypeId>> domains_;
  SchemaIndex schema_;
};

/// Incremental construction; `build()` derives all indexes.
class DataGraph::Builder {
 public:
  NodeIndex add_node(std::string id, std::string name, std::string domain,
                     std::vector<std::string> const& types) {
    if (types.empty()) throw InvalidArgument("node '" + id + "' has no node type");
    if (g_.by_id_.contains(id)) throw InvalidArgument("duplicate node id '" + id + "'");
    NodeRecord rec{std::move(id), std::move(name), std::move(domain), {}};
    for (auto const& t : types) {
      if (t.empty()) throw InvalidArgument("node '" + rec.id + "' has an empty node type");
      if (is_atomic_type_name(t))
        throw InvalidArgument("node '" + rec.id + "' has atomic value type '" + t + "'");
      rec.types.push_back(g_.node_types_.intern(t));
    }
    std::sort(rec.types.begin(), rec.types.end());
    rec.types.erase(std::unique(rec.types.begin(), rec.types.end()), rec.types.end());
    NodeIndex const v(static_cast<std::uint32_t>(g_.nodes_.size()));
    g_.by_id_.emplace(rec.id, v);
    g_.by_name_[rec.name].push_back(v);
    g_.nodes_.push_back(std::move(rec));
    return v;
  }

  void add_edge(std::string_view src, std::string_view dst, std::string_view etype) {
    auto s = g_.find_node(src);
    if (!s) throw NotFoundError("dangling edge endpoint '" + std::string(src) + "'");
    auto d = g_.find_node(dst);
    if (!d) throw NotFoundError("dangling edge endpoint '" + std::string(dst) + "'");
    if (etype.empty()) throw InvalidArgument("empty edge type");
    g_.edges_.push_back({*s, *d, g_.edge_types_.intern(etype)});
  }

  /// Registers an edge type without an instance.
  EdgeTypeId declare_edge_type(std::string_view etype) { return g_.edge_types_.intern(etype); }
  /// Registers a node type without an instance.
  NodeTypeId declare_node_type(std::string_view type) { return g_.node_types_.intern(type); }

  DataGraph build() && {
    auto const n = g_.nodes_.size();
    g_.instances_.assign(g_.node_types_.size(), {});
    g_.adjacency_.assign(n, {});
    g_.incident_.assign(n, {});
    for (std::uint32_t i = 0; i < n; ++i) {
      for (auto t : g_.nodes_[i].types) g_.instances_[t.value].push_back(NodeIndex(i));
      auto& types = g_.domains_[g_.nodes_[i].domain];
      types.insert(types.end(), g_.nodes_[i].types.begin(), g_.nodes_[i].types.end());
    }
    for (auto const& e : g_.edges_) {
      g_.adjacency_[e.src.value].push_back({e.dst, e.etype, true});
      g_.adjacency_[e.dst.value].push_back({e.src, e.etype, false});
      g_.incident_[e.src.value].push_back(e.etype);
      g_.incident_[e.dst.value].push_back(e.etype);
    }
    for (auto& ie : g_.incident_) {
      std::sort(ie.begin(), ie.end());
      ie.erase(std::unique(ie.begin(), ie.end()), ie.end());
    }
    for (auto& [domain, types] : g_.domains_) {
      std::sort(types.begin(), types.end(), [this](NodeTypeId a, NodeTypeId b) {
        return g_.node_types_.name(a) < g_.node_types_.name(b);
      });
      types.erase(std::unique(types.begin(), types.end()), types.end());
    }
    g_.schema_ = SchemaIndex(g_.nodes_, g_.edges_, g_.node_types_.size(), g_.edge_types_.size());
    return std::move(g_);
  }

 private:
  DataGraph g_;
};

// ---------------------------------------------------------------------------
// Loading

namespace detail {

template <class Fn>
void for_each_record(std::istream& in, std::string const& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      fn(split(line, '\t'), lineno);
    } catch (ParseError const&) {
      throw;
    } catch (Error const& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
}

}  // namespace detail

/// Reads the tab-separated node and edge streams.
inline DataGraph load_data_graph(std::istream& nodes, std::istream& edges,
                                 std::string const& nodes_name = "nodes",
                                 std::string const& edges_name = "edges") {
  DataGraph::Builder builder;
  detail::for_each_record(nodes, nodes_name, [&](std::vector<std::string_view> const& f, std::size_t line) {
    if (f.size() != 4)
      throw ParseError(nodes_name, line, "expected 4 tab-separated fields, got " + std::to_string(f.size()));
    std::vector<std::string> types;
    for (auto t : split(f[3], ',')) types.emplace_back(trim(t));
    builder.add_node(std::string(f[0]), std::string(f[1]), std::string(f[2]), types);
  });
  detail::for_each_record(edges, edges_name, [&](std::vector<std::string_view> const& f, std::size_t line) {
    if (f.size() != 3)
      throw ParseError(edges_name, line, "expected 3 tab-separated fields, got " + std::to_string(f.size()));
    builder.add_edge(f[0], f[1], f[2]);
  });
  return std::move(builder).build();
}

inline DataGraph load_data_graph(std::string const& nodes_path, std::string const& edges_path) {
  std::ifstream nodes(nodes_path);
  if (!nodes) throw NotFoundError("cannot open " + nodes_path);
  std::ifstream edges(edges_path);
  if (!edges) throw NotFoundError("cannot open " + edges_path);
  return load_data_graph(nodes, edges, nodes_path, edges_path);
}

inline void write_data_graph(DataGraph const& g, std::ostream& nodes, std::ostream& edges) {
  nodes << "# id\tname\tdomain\ttypes\n";
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    auto const& n = g.node(NodeIndex{i});
    nodes << n.id << '\t' << n.name << '\t' << n.domain << '\t';
    for (std::size_t t = 0; t < n.types.size(); ++t) nodes << (t ? "," : "") << g.node_types().name(n.types[t]);
    nodes << '\n';
  }
  edges << "# src\tdst\tetype\n";
  for (auto const& e : g.edges())
    edges << g.node(e.src).id << '\t' << g.node(e.dst).id << '\t' << g.edge_types().name(e.etype) << '\n';
}

// ---------------------------------------------------------------------------
// Passive-mode candidates

/// An edge type allowed between two labels, with its permitted directions.
struct PassiveCandidate {
  EdgeTypeId etype;
  bool forward = false;   // a -> b
  bool backward = false;  // b -> a

  auto operator<=>(PassiveCandidate const&) const = default;
};

/// C_P = NE(a) ∩ NE(b), keeping types with at least one witnessed direction.
inline std::vector<PassiveCandidate> passive_candidates(DataGraph const& g, QueryNodeLabel const& a,
                                                        QueryNodeLabel const& b) {
  auto const na = g.neighboring_candidate_edges(a);
  auto const nb = g.neighboring_candidate_edges(b);
  std::vector<EdgeTypeId> common;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
  std::vector<PassiveCandidate> out;
  for (auto e : common) {
    PassiveCandidate c{e, g.admits(a, e, b), g.admits(b, e, a)};
    if (c.forward || c.backward) out.push_back(c);
  }
  return out;
}

}  // namespace qsuggest
