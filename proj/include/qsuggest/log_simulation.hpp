#pragma once

/// Bootstrapping query logs when no real one exists: positive sessions
/// from data-graph statistics or entity co-occurrence windows, then negative
/// edges injected from the schema neighbourhood of each session.

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "qsuggest/apriori.hpp"
#include "qsuggest/graph.hpp"
#include "qsuggest/query_log.hpp"

namespace qsuggest {

struct SimulationConfig {
  std::size_t min_support = 1;      // absolute count, >= 1
  std::size_t max_itemset_size = 5;

  void validate() const {
    if (min_support < 1) throw InvalidArgument("support threshold must be >= 1");
    if (max_itemset_size < 1) throw InvalidArgument("max itemset size must be >= 1");
  }
};

/// Entities mentioned together in one text window.
using EntityWindow = std::vector<std::string>;

namespace detail {

inline QueryLog sessions_from_itemsets(std::vector<std::vector<EdgeTypeId>> const& itemsets,
                                       SimulationConfig const& cfg) {
  cfg.validate();
  QueryLog log;
  std::vector<SignedEdge> session;
  for (auto const& fi : apriori_frequent_itemsets(itemsets, cfg.min_support, cfg.max_itemset_size)) {
    if (fi.items.size() < 2) continue;
    session.clear();
    for (auto e : fi.items) session.push_back(SignedEdge::pos(e));
    log.add_session(session);
  }
  return log;
}

}  // namespace detail

/// One itemset per node (its incident edge types), mined at the configured
/// support; frequent itemsets of two or more edges become sessions.
inline QueryLog datapos_simulate(DataGraph const& g, SimulationConfig const& cfg) {
  std::vector<std::vector<EdgeTypeId>> itemsets;
  itemsets.reserve(g.node_count());
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    auto ie = g.incident_edge_types(NodeIndex(v));
    itemsets.emplace_back(ie.begin(), ie.end());
  }
  return detail::sessions_from_itemsets(itemsets, cfg);
}

struct CooccurrenceResult {
  QueryLog log;
  std::size_t skipped_entities = 0;  // ids not found in the data graph
};

/// Edge types of all data-graph edges between any two entities of a window.
inline std::vector<EdgeTypeId> window_edge_types(DataGraph const& g, std::vector<NodeIndex> const& members) {
  std::unordered_set<std::uint32_t> in_window;
  for (auto v : members) in_window.insert(v.value);
  std::set<EdgeTypeId> types;
  for (auto v : members)
    for (auto const& adj : g.adjacent(v))
      if (adj.outgoing && in_window.contains(adj.other.value) && adj.other != v) types.insert(adj.etype);
  return {types.begin(), types.end()};
}

inline CooccurrenceResult cooccurrence_ingest(std::vector<EntityWindow> const& windows,
                                              DataGraph const& g, SimulationConfig const& cfg) {
  CooccurrenceResult result;
  std::vector<std::vector<EdgeTypeId>> itemsets;
  for (auto const& window : windows) {
    std::vector<NodeIndex> members;
    for (auto const& id : window) {
      if (auto v = g.find_node(id))
        members.push_back(*v);
      else
        ++result.skipped_entities;
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.size() < 2) continue;
    auto types = window_edge_types(g, members);
    if (!types.empty()) itemsets.push_back(std::move(types));
  }
  result.log = detail::sessions_from_itemsets(itemsets, cfg);
  return result;
}

/// Entity-window file: one window per line, blank-separated node ids.
inline std::vector<EntityWindow> read_entity_windows(std::istream& in) {
  std::vector<EntityWindow> windows;
  std::string line;
  while (std::getline(in, line)) {
    auto const toks = tokens(line);
    if (toks.empty() || toks.front().front() == '#') continue;
    windows.emplace_back(toks.begin(), toks.end());
  }
  return windows;
}

inline std::vector<EntityWindow> load_entity_windows(std::string const& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  return read_entity_windows(in);
}

// ---------------------------------------------------------------------------

struct NegativeInjectionConfig {
  /// Upper bound on negatives added per session; 0 means unbounded. When
  /// capped, negatives are taken in ascending edge-type-name order.
  std::size_t max_negatives = 0;
};

/// Negatives for one positive session: every edge type incident on a node
/// type that an edge of the session touches, minus the session's own types.
inline std::vector<EdgeTypeId> negatives_for(std::span<SignedEdge const> session, DataGraph const& g,
                                             NegativeInjectionConfig const& cfg = {}) {
  auto const& schema = g.schema();
  std::set<NodeTypeId> touched;
  std::set<EdgeTypeId> own;
  for (auto e : session) {
    if (!g.edge_types().contains(e.etype))
      throw NotFoundError("edge type id " + std::to_string(e.etype.value) + " unknown to the data graph");
    own.insert(e.etype);
    auto const& ends = schema.ends(e.etype);
    touched.insert(ends.source_types.begin(), ends.source_types.end());
    touched.insert(ends.target_types.begin(), ends.target_types.end());
  }
  std::set<EdgeTypeId> negatives;
  for (auto t : touched)
    for (auto e : schema.edges_of(t).incident)
      if (!own.contains(e)) negatives.insert(e);
  std::vector<EdgeTypeId> out(negatives.begin(), negatives.end());
  if (cfg.max_negatives != 0 && out.size() > cfg.max_negatives) {
    auto const& names = g.edge_types();
    std::sort(out.begin(), out.end(),
              [&](EdgeTypeId a, EdgeTypeId b) { return names.name(a) < names.name(b); });
    out.resize(cfg.max_negatives);
    std::sort(out.begin(), out.end());
  }
  return out;
}

/// Replaces each positive-only session w by w ∪ w̄.
inline QueryLog inject_negatives(QueryLog const& log, DataGraph const& g,
                                 NegativeInjectionConfig const& cfg = {}) {
  QueryLog out;
  std::vector<SignedEdge> session;
  for (SessionId i = 0; i < log.size(); ++i) {
    auto const src = log.session(i);
    if (std::any_of(src.begin(), src.end(), [](SignedEdge e) { return e.negative(); }))
      throw InvalidArgument("inject_negatives: session " + std::to_string(i) + " already has negative edges");
    session.assign(src.begin(), src.end());
    for (auto e : negatives_for(src, g, cfg)) session.push_back(SignedEdge::neg(e));
    out.add_session(session);
  }
  return out;
}

}  // namespace qsuggest
