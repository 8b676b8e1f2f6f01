#pragma once

/// Active-mode candidate generation: every schema-valid edge that can be
/// attached to the current partial query graph.

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "qsuggest/graph.hpp"
#include "qsuggest/query_graph.hpp"

namespace qsuggest {

/// A concrete edge proposal. `outgoing` is relative to `anchor`. When
/// `existing` is set the edge joins two nodes already in the graph (and is
/// always expressed from its source); otherwise a fresh node of `new_type`
/// is created on the far side.
struct CandidateEdge {
  LocalId anchor = 0;
  EdgeTypeId etype;
  bool outgoing = true;
  std::optional<LocalId> existing;
  NodeTypeId new_type;

  bool joins_existing() const noexcept { return existing.has_value(); }

  auto operator<=>(CandidateEdge const&) const = default;
};

/// Canonical ordering among candidates that share an edge type: anchor,
/// outgoing before incoming, fresh-node variants before joins.
inline bool candidate_order(CandidateEdge const& a, CandidateEdge const& b) {
  auto key = [](CandidateEdge const& c) {
    return std::tuple(c.anchor, !c.outgoing, c.existing.has_value(), c.existing.value_or(0),
                      c.new_type);
  };
  return key(a) < key(b);
}

/// C_A for `qg`. Edge types already present in `session` (either sign) are
/// suppressed.
inline std::vector<CandidateEdge> active_candidates(DataGraph const& g, QueryGraph const& qg,
                                                    QuerySession const& session = {}) {
  if (qg.empty()) throw InvalidArgument("active_candidates: empty query graph");
  auto const& schema = g.schema();
  std::vector<CandidateEdge> out;
  for (LocalId p = 0; p < qg.node_count(); ++p) {
    auto const& label = qg.label(p);
    auto const types = g.label_types(label);
    for (auto e : g.neighboring_candidate_edges(label)) {
      if (session.mentions(e)) continue;
      std::set<NodeTypeId> targets, sources;
      for (auto s : types) {
        for (auto t : schema.targets_of(s, e)) targets.insert(t);
        for (auto t : schema.sources_of(s, e)) sources.insert(t);
      }
      for (auto t : targets) out.push_back({p, e, true, std::nullopt, t});
      for (auto s : sources) out.push_back({p, e, false, std::nullopt, s});
      if (targets.empty()) continue;
      for (LocalId q = 0; q < qg.node_count(); ++q) {
        if (q == p) continue;
        auto const ne_q = g.neighboring_candidate_edges(qg.label(q));
        if (!std::binary_search(ne_q.begin(), ne_q.end(), e)) continue;
        if (g.admits(label, e, qg.label(q))) out.push_back({p, e, true, q, NodeTypeId(0)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](CandidateEdge const& a, CandidateEdge const& b) {
    if (a.etype != b.etype) return a.etype < b.etype;
    return candidate_order(a, b);
  });
  return out;
}

/// Distinct edge types appearing in a candidate list, in id order.
inline std::vector<EdgeTypeId> candidate_edge_types(std::span<CandidateEdge const> candidates) {
  std::vector<EdgeTypeId> types;
  for (auto const& c : candidates) types.push_back(c.etype);
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  return types;
}

/// Applies an accepted candidate to the graph. Returns the local id of the
/// node on the far side.
inline LocalId apply_candidate(QueryGraph& qg, DataGraph const& g, CandidateEdge const& c,
                               std::optional<QueryNodeLabel> fresh_label = std::nullopt) {
  if (c.existing) {
    qg.push_edge(c.anchor, *c.existing, c.etype);
    return *c.existing;
  }
  return qg.attach_node(g, c.anchor, c.etype, c.outgoing,
                        fresh_label.value_or(QueryNodeLabel{TypeLabel{c.new_type}}));
}

}  // namespace qsuggest
