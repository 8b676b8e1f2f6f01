#pragma once

/// Common ranking interface. A ranker scores distinct edge types against an
/// ongoing session; candidate edges inherit the score of their edge type.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qsuggest/candidates.hpp"
#include "qsuggest/query_graph.hpp"

namespace qsuggest {

class EdgeRanker {
 public:
  virtual ~EdgeRanker() = default;

  virtual std::string name() const = 0;

  /// One non-negative score per entry of `candidates`. `stream` selects the
  /// random stream for randomized rankers; deterministic rankers ignore it.
  virtual std::vector<double> score(std::span<EdgeTypeId const> candidates,
                                    QuerySession const& session, std::uint64_t stream) const = 0;
};

struct ScoredEdgeType {
  EdgeTypeId etype;
  double score = 0.0;

  friend bool operator==(ScoredEdgeType const&, ScoredEdgeType const&) = default;
};

struct RankedSuggestion {
  CandidateEdge candidate;
  double score = 0.0;

  friend bool operator==(RankedSuggestion const&, RankedSuggestion const&) = default;
};

/// Score descending, then edge type name ascending.
inline void sort_scored(std::vector<ScoredEdgeType>& scored, EdgeTypeTable const& names) {
  std::stable_sort(scored.begin(), scored.end(), [&](ScoredEdgeType const& a, ScoredEdgeType const& b) {
    if (a.score != b.score) return a.score > b.score;
    return names.name(a.etype) < names.name(b.etype);
  });
}

inline std::vector<ScoredEdgeType> rank_edge_types(EdgeRanker const& ranker,
                                                   std::span<EdgeTypeId const> candidates,
                                                   QuerySession const& session, std::uint64_t stream,
                                                   EdgeTypeTable const& names) {
  if (candidates.empty()) return {};
  auto const scores = ranker.score(candidates, session, stream);
  std::vector<ScoredEdgeType> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) out.push_back({candidates[i], scores[i]});
  sort_scored(out, names);
  return out;
}

/// Ranks candidate edges: by their edge type's rank, then the canonical
/// candidate order within one edge type.
inline std::vector<RankedSuggestion> rank_candidates(EdgeRanker const& ranker,
                                                     std::span<CandidateEdge const> candidates,
                                                     QuerySession const& session, std::uint64_t stream,
                                                     EdgeTypeTable const& names) {
  auto const types = candidate_edge_types(candidates);
  auto const ranked = rank_edge_types(ranker, types, session, stream, names);
  std::vector<std::size_t> position(names.size(), 0);
  for (std::size_t i = 0; i < ranked.size(); ++i) position[ranked[i].etype.value] = i;
  std::vector<RankedSuggestion> out;
  out.reserve(candidates.size());
  for (auto const& c : candidates) out.push_back({c, ranked[position[c.etype.value]].score});
  std::stable_sort(out.begin(), out.end(), [&](RankedSuggestion const& a, RankedSuggestion const& b) {
    auto const pa = position[a.candidate.etype.value], pb = position[b.candidate.etype.value];
    if (pa != pb) return pa < pb;
    return candidate_order(a.candidate, b.candidate);
  });
  return out;
}

}  // namespace qsuggest
