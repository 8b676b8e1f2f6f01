#pragma once

/// Edge-preserving match similarity between a user-built query graph and a
/// target, and the conversion rate built from it.

#include <algorithm>
#include <map>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "qsuggest/query_graph.hpp"

namespace qsuggest {

namespace detail {

class SimilaritySearch {
 public:
  SimilaritySearch(QueryGraph const& gu, QueryGraph const& gt) : gu_(gu), gt_(gt) {
    for (auto const& e : gt.edges()) ++target_mult_[{e.src, e.dst, e.etype}];
    std::map<std::tuple<LocalId, LocalId, EdgeTypeId>, std::size_t> user_mult;
    for (auto const& e : gu.edges()) ++user_mult[{e.src, e.dst, e.etype}];
    closing_.assign(gu.node_count(), {});
    for (auto const& [key, count] : user_mult) {
      auto const [a, b, etype] = key;
      closing_[std::max(a, b)].push_back({a, b, etype, count});
    }
    remaining_after_.assign(gu.node_count() + 1, 0);
    for (std::size_t i = gu.node_count(); i-- > 0;) {
      std::size_t sum = 0;
      for (auto const& grp : closing_[i]) sum += grp.count;
      remaining_after_[i] = remaining_after_[i + 1] + sum;
    }
    mapping_.assign(gu.node_count(), kUnmapped);
    used_.assign(gt.node_count(), false);
  }

  std::size_t run() {
    best_ = 0;
    recurse(0, 0);
    return best_;
  }

 private:
  static constexpr LocalId kUnmapped = static_cast<LocalId>(-1);

  struct Group {
    LocalId src;
    LocalId dst;
    EdgeTypeId etype;
    std::size_t count;
  };

  std::size_t gained(LocalId i) const {
    std::size_t sum = 0;
    for (auto const& grp : closing_[i]) {
      auto const fs = mapping_[grp.src], fd = mapping_[grp.dst];
      if (fs == kUnmapped || fd == kUnmapped) continue;
      auto it = target_mult_.find({fs, fd, grp.etype});
      if (it != target_mult_.end()) sum += std::min(grp.count, it->second);
    }
    return sum;
  }

  void recurse(LocalId i, std::size_t score) {
    if (best_ > 0 && score + remaining_after_[i] <= best_) return;
    if (i == gu_.node_count()) {
      best_ = std::max(best_, score);
      return;
    }
    for (LocalId t = 0; t < gt_.node_count(); ++t) {
      if (used_[t] || !(gu_.label(i) == gt_.label(t))) continue;
      used_[t] = true;
      mapping_[i] = t;
      recurse(i + 1, score + gained(i));
      mapping_[i] = kUnmapped;
      used_[t] = false;
    }
    recurse(i + 1, score);
  }

  QueryGraph const& gu_;
  QueryGraph const& gt_;
  std::map<std::tuple<LocalId, LocalId, EdgeTypeId>, std::size_t> target_mult_;
  std::vector<std::vector<Group>> closing_;
  std::vector<std::size_t> remaining_after_;
  std::vector<LocalId> mapping_;
  std::vector<bool> used_;
  std::size_t best_ = 0;
};

}  // namespace detail

/// Number of target edges covered by the best label-preserving injective
/// node mapping from `gu` into `gt`. Parallel edges match one-to-one.
inline std::size_t matched_edge_count(QueryGraph const& gu, QueryGraph const& gt) {
  return detail::SimilaritySearch(gu, gt).run();
}

/// sim(gu, gt) = max matched edges / |E(gt)|, in [0, 1].
inline Fraction similarity(QueryGraph const& gu, QueryGraph const& gt) {
  if (gt.edge_count() == 0) throw InvalidArgument("similarity: target graph has no edges");
  return {matched_edge_count(gu, gt), gt.edge_count()};
}

/// Mean similarity over (user graph, target graph) pairs.
inline double conversion_rate(std::span<std::pair<QueryGraph, QueryGraph> const> results) {
  if (results.empty()) throw InvalidArgument("conversion_rate: no results");
  double sum = 0.0;
  for (auto const& [gu, gt] : results) sum += similarity(gu, gt).value();
  return sum / static_cast<double>(results.size());
}

/// Same, from precomputed similarity values.
inline double conversion_rate(std::span<double const> similarities) {
  if (similarities.empty()) throw InvalidArgument("conversion_rate: no results");
  double sum = 0.0;
  for (double s : similarities) sum += s;
  return sum / static_cast<double>(similarities.size());
}

}  // namespace qsuggest
