#pragma once

/// Random Decision Paths ranking.
///
/// For a session Q the ranker grows N random paths. Each path draws signed
/// edges from Q uniformly without replacement and narrows the log to the
/// sessions containing every edge drawn so far; it stops as soon as at most
/// tau sessions remain, or when Q runs out. A candidate e scores, per path,
/// the fraction of the remaining sessions that also contain +e. The final
/// score is the mean over paths.
///
/// Paths with the same edge set narrow the log identically, so the per-path
/// supports are computed once per distinct set and weighted by how many of
/// the N paths produced it.

#include <map>
#include <random>
#include <span>
#include <vector>

#include "qsuggest/query_log.hpp"
#include "qsuggest/ranker.hpp"

namespace qsuggest {

struct RdpConfig {
  std::size_t n_paths = 25;
  std::size_t tau = 25;
  std::uint64_t seed = 0;
  bool include_negatives = true;  // false: only positive session edges form paths

  void validate() const {
    if (n_paths < 1) throw InvalidArgument("rdp: n_paths must be >= 1");
    if (tau < 1) throw InvalidArgument("rdp: tau must be >= 1");
  }
};

/// Edges of `session` eligible for decision paths under `cfg`.
inline std::vector<SignedEdge> rdp_path_pool(QuerySession const& session, bool include_negatives) {
  std::vector<SignedEdge> pool;
  for (auto e : session.edges())
    if (include_negatives || e.positive()) pool.push_back(e);
  return pool;
}

class RdpRanker final : public EdgeRanker {
 public:
  RdpRanker(QueryLog const& log, RdpConfig cfg) : log_(&log), cfg_(cfg) {
    cfg_.validate();
    if (log.empty()) throw InvalidArgument("rdp: empty query log");
  }

  std::string name() const override { return cfg_.include_negatives ? "rdp" : "rdp-noneg"; }
  RdpConfig const& config() const noexcept { return cfg_; }

  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const& session,
                            std::uint64_t stream) const override {
    if (candidates.empty()) throw InvalidArgument("rdp: empty candidate set");
    auto const pool = rdp_path_pool(session, cfg_.include_negatives);
    std::mt19937_64 rng(derive_stream(cfg_.seed, stream));

    // Distinct path edge sets -> (number of paths, surviving sessions).
    struct Terminal {
      std::size_t paths = 0;
      std::vector<SessionId> sessions;
      bool whole_log = false;
    };
    std::map<std::vector<std::uint32_t>, Terminal> terminals;

    std::vector<SignedEdge> order;
    std::vector<std::uint32_t> keys;
    std::vector<SessionId> surviving;
    for (std::size_t i = 0; i < cfg_.n_paths; ++i) {
      order = pool;
      keys.clear();
      bool whole_log = true;
      for (std::size_t s = 0; s < order.size(); ++s) {
        auto const j = s + uniform_below(rng, order.size() - s);
        std::swap(order[s], order[j]);
        auto const e = order[s];
        keys.push_back(e.key());
        auto const posting = log_->posting(e);
        if (whole_log) {
          surviving.assign(posting.begin(), posting.end());
          whole_log = false;
        } else {
          surviving = QueryLog::intersect(surviving, posting);
        }
        if (surviving.size() <= cfg_.tau) break;
      }
      std::sort(keys.begin(), keys.end());
      auto [it, fresh] = terminals.try_emplace(keys);
      if (fresh) {
        it->second.whole_log = whole_log;
        if (!whole_log) it->second.sessions = surviving;
      }
      ++it->second.paths;
    }

    std::vector<double> scores(candidates.size(), 0.0);
    double const n = static_cast<double>(cfg_.n_paths);
    for (auto const& [path, terminal] : terminals) {
      double const weight = static_cast<double>(terminal.paths) / n;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        auto const supp = support_within(terminal.sessions, terminal.whole_log, candidates[c]);
        scores[c] += weight * supp.value();
      }
    }
    return scores;
  }

  /// supp(e) restricted to a surviving session set: |W_path ∩ W(+e)| / |W_path|.
  /// An empty surviving set gives 0/0, which scores as 0.
  Fraction support_within(std::span<SessionId const> sessions, bool whole_log, EdgeTypeId e) const {
    auto const posting = log_->posting(SignedEdge::pos(e));
    if (whole_log) return {posting.size(), log_->size()};
    std::size_t hits = 0;
    if (sessions.size() * 8 < posting.size()) {
      for (auto s : sessions) hits += log_->contains(s, SignedEdge::pos(e)) ? 1 : 0;
    } else {
      auto a = sessions.begin();
      auto b = posting.begin();
      while (a != sessions.end() && b != posting.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++hits;
          ++a;
          ++b;
        }
      }
    }
    return {hits, sessions.size()};
  }

 private:
  QueryLog const* log_;
  RdpConfig cfg_;
};

/// Convenience: ranked edge types for one call.
inline std::vector<ScoredEdgeType> rdp_rank(std::span<EdgeTypeId const> candidates,
                                            QuerySession const& session, QueryLog const& log,
                                            RdpConfig const& cfg, EdgeTypeTable const& names,
                                            std::uint64_t stream = 0) {
  return rank_edge_types(RdpRanker(log, cfg), candidates, session, stream, names);
}

}  // namespace qsuggest
