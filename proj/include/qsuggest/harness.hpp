#pragma once

/// Query-completion experiment: grow a one-edge partial graph towards a
/// known target by taking one top-ranked suggestion at a time, and report
/// how many suggestions each ranker needs.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "qsuggest/candidates.hpp"
#include "qsuggest/ranker.hpp"
#include "qsuggest/similarity.hpp"

namespace qsuggest {

inline constexpr std::size_t kDefaultSuggestionCap = 200;

struct CompletionInstance {
  std::string id;
  QueryGraph target;
  std::size_t initial_edge = 0;  // index into target.edges()
};

/// One instance per target edge, each starting from that edge alone.
inline std::vector<CompletionInstance> expand_target_to_instances(QueryGraph const& target,
                                                                  std::string const& name = "target") {
  if (target.edge_count() == 0) throw InvalidArgument("target '" + name + "' has no edges");
  std::vector<CompletionInstance> out;
  for (std::size_t i = 0; i < target.edge_count(); ++i)
    out.push_back({name + "#" + std::to_string(i), target, i});
  return out;
}

/// An edge added to the partial graph, with the label given to a fresh node.
struct Placement {
  CandidateEdge candidate;
  std::optional<QueryNodeLabel> fresh_label;

  friend bool operator==(Placement const&, Placement const&) = default;
};

/// One issued suggestion: its edge type, whether it matched the target, and
/// the edges added as a result. The first placement is the accepted edge;
/// any further ones are target edges of an already accepted type that became
/// attachable and were added by the user without a new suggestion.
struct SuggestionStep {
  EdgeTypeId etype;
  bool accepted = false;
  std::vector<Placement> placements;

  friend bool operator==(SuggestionStep const&, SuggestionStep const&) = default;
};

struct CompletionResult {
  std::string instance_id;
  std::string ranker;
  std::size_t target_edges = 0;
  std::size_t suggestions_used = 0;
  std::size_t cap = kDefaultSuggestionCap;
  bool completed = false;
  bool ran_out_of_candidates = false;
  double wall_time = 0.0;  // seconds spent inside rank calls
  Fraction similarity;
  std::vector<Placement> initial_placements;  // repeats of the initial edge type
  std::vector<SuggestionStep> transcript;
  QuerySession session;

  bool capped() const noexcept { return !completed && suggestions_used >= cap; }

  /// Everything except wall time.
  bool same_outcome(CompletionResult const& o) const {
    return instance_id == o.instance_id && ranker == o.ranker && target_edges == o.target_edges &&
           suggestions_used == o.suggestions_used && cap == o.cap && completed == o.completed &&
           ran_out_of_candidates == o.ran_out_of_candidates &&
           similarity.numerator == o.similarity.numerator &&
           similarity.denominator == o.similarity.denominator &&
           initial_placements == o.initial_placements && transcript == o.transcript && session == o.session;
  }
};

namespace detail {

inline bool fresh_node_fits(DataGraph const& g, QueryNodeLabel const& target_label, NodeTypeId type) {
  auto const types = g.label_types(target_label);
  return std::find(types.begin(), types.end(), type) != types.end();
}

/// Partial graph plus its correspondence to the target.
class CompletionState {
 public:
  CompletionState(DataGraph const& g, CompletionInstance const& inst) : g_(&g), target_(&inst.target) {
    if (inst.initial_edge >= target_->edge_count()) throw InvalidArgument("initial edge out of range");
    auto const& e = target_->edges()[inst.initial_edge];
    auto const s = partial.push_node(target_->label(e.src));
    to_target_.push_back(e.src);
    if (e.src != e.dst) {
      partial.push_node(target_->label(e.dst));
      to_target_.push_back(e.dst);
    }
    partial.push_edge(s, e.src == e.dst ? s : 1, e.etype);
    session.append(SignedEdge::pos(e.etype));
    mapped_.assign(target_->node_count(), false);
    mapped_[e.src] = mapped_[e.dst] = true;
    for (std::size_t i = 0; i < target_->edge_count(); ++i)
      if (i != inst.initial_edge) remaining_.push_back(i);
  }

  bool complete() const noexcept { return remaining_.empty(); }

  /// Adds the first variant of `etype` among `candidates` that matches a
  /// remaining target edge.
  std::optional<Placement> place(std::span<CandidateEdge const> candidates, EdgeTypeId etype) {
    for (auto const& c : candidates) {
      if (c.etype != etype) continue;
      auto const anchor_t = to_target_[c.anchor];
      for (auto r = remaining_.begin(); r != remaining_.end(); ++r) {
        auto const& te = target_->edges()[*r];
        if (te.etype != etype) continue;
        std::optional<LocalId> fresh;
        if (c.existing) {
          if (te.src != anchor_t || te.dst != to_target_[*c.existing]) continue;
        } else if (c.outgoing) {
          if (te.src != anchor_t || mapped_[te.dst] || !fresh_node_fits(*g_, target_->label(te.dst), c.new_type))
            continue;
          fresh = te.dst;
        } else {
          if (te.dst != anchor_t || mapped_[te.src] || !fresh_node_fits(*g_, target_->label(te.src), c.new_type))
            continue;
          fresh = te.src;
        }
        Placement p{c, std::nullopt};
        if (fresh) {
          p.fresh_label = target_->label(*fresh);
          to_target_.push_back(*fresh);
          mapped_[*fresh] = true;
        }
        apply_candidate(partial, *g_, c, p.fresh_label);
        remaining_.erase(r);
        return p;
      }
    }
    return std::nullopt;
  }

  /// Places every remaining target edge whose type is already accepted and
  /// which is now attachable, until nothing changes.
  std::vector<Placement> place_accepted_repeats() {
    std::vector<Placement> out;
    for (bool progress = true; progress && !remaining_.empty();) {
      progress = false;
      std::set<EdgeTypeId> wanted;
      for (auto r : remaining_) {
        auto const e = target_->edges()[r].etype;
        if (session.contains(SignedEdge::pos(e))) wanted.insert(e);
      }
      if (wanted.empty()) break;
      auto const candidates = active_candidates(*g_, partial);
      for (auto e : wanted) {
        if (auto p = place(candidates, e)) {
          out.push_back(std::move(*p));
          progress = true;
          break;
        }
      }
    }
    return out;
  }

  QueryGraph partial;
  QuerySession session;

 private:
  DataGraph const* g_;
  QueryGraph const* target_;
  std::vector<LocalId> to_target_;
  std::vector<bool> mapped_;
  std::vector<std::size_t> remaining_;
};

}  // namespace detail

/// Runs one completion. Each iteration ranks the active candidates, takes the
/// top edge type, and accepts it when one of its anchorings matches a target
/// edge not yet built (edge type, mapped endpoints and, for a fresh node, a
/// compatible target label). Accepted types are appended positive, others
/// negative. Stops on completion, on `cap` suggestions or when no candidates
/// remain. The initial edge is given, not counted.
inline CompletionResult run_completion(DataGraph const& g, CompletionInstance const& inst,
                                       EdgeRanker const& ranker, std::size_t cap, std::uint64_t seed) {
  if (cap < 1) throw InvalidArgument("suggestion cap must be >= 1");
  detail::CompletionState st(g, inst);

  CompletionResult result;
  result.instance_id = inst.id;
  result.ranker = ranker.name();
  result.target_edges = inst.target.edge_count();
  result.cap = cap;
  result.initial_placements = st.place_accepted_repeats();

  std::uint64_t ordinal = 0;
  using clock = std::chrono::steady_clock;
  clock::duration ranking_time{};
  while (!st.complete() && result.suggestions_used < cap) {
    auto const candidates = active_candidates(g, st.partial, st.session);
    if (candidates.empty()) {
      result.ran_out_of_candidates = true;
      break;
    }
    auto const types = candidate_edge_types(candidates);
    auto const t0 = clock::now();
    auto const ranked = rank_edge_types(ranker, types, st.session, derive_stream(seed, ordinal++),
                                        g.edge_types());
    ranking_time += clock::now() - t0;
    auto const top = ranked.front().etype;
    ++result.suggestions_used;

    SuggestionStep step{top, false, {}};
    if (auto p = st.place(candidates, top)) {
      step.accepted = true;
      step.placements.push_back(std::move(*p));
      st.session.append(SignedEdge::pos(top));
      for (auto& extra : st.place_accepted_repeats()) step.placements.push_back(std::move(extra));
    } else {
      st.session.append(SignedEdge::neg(top));
    }
    result.transcript.push_back(std::move(step));
  }

  result.completed = st.complete();
  result.wall_time = std::chrono::duration<double>(ranking_time).count();
  result.similarity = similarity(st.partial, inst.target);
  result.session = st.session;
  return result;
}

/// Re-derives every suggestion of a finished run from its transcript alone
/// (no access to which target edges remain) and checks the ranker issues the
/// same top edge type at each step.
inline bool replay_matches(DataGraph const& g, CompletionInstance const& inst, EdgeRanker const& ranker,
                           CompletionResult const& recorded, std::uint64_t seed) {
  if (inst.initial_edge >= inst.target.edge_count()) return false;
  auto const& first = inst.target.edges()[inst.initial_edge];
  QueryGraph partial;
  auto const s = partial.push_node(inst.target.label(first.src));
  auto const d = first.src == first.dst ? s : partial.push_node(inst.target.label(first.dst));
  partial.push_edge(s, d, first.etype);
  QuerySession session;
  session.append(SignedEdge::pos(first.etype));
  for (auto const& p : recorded.initial_placements) apply_candidate(partial, g, p.candidate, p.fresh_label);

  std::uint64_t ordinal = 0;
  for (auto const& step : recorded.transcript) {
    auto const candidates = active_candidates(g, partial, session);
    if (candidates.empty()) return false;
    auto const ranked = rank_edge_types(ranker, candidate_edge_types(candidates), session,
                                        derive_stream(seed, ordinal++), g.edge_types());
    if (ranked.front().etype != step.etype) return false;
    if (step.accepted == step.placements.empty()) return false;
    for (auto const& p : step.placements) apply_candidate(partial, g, p.candidate, p.fresh_label);
    session.append(step.accepted ? SignedEdge::pos(step.etype) : SignedEdge::neg(step.etype));
  }
  auto const sim = similarity(partial, inst.target);
  return session == recorded.session && sim.numerator == recorded.similarity.numerator &&
         sim.denominator == recorded.similarity.denominator;
}

/// Per-instance seeds are derived from one run seed and the instance index.
inline std::vector<CompletionResult> run_all(DataGraph const& g, std::span<CompletionInstance const> instances,
                                             EdgeRanker const& ranker, std::size_t cap, std::uint64_t seed) {
  std::vector<CompletionResult> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i)
    out.push_back(run_completion(g, instances[i], ranker, cap, derive_stream(seed, i)));
  return out;
}

/// Loads every `*.qg` file of a directory, in file-name order.
inline std::vector<std::pair<std::string, QueryGraph>> load_targets(std::string const& dir, DataGraph const& g) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw NotFoundError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (auto const& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".qg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, QueryGraph>> out;
  for (auto const& f : files) out.emplace_back(f.stem().string(), load_query_graph(f.string(), g));
  return out;
}

// ---------------------------------------------------------------------------
// Reporting

struct RankerSummary {
  std::string ranker;
  std::size_t instances = 0;
  double mean_suggestions = 0.0;
  double median_suggestions = 0.0;
  double completion_fraction = 0.0;
  double mean_wall_time = 0.0;
  std::size_t capped = 0;
};

struct PairedComparison {
  std::string a;
  std::string b;
  std::size_t instances = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t a_fewer = 0;
  std::size_t b_fewer = 0;
  std::size_t ties = 0;
};

struct Report {
  std::vector<RankerSummary> rankers;
  std::vector<PairedComparison> pairs;
};

/// Aggregates per ranker (capped runs count at the cap). Order-independent.
inline Report report(std::span<CompletionResult const> results) {
  if (results.empty()) throw InvalidArgument("report: no results");
  std::map<std::string, std::vector<CompletionResult const*>> by_ranker;
  for (auto const& r : results) by_ranker[r.ranker].push_back(&r);

  Report rep;
  for (auto const& [name, rs] : by_ranker) {
    RankerSummary s;
    s.ranker = name;
    s.instances = rs.size();
    std::vector<double> used;
    double completed = 0, wall = 0;
    for (auto const* r : rs) {
      used.push_back(static_cast<double>(r->suggestions_used));
      completed += r->completed ? 1 : 0;
      wall += r->wall_time;
      s.capped += r->capped() ? 1 : 0;
    }
    std::sort(used.begin(), used.end());
    double sum = 0;
    for (double u : used) sum += u;
    auto const n = static_cast<double>(used.size());
    s.mean_suggestions = sum / n;
    s.median_suggestions = used.size() % 2 ? used[used.size() / 2]
                                           : (used[used.size() / 2 - 1] + used[used.size() / 2]) / 2.0;
    s.completion_fraction = completed / n;
    s.mean_wall_time = wall / n;
    rep.rankers.push_back(s);
  }

  for (auto a = by_ranker.begin(); a != by_ranker.end(); ++a) {
    for (auto b = std::next(a); b != by_ranker.end(); ++b) {
      std::map<std::string, std::size_t> used_b;
      for (auto const* r : b->second) used_b[r->instance_id] = r->suggestions_used;
      PairedComparison p{a->first, b->first};
      double sa = 0, sb = 0;
      for (auto const* r : a->second) {
        auto it = used_b.find(r->instance_id);
        if (it == used_b.end()) continue;
        ++p.instances;
        sa += static_cast<double>(r->suggestions_used);
        sb += static_cast<double>(it->second);
        if (r->suggestions_used < it->second)
          ++p.a_fewer;
        else if (r->suggestions_used > it->second)
          ++p.b_fewer;
        else
          ++p.ties;
      }
      if (p.instances == 0) continue;
      p.mean_a = sa / static_cast<double>(p.instances);
      p.mean_b = sb / static_cast<double>(p.instances);
      rep.pairs.push_back(p);
    }
  }
  return rep;
}

/// One tab-separated record per result.
inline void write_results(std::ostream& out, std::span<CompletionResult const> results) {
  out << "# suggestions exclude the given initial edge; capped runs are counted at the cap\n";
  out << "ranker\tinstance\ttarget_edges\tsuggestions\tcompleted\tcapped\tsimilarity\twall_time_s\n";
  for (auto const& r : results)
    out << r.ranker << '\t' << r.instance_id << '\t' << r.target_edges << '\t' << r.suggestions_used << '\t'
        << (r.completed ? 1 : 0) << '\t' << (r.capped() ? 1 : 0) << '\t' << std::setprecision(6)
        << r.similarity.value() << '\t' << r.wall_time << '\n';
}

inline void write_summary(std::ostream& out, Report const& rep) {
  out << "# summary\n";
  out << "# ranker\tinstances\tmean_suggestions\tmedian_suggestions\tcompleted_fraction\tcapped\tmean_wall_time_s\n";
  for (auto const& s : rep.rankers)
    out << "# " << s.ranker << '\t' << s.instances << '\t' << std::fixed << std::setprecision(3)
        << s.mean_suggestions << '\t' << s.median_suggestions << '\t' << s.completion_fraction << '\t'
        << s.capped << '\t' << std::setprecision(6) << s.mean_wall_time << '\n'
        << std::defaultfloat;
  if (rep.pairs.empty()) return;
  out << "# paired\ta\tb\tinstances\tmean_a\tmean_b\ta_fewer\tb_fewer\tties\n";
  for (auto const& p : rep.pairs)
    out << "# paired\t" << p.a << '\t' << p.b << '\t' << p.instances << '\t' << std::fixed
        << std::setprecision(3) << p.mean_a << '\t' << p.mean_b << '\t' << p.a_fewer << '\t' << p.b_fewer
        << '\t' << p.ties << '\n'
        << std::defaultfloat;
}

}  // namespace qsuggest
