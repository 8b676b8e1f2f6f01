#pragma once

/// Desk-scale synthetic completion benchmark.
///
/// Query intents are small trees of typed edges. Intents come in families
/// that share a two-edge core and differ in one to three extension edges, so
/// knowing which sibling intent a user is not after (a rejected extension)
/// is informative. Sessions are sampled from intents with edge dropout and
/// occasional noise, then receive schema-derived negatives. Targets are
/// intents rendered as query graphs over node types.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qsuggest/graph.hpp"
#include "qsuggest/log_simulation.hpp"
#include "qsuggest/query_graph.hpp"
#include "qsuggest/query_log.hpp"

namespace qsuggest {

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t node_types = 40;
  std::size_t families = 20;
  std::size_t intents_per_family = 4;
  std::size_t max_extension = 3;  // extension edges per intent: 1..max_extension
  std::size_t distractor_edge_types = 80;
  std::size_t instances_per_type = 3;
  std::size_t edges_per_type = 2;
  std::size_t sessions = 1200;
  double dropout = 0.15;
  double noise = 0.2;
  std::size_t targets = 36;

  void validate() const {
    if (node_types < 6) throw InvalidArgument("synthetic: need at least 6 node types");
    if (families < 1 || intents_per_family < 1) throw InvalidArgument("synthetic: need families and intents");
    if (max_extension < 1 || max_extension + 3 > node_types)
      throw InvalidArgument("synthetic: max_extension out of range");
    if (instances_per_type < 1 || edges_per_type < 1) throw InvalidArgument("synthetic: empty data graph");
    if (dropout < 0 || dropout >= 1 || noise < 0 || noise > 1)
      throw InvalidArgument("synthetic: dropout in [0,1), noise in [0,1]");
    if (targets > families * intents_per_family)
      throw InvalidArgument("synthetic: more targets than intents");
  }
};

struct SyntheticIntent {
  std::size_t family = 0;
  std::vector<std::string> node_types;                  // tree node -> type name
  std::vector<std::pair<std::size_t, std::size_t>> ends;  // per edge: (src node, dst node)
  std::vector<std::string> edge_types;
};

struct SyntheticBenchmark {
  DataGraph graph;
  QueryLog log;
  std::vector<SyntheticIntent> intents;
  std::vector<std::pair<std::string, QueryGraph>> targets;
};

namespace detail {

inline std::string synthetic_word(std::mt19937_64& rng, std::set<std::string>& used, bool capital) {
  static constexpr char consonants[] = "bcdfghjklmnprstvz";
  static constexpr char vowels[] = "aeiou";
  for (;;) {
    std::string w;
    for (int i = 0; i < 3; ++i) {
      w += consonants[uniform_below(rng, sizeof consonants - 1)];
      w += vowels[uniform_below(rng, sizeof vowels - 1)];
    }
    if (capital) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (used.insert(w).second) return w;
  }
}

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline SyntheticBenchmark make_synthetic_benchmark(SyntheticConfig const& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_stream(cfg.seed, 0));
  std::set<std::string> used;

  std::vector<std::string> types;
  for (std::size_t i = 0; i < cfg.node_types; ++i) types.push_back(detail::synthetic_word(rng, used, true));

  struct Spec {
    std::string name;
    std::size_t src, dst;
  };
  std::vector<Spec> specs;
  auto new_edge_type = [&](std::size_t s, std::size_t d) {
    specs.push_back({detail::synthetic_word(rng, used, false), s, d});
    return specs.back().name;
  };
  auto pick_type_outside = [&](std::vector<std::size_t> const& taken) {
    for (;;) {
      auto const t = uniform_below(rng, cfg.node_types);
      if (std::find(taken.begin(), taken.end(), t) == taken.end()) return t;
    }
  };

  SyntheticBenchmark out;
  std::vector<std::vector<std::size_t>> family_intents(cfg.families);
  for (std::size_t f = 0; f < cfg.families; ++f) {
    std::vector<std::size_t> core_nodes;
    core_nodes.push_back(uniform_below(rng, cfg.node_types));
    core_nodes.push_back(pick_type_outside(core_nodes));
    core_nodes.push_back(pick_type_outside(core_nodes));
    bool const second_in = uniform_below(rng, 2) == 0;
    std::vector<std::pair<std::size_t, std::size_t>> core_ends{{0, 1}, second_in ? std::pair{2ul, 0ul}
                                                                                  : std::pair{0ul, 2ul}};
    std::vector<std::string> core_types;
    for (auto [s, d] : core_ends) core_types.push_back(new_edge_type(core_nodes[s], core_nodes[d]));

    for (std::size_t k = 0; k < cfg.intents_per_family; ++k) {
      auto nodes = core_nodes;
      SyntheticIntent intent{f, {}, core_ends, core_types};
      auto const extension = 1 + uniform_below(rng, cfg.max_extension);
      for (std::size_t x = 0; x < extension; ++x) {
        auto const anchor = uniform_below(rng, nodes.size());
        auto const fresh = pick_type_outside(nodes);
        nodes.push_back(fresh);
        auto const far = nodes.size() - 1;
        auto const ends = uniform_below(rng, 2) == 0 ? std::pair{anchor, far} : std::pair{far, anchor};
        intent.ends.push_back(ends);
        intent.edge_types.push_back(new_edge_type(nodes[ends.first], nodes[ends.second]));
      }
      for (auto t : nodes) intent.node_types.push_back(types[t]);
      family_intents[f].push_back(out.intents.size());
      out.intents.push_back(std::move(intent));
    }
  }
  std::vector<std::string> distractors;
  for (std::size_t i = 0; i < cfg.distractor_edge_types; ++i) {
    auto const s = uniform_below(rng, cfg.node_types);
    distractors.push_back(new_edge_type(s, pick_type_outside({s})));
  }

  DataGraph::Builder b;
  auto instance_id = [](std::size_t type, std::size_t k) {
    return "n" + std::to_string(type) + "_" + std::to_string(k);
  };
  for (std::size_t t = 0; t < cfg.node_types; ++t)
    for (std::size_t k = 0; k < cfg.instances_per_type; ++k)
      b.add_node(instance_id(t, k), types[t] + " " + std::to_string(k), "d" + std::to_string(t % 5), {types[t]});
  for (auto const& s : specs)
    for (std::size_t i = 0; i < cfg.edges_per_type; ++i)
      b.add_edge(instance_id(s.src, uniform_below(rng, cfg.instances_per_type)),
                 instance_id(s.dst, uniform_below(rng, cfg.instances_per_type)), s.name);
  out.graph = std::move(b).build();
  auto const& names = out.graph.edge_types();

  // Popularity within a family decays geometrically by 0.6 per intent.
  std::vector<double> weights;
  for (std::size_t k = 0; k < cfg.intents_per_family; ++k) weights.push_back(std::pow(0.6, static_cast<double>(k)));
  double wsum = 0;
  for (double w : weights) wsum += w;

  QueryLog positives;
  std::vector<SignedEdge> session;
  for (std::size_t i = 0; i < cfg.sessions; ++i) {
    auto const f = uniform_below(rng, cfg.families);
    double u = detail::unit(rng) * wsum;
    std::size_t k = 0;
    while (k + 1 < weights.size() && u >= weights[k]) u -= weights[k++];
    auto const& intent = out.intents[family_intents[f][k]];
    session.clear();
    for (auto const& e : intent.edge_types)
      if (detail::unit(rng) >= cfg.dropout) session.push_back(SignedEdge::pos(names.at(e)));
    for (std::size_t j = 0; session.size() < 2 && j < intent.edge_types.size(); ++j)
      session.push_back(SignedEdge::pos(names.at(intent.edge_types[j])));
    if (detail::unit(rng) < cfg.noise) {
      bool const distractor = !distractors.empty() && uniform_below(rng, 2) == 0;
      auto const& e = distractor ? distractors[uniform_below(rng, distractors.size())]
                                 : specs[uniform_below(rng, specs.size())].name;
      session.push_back(SignedEdge::pos(names.at(e)));
    }
    positives.add_session(session);
  }
  out.log = inject_negatives(positives, out.graph);

  std::vector<std::size_t> order(out.intents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    std::swap(order[i], order[i + uniform_below(rng, order.size() - i)]);
  order.resize(cfg.targets);
  std::sort(order.begin(), order.end());
  for (auto i : order) {
    auto const& intent = out.intents[i];
    QueryGraph qg;
    for (auto const& t : intent.node_types) qg.push_node(TypeLabel{out.graph.node_types().at(t)});
    for (std::size_t e = 0; e < intent.edge_types.size(); ++e)
      qg.push_edge(static_cast<LocalId>(intent.ends[e].first), static_cast<LocalId>(intent.ends[e].second),
                   names.at(intent.edge_types[e]));
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%03zu", i);
    out.targets.emplace_back(buf, std::move(qg));
  }
  return out;
}

}  // namespace qsuggest
