// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracle/brute_force.hpp"
#include "qsuggest/apriori.hpp"
#include "qsuggest/harness.hpp"
#include "qsuggest/log_simulation.hpp"
#include "qsuggest/rankers.hpp"
#include "qsuggest/service_api.hpp"
#include "qsuggest/similarity.hpp"
#include "qsuggest/synthetic.hpp"
#include "test_support.hpp"

using namespace qsuggest;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, std::string const& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

int failures = 0;

void criterion(std::string const& name, std::function<void(Verdict&)> const& body) {
  Verdict v;
  auto const start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (std::exception const& e) {
    v.pass = false;
    v.detail << "exception: " << e.what() << "; ";
  }
  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s  %-34s %s(%.2f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str(), secs);
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(double x, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark runs shared by the direction-of-effect criteria.

constexpr std::uint64_t kBenchmarkSeeds[] = {1, 2, 3, 4, 5};

struct BenchmarkSet {
  std::vector<SyntheticBenchmark> benches;
  std::vector<std::vector<CompletionInstance>> instances;
};

BenchmarkSet const& benchmarks() {
  static BenchmarkSet const set = [] {
    BenchmarkSet s;
    for (auto seed : kBenchmarkSeeds) {
      SyntheticConfig cfg;
      cfg.seed = seed;
      s.benches.push_back(make_synthetic_benchmark(cfg));
      std::vector<CompletionInstance> inst;
      for (auto const& [name, target] : s.benches.back().targets) {
        auto more = expand_target_to_instances(target, name);
        inst.insert(inst.end(), more.begin(), more.end());
      }
      s.instances.push_back(std::move(inst));
    }
    return s;
  }();
  return set;
}

/// Mean suggestions per seed, averaged over seeds.
double seed_averaged_mean(RankerSpec const& spec) {
  auto const& set = benchmarks();
  double total = 0;
  for (std::size_t i = 0; i < set.benches.size(); ++i) {
    auto const ranker = make_ranker(spec, set.benches[i].log);
    auto const results = run_all(set.benches[i].graph, set.instances[i], *ranker, kDefaultSuggestionCap,
                                 kBenchmarkSeeds[i]);
    total += report(results).rankers.front().mean_suggestions;
  }
  return total / static_cast<double>(set.benches.size());
}

RankerSpec spec_for(std::string id, std::size_t n_paths = 25, std::size_t tau = 25) {
  RankerSpec s;
  s.id = std::move(id);
  s.rdp.n_paths = n_paths;
  s.rdp.tau = tau;
  return s;
}

void check_benchmark_shape(Verdict& v) {
  for (auto const& b : benchmarks().benches) {
    v.require(b.graph.edge_types().size() >= 200, "benchmark has >= 200 edge types");
    v.require(b.log.size() >= 1000, "benchmark has >= 1000 sessions");
    v.require(b.targets.size() >= 30, "benchmark has >= 30 targets");
    for (auto const& [name, t] : b.targets)
      v.require(t.edge_count() >= 3 && t.edge_count() <= 5, "target " + name + " has 3-5 edges");
  }
}

// ---------------------------------------------------------------------------

QueryGraph random_query_graph(std::mt19937_64& rng, std::size_t max_nodes) {
  QueryGraph qg;
  auto const n = 1 + uniform_below(rng, max_nodes);
  for (std::size_t i = 0; i < n; ++i) {
    auto const label = static_cast<std::uint32_t>(uniform_below(rng, 3));
    if (uniform_below(rng, 4) == 0)
      qg.push_node(EntityName{NodeIndex(label)});
    else
      qg.push_node(TypeLabel{NodeTypeId(label)});
  }
  auto const m = 1 + uniform_below(rng, 5);
  for (std::size_t i = 0; i < m; ++i)
    qg.push_edge(static_cast<LocalId>(uniform_below(rng, n)), static_cast<LocalId>(uniform_below(rng, n)),
                 EdgeTypeId(static_cast<std::uint32_t>(uniform_below(rng, 3))));
  return qg;
}

DataGraph adversarial_graph(std::size_t wrong) {
  DataGraph::Builder b;
  b.add_node("a", "A", "d", {"A"});
  b.add_node("b", "B", "d", {"B"});
  b.add_node("c", "C", "d", {"C"});
  b.add_node("x", "X", "d", {"X"});
  for (std::size_t i = 0; i < wrong; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "a%04zu", i);
    b.add_edge("a", "x", name);
  }
  b.add_edge("a", "b", "zz_first");
  b.add_edge("a", "c", "zz_second");
  return std::move(b).build();
}

/// Random client session against the JSON API, including invalid calls.
void random_client(ServiceApi& api, DataGraph const& g, std::mt19937_64& rng) {
  auto post = [&](std::string const& path, Json body) { return api.handle({"POST", path, {}, std::move(body)}); };
  auto get = [&](std::string const& path, std::map<std::string, std::string> q) {
    return api.handle({"GET", path, std::move(q), Json()});
  };
  auto random_type = [&] {
    return g.node_types().name(NodeTypeId(static_cast<std::uint32_t>(uniform_below(rng, g.node_types().size()))));
  };
  auto const id = post("/sessions", Json::object()).body.at("session").get<std::string>();
  auto const base = "/sessions/" + id;
  post(base + "/nodes", {{"kind", "type"}, {"label", random_type()}});
  std::size_t nodes = 1;
  auto const steps = 2 + uniform_below(rng, 6);
  for (std::size_t step = 0; step < steps; ++step) {
    if (uniform_below(rng, 4) != 0) {
      bool const refresh = uniform_below(rng, 3) == 0;
      auto const batch = get(base + "/suggestions", {{"mode", "active"}, {"refresh", refresh ? "1" : "0"}});
      if (batch.status != 200) continue;
      std::vector<std::size_t> accepted;
      for (std::size_t i = 0; i < batch.body.at("suggestions").size(); ++i)
        if (uniform_below(rng, 2) == 0) accepted.push_back(i);
      auto version = batch.body.at("version").get<std::uint64_t>();
      if (uniform_below(rng, 10) == 0) ++version;  // stale
      auto const r = post(base + "/respond", {{"version", version}, {"accepted", accepted}});
      if (r.status == 200) nodes += r.body.at("added").size();
    } else {
      auto const r = post(base + "/nodes", {{"kind", "type"}, {"label", random_type()}});
      if (r.status != 201) continue;
      auto const fresh = nodes++;
      auto const other = uniform_below(rng, fresh);
      auto const ranked = post(base + "/edges/suggest", {{"src", other}, {"dst", fresh}});
      if (ranked.status != 200) continue;
      auto const& pick = ranked.body.at("suggestions")[uniform_below(rng, ranked.body.at("suggestions").size())];
      bool const forward = pick.at("forward").get<bool>();
      post(base + "/edges", {{"src", forward ? other : fresh}, {"dst", forward ? fresh : other}, {"etype", pick.at("etype")}});
    }
  }
  get(base, {});
  if (uniform_below(rng, 5) != 0) post(base + "/submit", Json::object());
}

std::string slurp(fs::path const& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");

  criterion("rdp-oracle-equivalence", [](Verdict& v) {
    auto const start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2718);
    std::vector<EdgeTypeId> cands;
    for (std::uint32_t e = 0; e < 10; ++e) cands.push_back(EdgeTypeId(e));
    double worst = 0;
    std::size_t cases = 0, singles = 0;
    for (int trial = 0; trial < 60; ++trial) {
      auto const log = test::small_random_log(500 + static_cast<std::uint64_t>(trial), 50);
      auto q = test::random_session(rng, 5);
      if (trial < 10) q = test::random_session(rng, 1);
      std::size_t const tau = 1 + uniform_below(rng, 8);
      auto const exact = oracle::rdp_expected_score(cands, q, log, tau);
      auto const got = RdpRanker(log, {10000, tau, 99, true}).score(cands, q, static_cast<std::uint64_t>(trial));
      ++cases;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (q.size() == 1) v.require(got[i] == exact[i], "exact equality for |Q| = 1");
        worst = std::max(worst, std::abs(got[i] - exact[i]));
      }
      singles += q.size() == 1;
    }
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(worst <= 0.05, "max abs deviation <= 0.05");
    v.require(secs < 30, "runtime < 30 s");
    v.detail << cases << " cases (" << singles << " with |Q|=1), max abs deviation " << fmt(worst, 4) << " ";
  });

  criterion("reference-log-worked-values", [](Verdict& v) {
    test::ReferenceLog t;
    v.require(t.log.count({t.pos("education"), t.pos("founder")}) == 2, "count({+education,+founder}) = 2");
    v.require(t.log.count({t.pos("director")}) == 3, "count({+director}) = 3");
    v.require(t.log.supp(t.id("founder"), {t.pos("education")}).value() == 1.0, "supp(founder,{+education}) = 1");
    auto const w = t.log.supp(t.id("writer"), {t.pos("director")});
    v.require(w.numerator == 1 && w.denominator == 3, "supp(writer,{+director}) = 1/3");
    v.require(t.log.supp(t.id("producer"), {t.neg("director")}).value() == 1.0, "supp(producer,{-director}) = 1");
    v.detail << "counts 2, 3; supports 1, 1/3, 1 ";
  });

  criterion("similarity-oracle", [](Verdict& v) {
    std::mt19937_64 rng(31337);
    std::size_t pairs = 0;
    for (int trial = 0; trial < 300; ++trial) {
      auto const gu = random_query_graph(rng, 4), gt = random_query_graph(rng, 4);
      v.require(similarity(gu, gt).numerator == oracle::similarity_numerator_bruteforce(gu, gt),
                "numerator equals exhaustive injection");
      v.require(similarity(gt, gt).value() == 1.0, "identity pair is exactly 1");
      ++pairs;
    }
    v.detail << pairs << " random pairs with <= 4 nodes ";
  });

  criterion("apriori-oracle", [](Verdict& v) {
    std::mt19937_64 rng(4242);
    std::size_t collections = 0;
    for (int trial = 0; trial < 120; ++trial) {
      auto const alphabet = 3 + uniform_below(rng, 10);  // <= 12
      std::vector<std::vector<int>> rows(5 + uniform_below(rng, 30));
      for (auto& r : rows)
        for (std::size_t x = 0; x < alphabet; ++x)
          if (uniform_below(rng, 3) == 0) r.push_back(static_cast<int>(x));
      auto const min_support = 1 + static_cast<std::size_t>(trial % 3);
      std::map<std::vector<int>, std::size_t> got;
      for (auto const& f : apriori_frequent_itemsets(rows, min_support, alphabet)) got.emplace(f.items, f.support);
      v.require(got == oracle::frequent_itemsets_power_set(rows, min_support, alphabet),
                "itemsets equal power-set enumeration");
      ++collections;
    }
    v.detail << collections << " collections, min_support 1..3 ";
  });

  criterion("inject-negatives-fixture", [](Verdict& v) {
    auto const g = load_data_graph(test::fixture("schema6.nodes"), test::fixture("schema6.edges"));
    auto const positives = load_log(test::fixture("schema6.log"), g.edge_types());
    auto const expected = load_log(test::fixture("schema6.expected"), g.edge_types());
    v.require(g.node_types().size() == 6, "fixture has 6 node types");
    auto const out = inject_negatives(positives, g);
    v.require(out.size() == expected.size() && out.size() == positives.size(), "one output session per input");
    for (SessionId s = 0; s < std::min(out.size(), expected.size()); ++s) {
      std::set<SignedEdge> a(out.session(s).begin(), out.session(s).end());
      std::set<SignedEdge> b(expected.session(s).begin(), expected.session(s).end());
      v.require(a == b, "session " + std::to_string(s) + " equals hand-enumerated negatives");
      for (auto e : positives.session(s)) v.require(out.contains(s, e), "positives preserved");
    }
    v.detail << out.size() << " sessions over 6 node types ";
  });

  double rdp_mean = 0;
  criterion("rdp-beats-rdp-noneg", [&](Verdict& v) {
    auto const start = std::chrono::steady_clock::now();
    check_benchmark_shape(v);
    rdp_mean = seed_averaged_mean(spec_for("rdp"));
    double const noneg = seed_averaged_mean(spec_for("rdp-noneg"));
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(rdp_mean < noneg, "mean(rdp) < mean(rdp-noneg)");
    v.require(secs < 600, "runtime < 10 min");
    v.detail << "rdp " << fmt(rdp_mean) << " vs rdp-noneg " << fmt(noneg) << " over 5 seeds ";
  });

  criterion("rdp-beats-baselines", [&](Verdict& v) {
    check_benchmark_shape(v);
    std::map<std::string, double> mean;
    for (std::string id : {"alpha", "freq", "nb", "car"}) mean[id] = seed_averaged_mean(spec_for(id));
    v.require(rdp_mean <= mean["alpha"] / 1.2, "rdp <= alpha / 1.2");
    v.require(rdp_mean <= mean["freq"] / 1.2, "rdp <= freq / 1.2");
    v.require(rdp_mean <= mean["nb"], "rdp <= nb");
    v.require(rdp_mean <= mean["car"], "rdp <= car");
    v.detail << "rdp " << fmt(rdp_mean) << ", alpha " << fmt(mean["alpha"]) << ", freq " << fmt(mean["freq"])
             << ", nb " << fmt(mean["nb"]) << ", car " << fmt(mean["car"]) << " ";
  });

  criterion("n-paths-saturation", [](Verdict& v) {
    std::vector<std::pair<std::size_t, double>> curve;
    for (std::size_t n : {1, 2, 5, 10, 25}) curve.emplace_back(n, seed_averaged_mean(spec_for("rdp", n, 10)));
    for (std::size_t i = 1; i < curve.size(); ++i)
      v.require(curve[i].second <= curve[i - 1].second * 1.05,
                "non-increasing within 5% at N=" + std::to_string(curve[i].first));
    double const m10 = curve[3].second, m25 = curve[4].second;
    v.require(std::abs(m10 - m25) <= 0.10 * m25, "|mean(N=10) - mean(N=25)| <= 10% of mean(N=25)");
    v.detail << "tau=10:";
    for (auto [n, m] : curve) v.detail << " N=" << n << " " << fmt(m);
    v.detail << " ";
  });

  criterion("harness-protocol-fidelity", [](Verdict& v) {
    auto const& set = benchmarks();
    std::size_t targets = 0;
    for (auto const& b : set.benches)
      for (auto const& [name, t] : b.targets) {
        auto const inst = expand_target_to_instances(t, name);
        v.require(inst.size() == t.edge_count(), "k-edge target gives k instances");
        for (std::size_t i = 0; i < inst.size(); ++i) v.require(inst[i].initial_edge == i, "one start per edge");
        ++targets;
      }

    auto const g = adversarial_graph(250);
    QueryGraph t;
    for (auto n : {"A", "B", "C"}) t.push_node(TypeLabel{g.node_types().at(n)});
    t.push_edge(0, 1, g.edge_types().at("zz_first"));
    t.push_edge(0, 2, g.edge_types().at("zz_second"));
    QueryLog flat;
    flat.add_session({SignedEdge::pos(g.edge_types().at("a0000"))});
    std::size_t capped = 0;
    for (auto const& inst : expand_target_to_instances(t, "adv"))
      for (std::string id : {"alpha", "freq"}) {
        auto const r = run_completion(g, inst, *make_ranker(spec_for(id), flat), kDefaultSuggestionCap, 0);
        v.require(!r.completed && r.suggestions_used == 200 && r.transcript.size() == 200,
                  "capped run stops at exactly 200");
        capped += r.capped();
      }

    std::size_t replayed = 0;
    auto const& bench = set.benches.front();
    for (std::string id : {"rdp", "rdp-noneg", "nb", "car", "freq", "alpha"}) {
      auto const ranker = make_ranker(spec_for(id), bench.log);
      auto const first = run_all(bench.graph, set.instances.front(), *ranker, kDefaultSuggestionCap, 7);
      auto const again = run_all(bench.graph, set.instances.front(), *make_ranker(spec_for(id), bench.log),
                                 kDefaultSuggestionCap, 7);
      for (std::size_t i = 0; i < first.size(); ++i) {
        v.require(first[i].same_outcome(again[i]), "rerun gives identical CompletionResult");
        v.require(replay_matches(bench.graph, set.instances.front()[i], *ranker, first[i], derive_stream(7, i)),
                  "transcript replay reproduces suggestions");
        v.require(first[i].suggestions_used <= kDefaultSuggestionCap, "suggestions <= cap");
        ++replayed;
      }
    }
    v.detail << targets << " targets expanded, " << capped << " capped runs at 200, " << replayed
             << " runs replayed ";
  });

  criterion("service-transcript-replay", [](Verdict& v) {
    auto const root = fs::temp_directory_path() / ("qsuggest_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    SyntheticConfig scfg;
    scfg.seed = 9;
    auto const bench = make_synthetic_benchmark(scfg);
    std::size_t transcripts = 0, requests = 0;
    for (std::uint64_t round = 0; round < 5; ++round) {
      auto config = [&](std::string const& tag) {
        ServiceConfig c;
        c.k = 1 + round % 4;
        c.seed = 100 + round;
        c.ranker.id = round % 2 ? "rdp" : "nb";
        c.log_path = (root / (tag + std::to_string(round) + ".log")).string();
        c.archive_dir = (root / (tag + std::to_string(round))).string();
        return c;
      };
      std::ostringstream transcript;
      {
        TranscriptWriter writer(transcript);
        SuggestionService svc(bench.graph, bench.log, config("rec"));
        ServiceApi api(svc, &writer);
        std::mt19937_64 rng(round);
        for (int s = 0; s < 12; ++s) random_client(api, bench.graph, rng);
      }
      SuggestionService fresh(bench.graph, bench.log, config("rep"));
      ServiceApi api(fresh);
      std::istringstream in(transcript.str());
      auto const outcome = replay_transcript(api, in);
      v.require(outcome.identical(), "replayed responses identical" +
                                         (outcome.identical() ? std::string() : ": " + outcome.mismatches.front()));
      auto const rec_log = slurp(config("rec").log_path), rep_log = slurp(config("rep").log_path);
      v.require(!rec_log.empty() && rec_log == rep_log, "persisted sessions identical");
      for (auto const& f : fs::directory_iterator(config("rec").archive_dir))
        v.require(slurp(f.path()) == slurp(fs::path(config("rep").archive_dir) / f.path().filename()),
                  "archived query graphs identical");
      ++transcripts;
      requests += outcome.requests;
    }
    fs::remove_all(root);
    v.detail << transcripts << " transcripts, " << requests << " requests ";
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
