#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qsuggest/harness.hpp"
#include "qsuggest/rankers.hpp"
#include "qsuggest/synthetic.hpp"
#include "test_support.hpp"

namespace qsuggest {
namespace {

QueryGraph chain(std::size_t edges) {
  QueryGraph qg;
  qg.push_node(TypeLabel{NodeTypeId(0)});
  for (std::size_t i = 0; i < edges; ++i) {
    qg.push_node(TypeLabel{NodeTypeId(static_cast<std::uint32_t>(i + 1))});
    qg.push_edge(static_cast<LocalId>(i), static_cast<LocalId>(i + 1), EdgeTypeId(static_cast<std::uint32_t>(i)));
  }
  return qg;
}

TEST(ExpandTargets, OneInstancePerEdge) {
  auto const inst = expand_target_to_instances(chain(3), "q");
  ASSERT_EQ(inst.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(inst[i].initial_edge, i);
  EXPECT_EQ(inst[2].id, "q#2");
}

// The 2/3/4/5/6-edge mix of 43 targets sums to 169 edges, hence 169 instances.
TEST(ExpandTargets, FortyThreeMixedTargetsGiveOneInstancePerEdge) {
  std::vector<std::size_t> sizes;
  for (auto [count, edges] : std::vector<std::pair<int, std::size_t>>{{6, 2}, {10, 3}, {9, 4}, {17, 5}, {1, 6}})
    for (int i = 0; i < count; ++i) sizes.push_back(edges);
  ASSERT_EQ(sizes.size(), 43u);
  std::size_t total = 0;
  for (auto n : sizes) total += expand_target_to_instances(chain(n)).size();
  EXPECT_EQ(total, 169u);
}

TEST(ExpandTargets, EdgelessTargetRejected) {
  QueryGraph qg;
  qg.push_node(TypeLabel{NodeTypeId(0)});
  EXPECT_THROW(expand_target_to_instances(qg), InvalidArgument);
}

/// Scores 1 for target edge types not yet accepted.
class TargetOracle final : public EdgeRanker {
 public:
  explicit TargetOracle(QueryGraph const& target) {
    for (auto const& e : target.edges()) wanted_.insert(e.etype);
  }
  std::string name() const override { return "oracle"; }
  std::vector<double> score(std::span<EdgeTypeId const> candidates, QuerySession const& session,
                            std::uint64_t) const override {
    std::vector<double> out;
    for (auto c : candidates) out.push_back(wanted_.contains(c) && !session.contains(SignedEdge::pos(c)) ? 1 : 0);
    return out;
  }

 private:
  std::set<EdgeTypeId> wanted_;
};

class SyntheticHarness : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticConfig cfg;
    cfg.seed = 3;
    cfg.sessions = 400;
    cfg.targets = 10;
    bench_ = new SyntheticBenchmark(make_synthetic_benchmark(cfg));
  }
  static void TearDownTestSuite() {
    delete bench_;
    bench_ = nullptr;
  }
  static std::vector<CompletionInstance> instances() {
    std::vector<CompletionInstance> out;
    for (auto const& [name, t] : bench_->targets)
      for (auto& i : expand_target_to_instances(t, name)) out.push_back(std::move(i));
    return out;
  }
  static SyntheticBenchmark* bench_;
};
SyntheticBenchmark* SyntheticHarness::bench_ = nullptr;

TEST_F(SyntheticHarness, BenchmarkShape) {
  EXPECT_GE(bench_->graph.edge_types().size(), 200u);
  EXPECT_EQ(bench_->log.size(), 400u);
  for (auto const& [name, t] : bench_->targets) {
    EXPECT_GE(t.edge_count(), 3u);
    EXPECT_LE(t.edge_count(), 5u);
    EXPECT_TRUE(t.connected());
  }
  EXPECT_FALSE(bench_->log.positive_only());
}

TEST_F(SyntheticHarness, OracleNeedsOneSuggestionPerRemainingEdge) {
  for (auto const& inst : instances()) {
    TargetOracle oracle(inst.target);
    auto r = run_completion(bench_->graph, inst, oracle, 200, 1);
    EXPECT_TRUE(r.completed);
    EXPECT_EQ(r.suggestions_used, inst.target.edge_count() - 1) << inst.id;
    EXPECT_EQ(r.similarity.value(), 1.0);
  }
}

TEST_F(SyntheticHarness, ResultInvariants) {
  for (std::string id : {"rdp", "freq"}) {
    auto ranker = make_ranker({id}, bench_->log);
    for (auto const& inst : instances()) {
      auto r = run_completion(bench_->graph, inst, *ranker, 200, 5);
      EXPECT_LE(r.suggestions_used, r.cap);
      EXPECT_EQ(r.suggestions_used, r.session.size() - 1);
      EXPECT_EQ(r.transcript.size(), r.suggestions_used);
      if (r.completed) {
        EXPECT_EQ(r.similarity.numerator, r.similarity.denominator);
        std::set<EdgeTypeId> want, got;
        for (auto const& e : inst.target.edges()) want.insert(e.etype);
        for (auto e : r.session.edges())
          if (e.positive()) got.insert(e.etype);
        EXPECT_EQ(got, want);
      }
    }
  }
}

TEST_F(SyntheticHarness, ReplayIsBitIdentical) {
  auto const all = instances();
  for (std::string id : {"rdp", "rdp-noneg", "nb", "car"}) {
    RankerSpec spec{id};
    spec.rdp.seed = 11;
    auto ranker = make_ranker(spec, bench_->log);
    auto first = run_all(bench_->graph, all, *ranker, 200, 17);
    auto again = run_all(bench_->graph, all, *make_ranker(spec, bench_->log), 200, 17);
    ASSERT_EQ(first.size(), again.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      EXPECT_TRUE(first[i].same_outcome(again[i])) << id << " " << first[i].instance_id;
      EXPECT_TRUE(replay_matches(bench_->graph, all[i], *ranker, first[i], derive_stream(17, i)));
    }
  }
}

TEST_F(SyntheticHarness, ReplayDetectsTampering) {
  auto const all = instances();
  auto ranker = make_ranker({"alpha"}, bench_->log);
  auto r = run_completion(bench_->graph, all[0], *ranker, 200, 0);
  ASSERT_FALSE(r.transcript.empty());
  auto tampered = r;
  tampered.transcript[0].etype = EdgeTypeId(tampered.transcript[0].etype.value + 1);
  EXPECT_FALSE(replay_matches(bench_->graph, all[0], *ranker, tampered, 0));
}

TEST(Completion, OneEdgeTargetIsAlreadyComplete) {
  auto g = test::films();
  QueryGraph target;
  target.push_node(TypeLabel{g.node_types().at("FilmActor")});
  target.push_node(TypeLabel{g.node_types().at("Film")});
  target.push_edge(0, 1, g.edge_types().at("starring"));
  AlphabeticalRanker alpha;
  auto r = run_completion(g, expand_target_to_instances(target)[0], alpha, 200, 0);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.suggestions_used, 0u);
  EXPECT_EQ(r.similarity.value(), 1.0);
}

TEST(Completion, RejectedTypesBecomeNegatives) {
  auto g = test::films();
  QueryGraph target;
  target.push_node(TypeLabel{g.node_types().at("FilmActor")});
  target.push_node(TypeLabel{g.node_types().at("Film")});
  target.push_node(TypeLabel{g.node_types().at("Location")});
  target.push_edge(0, 1, g.edge_types().at("starring"));
  target.push_edge(0, 2, g.edge_types().at("lives_in"));
  AlphabeticalRanker alpha;
  auto r = run_completion(g, expand_target_to_instances(target)[0], alpha, 200, 0);
  EXPECT_TRUE(r.completed);
  // directed_by, education, featured_in, filmed_at come first alphabetically
  EXPECT_EQ(r.suggestions_used, 5u);
  EXPECT_TRUE(r.session.contains(SignedEdge::neg(g.edge_types().at("education"))));
  EXPECT_TRUE(r.session.contains(SignedEdge::pos(g.edge_types().at("lives_in"))));
}

TEST(Completion, RepeatedEdgeTypeIsPlacedWithoutAnotherSuggestion) {
  auto g = test::films();
  QueryGraph target;
  target.push_node(TypeLabel{g.node_types().at("FilmActor")});
  target.push_node(TypeLabel{g.node_types().at("Film")});
  target.push_node(TypeLabel{g.node_types().at("Film")});
  target.push_edge(0, 1, g.edge_types().at("starring"));
  target.push_edge(0, 2, g.edge_types().at("starring"));
  AlphabeticalRanker alpha;
  auto r = run_completion(g, expand_target_to_instances(target)[1], alpha, 200, 0);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.suggestions_used, 0u);
  EXPECT_EQ(r.initial_placements.size(), 1u);
  EXPECT_EQ(r.similarity.value(), 1.0);
  EXPECT_TRUE(replay_matches(g, expand_target_to_instances(target)[1], alpha, r, 0));
}

/// A node type with `wrong` alphabetically early edge types and one useful
/// late one.
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

QueryGraph adversarial_target(DataGraph const& g) {
  QueryGraph t;
  t.push_node(TypeLabel{g.node_types().at("A")});
  t.push_node(TypeLabel{g.node_types().at("B")});
  t.push_node(TypeLabel{g.node_types().at("C")});
  t.push_edge(0, 1, g.edge_types().at("zz_first"));
  t.push_edge(0, 2, g.edge_types().at("zz_second"));
  return t;
}

TEST(Completion, UninformativeRankingHitsCap) {
  auto g = adversarial_graph(250);
  auto const inst = expand_target_to_instances(adversarial_target(g))[0];
  QueryLog log;
  log.add_session({SignedEdge::pos(g.edge_types().at("a0000"))});
  for (std::string id : {"alpha", "freq"}) {
    auto r = run_completion(g, inst, *make_ranker({id}, log), kDefaultSuggestionCap, 0);
    EXPECT_FALSE(r.completed);
    EXPECT_TRUE(r.capped());
    EXPECT_EQ(r.suggestions_used, 200u);
    EXPECT_EQ(r.transcript.size(), 200u);
    EXPECT_DOUBLE_EQ(r.similarity.value(), 0.5);
  }
}

TEST(Completion, RunsOutOfCandidates) {
  auto g = adversarial_graph(3);
  QueryGraph t = adversarial_target(g);
  t.push_node(TypeLabel{g.node_types().at("B")});
  // never witnessed between A and B, so never offered
  t.push_edge(0, 3, g.edge_types().at("a0001"));
  AlphabeticalRanker alpha;
  auto r = run_completion(g, expand_target_to_instances(t)[0], alpha, 200, 0);
  EXPECT_FALSE(r.completed);
  EXPECT_TRUE(r.ran_out_of_candidates);
  EXPECT_FALSE(r.capped());
}

TEST(Completion, CapMustBePositive) {
  auto g = adversarial_graph(1);
  AlphabeticalRanker alpha;
  EXPECT_THROW(run_completion(g, expand_target_to_instances(adversarial_target(g))[0], alpha, 0, 0),
               InvalidArgument);
}

// --- reporting ----------------------------------------------------------------

CompletionResult result(std::string ranker, std::string id, std::size_t used, bool completed) {
  CompletionResult r;
  r.ranker = std::move(ranker);
  r.instance_id = std::move(id);
  r.suggestions_used = used;
  r.completed = completed;
  r.similarity = {1, 1};
  return r;
}

TEST(Report, SingleResult) {
  std::vector<CompletionResult> rs{result("rdp", "a#0", 10, true)};
  auto rep = report(rs);
  ASSERT_EQ(rep.rankers.size(), 1u);
  EXPECT_EQ(rep.rankers[0].mean_suggestions, 10.0);
  EXPECT_EQ(rep.rankers[0].median_suggestions, 10.0);
  EXPECT_TRUE(rep.pairs.empty());
}

TEST(Report, PairedRowsAndCappedRuns) {
  std::vector<CompletionResult> rs{result("rdp", "a#0", 2, true), result("rdp", "a#1", 4, true),
                                   result("alpha", "a#0", 200, false), result("alpha", "a#1", 4, true)};
  auto rep = report(rs);
  ASSERT_EQ(rep.pairs.size(), 1u);
  auto const& p = rep.pairs[0];
  EXPECT_EQ(p.a, "alpha");
  EXPECT_EQ(p.instances, 2u);
  EXPECT_EQ(p.b_fewer, 1u);
  EXPECT_EQ(p.ties, 1u);
  EXPECT_EQ(rep.rankers[0].ranker, "alpha");
  EXPECT_EQ(rep.rankers[0].capped, 1u);
  EXPECT_EQ(rep.rankers[0].mean_suggestions, 102.0);
  EXPECT_EQ(rep.rankers[0].completion_fraction, 0.5);

  std::ostringstream out;
  write_results(out, rs);
  write_summary(out, rep);
  EXPECT_NE(out.str().find("capped runs are counted at the cap"), std::string::npos);
  EXPECT_NE(out.str().find("alpha\ta#0\t0\t200\t0\t1"), std::string::npos);
  EXPECT_NE(out.str().find("# paired\talpha\trdp\t2"), std::string::npos);
}

TEST(Report, OrderIndependent) {
  std::vector<CompletionResult> rs{result("rdp", "a#0", 2, true), result("nb", "a#0", 3, true),
                                   result("rdp", "a#1", 7, true), result("nb", "a#1", 1, true)};
  auto forward = report(rs);
  std::reverse(rs.begin(), rs.end());
  auto backward = report(rs);
  ASSERT_EQ(forward.rankers.size(), backward.rankers.size());
  for (std::size_t i = 0; i < forward.rankers.size(); ++i) {
    EXPECT_EQ(forward.rankers[i].mean_suggestions, backward.rankers[i].mean_suggestions);
    EXPECT_EQ(forward.rankers[i].median_suggestions, backward.rankers[i].median_suggestions);
  }
  EXPECT_EQ(forward.pairs[0].a_fewer, backward.pairs[0].a_fewer);
}

TEST(Report, EmptyRejected) { EXPECT_THROW(report({}), InvalidArgument); }

TEST(LoadTargets, ReadsQgFilesInNameOrder) {
  auto g = test::films();
  auto const dir = std::filesystem::temp_directory_path() / "qsuggest_targets_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "b.qg") << "#nodes\n0\ttype\tFilmActor\n1\ttype\tFilm\n#edges\n0\t1\tstarring\n";
  std::ofstream(dir / "a.qg") << "#nodes\n0\tname\tHarvard\n1\ttype\tFilm\n#edges\n0\t1\tfeatured_in\n";
  std::ofstream(dir / "notes.txt") << "ignored\n";
  auto targets = load_targets(dir.string(), g);
  ASSERT_EQ(targets.size(), 2u);
  EXPECT_EQ(targets[0].first, "a");
  EXPECT_EQ(targets[1].second.edge_count(), 1u);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_targets(dir.string(), g), NotFoundError);
}

}  // namespace
}  // namespace qsuggest
