// Completion experiments, log simulation and the synthetic benchmark.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "qsuggest/harness.hpp"
#include "qsuggest/log_simulation.hpp"
#include "qsuggest/rankers.hpp"
#include "qsuggest/synthetic.hpp"

namespace fs = std::filesystem;
using namespace qsuggest;

namespace {

struct DataArgs {
  std::string nodes, edges, log, targets;
  bool inject = false;

  void add(CLI::App& app, bool with_targets) {
    app.add_option("--graph-nodes", nodes, "node table (tab-separated)")->required()->check(CLI::ExistingFile);
    app.add_option("--graph-edges", edges, "edge table (tab-separated)")->required()->check(CLI::ExistingFile);
    app.add_option("--log", log, "query log")->required()->check(CLI::ExistingFile);
    if (with_targets)
      app.add_option("--targets", targets, "directory of *.qg target graphs")->required()->check(CLI::ExistingDirectory);
    app.add_flag("--inject-negatives", inject, "add schema-derived negatives to the log before training");
  }
};

struct RankerArgs {
  std::vector<std::string> rankers{"rdp"};
  std::size_t n_paths = 25, tau = 25, car_min_support = 1;
  double car_min_confidence = 0.0;

  void add(CLI::App& app, bool many) {
    auto* opt = app.add_option("--ranker", rankers, "rdp|rdp-noneg|nb|car|freq|alpha")->capture_default_str();
    if (many) opt->delimiter(',');
    else opt->expected(1);
    app.add_option("--car-min-support", car_min_support, "CAR minimum rule support (count)")->capture_default_str();
    app.add_option("--car-min-confidence", car_min_confidence, "CAR minimum rule confidence")->capture_default_str();
  }
  RankerSpec spec(std::string const& id, std::size_t n, std::size_t t) const {
    RankerSpec s;
    s.id = id;
    s.rdp.n_paths = n;
    s.rdp.tau = t;
    s.car_min_support = car_min_support;
    s.car_min_confidence = car_min_confidence;
    return s;
  }
};

struct Loaded {
  DataGraph graph;
  QueryLog log;
  std::vector<CompletionInstance> instances;
};

Loaded load(DataArgs const& a) {
  Loaded out;
  out.graph = load_data_graph(a.nodes, a.edges);
  out.log = load_log(a.log, out.graph.edge_types());
  if (a.inject) out.log = inject_negatives(out.log, out.graph);
  if (!a.targets.empty()) {
    for (auto const& [name, target] : load_targets(a.targets, out.graph)) {
      auto inst = expand_target_to_instances(target, name);
      out.instances.insert(out.instances.end(), inst.begin(), inst.end());
    }
    if (out.instances.empty()) throw InvalidArgument("no *.qg targets in " + a.targets);
  }
  std::clog << "loaded " << out.graph.node_count() << " nodes, " << out.graph.edges().size() << " edges, "
            << out.log.size() << " sessions, " << out.instances.size() << " instances\n";
  return out;
}

/// Writes to `path`, or standard output when empty or "-".
class Output {
 public:
  explicit Output(std::string const& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<std::size_t> parse_list(std::string const& text) {
  std::vector<std::size_t> out;
  for (auto t : split(text, ',')) {
    auto const s = std::string(trim(t));
    if (s.empty()) continue;
    std::size_t pos = 0;
    auto const v = std::stoull(s, &pos);
    if (pos != s.size() || v < 1) throw InvalidArgument("expected positive integers, got '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-graph edge suggestion experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "complete every target instance with one or more rankers");
  DataArgs run_data;
  RankerArgs run_ranker;
  std::size_t cap = kDefaultSuggestionCap;
  std::uint64_t seed = 0;
  std::string out_path;
  run_data.add(*run, true);
  run_ranker.add(*run, true);
  run->add_option("--n-paths", run_ranker.n_paths, "RDP decision paths per call")->capture_default_str();
  run->add_option("--tau", run_ranker.tau, "RDP stopping threshold on |W|")->capture_default_str();
  run->add_option("--cap", cap, "suggestion cap per instance")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "run seed")->capture_default_str();
  run->add_option("--out", out_path, "results file (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "RDP over an n_paths x tau grid");
  DataArgs sweep_data;
  std::string sweep_n = "1,5,10,25", sweep_tau = "1,5,10,25", sweep_ranker = "rdp";
  sweep_data.add(*sweep, true);
  sweep->add_option("--ranker", sweep_ranker, "rdp|rdp-noneg")->capture_default_str()->check(
      CLI::IsMember({"rdp", "rdp-noneg"}));
  sweep->add_option("--n-paths", sweep_n, "comma-separated n_paths values")->capture_default_str();
  sweep->add_option("--tau", sweep_tau, "comma-separated tau values")->capture_default_str();
  sweep->add_option("--cap", cap, "suggestion cap per instance")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "run seed")->capture_default_str();
  sweep->add_option("--out", out_path, "grid file (default stdout)");

  auto* sim = app.add_subcommand("simulate-log", "build a query log from the data graph or external sets");
  std::string method, sim_nodes, sim_edges, windows, input;
  std::size_t min_support = 0, max_itemset = 5, max_negatives = 0;
  bool sim_inject = false;
  sim->add_option("--method", method, "datapos|cooccur|import")->required()->check(
      CLI::IsMember({"datapos", "cooccur", "import"}));
  sim->add_option("--graph-nodes", sim_nodes, "node table")->required()->check(CLI::ExistingFile);
  sim->add_option("--graph-edges", sim_edges, "edge table")->required()->check(CLI::ExistingFile);
  sim->add_option("--min-support", min_support, "absolute support threshold (datapos, cooccur)");
  sim->add_option("--max-itemset", max_itemset, "largest frequent itemset kept")->capture_default_str();
  sim->add_option("--windows", windows, "entity windows, one per line (cooccur)")->check(CLI::ExistingFile);
  sim->add_option("--input", input, "positive edge-type sets, one per line (import)")->check(CLI::ExistingFile);
  sim->add_flag("--inject-negatives", sim_inject, "append schema-derived negatives to every session");
  sim->add_option("--max-negatives", max_negatives, "cap on negatives per session, 0 = none")->capture_default_str();
  sim->add_option("--out", out_path, "log file (default stdout)");

  auto* dump = app.add_subcommand("dump-model", "train NB or CAR on a log and write its tables");
  std::string dump_nodes, dump_edges, dump_log, dump_ranker;
  RankerArgs dump_args;
  dump->add_option("--graph-nodes", dump_nodes, "node table")->required()->check(CLI::ExistingFile);
  dump->add_option("--graph-edges", dump_edges, "edge table")->required()->check(CLI::ExistingFile);
  dump->add_option("--log", dump_log, "query log")->required()->check(CLI::ExistingFile);
  dump->add_option("--ranker", dump_ranker, "nb|car")->required()->check(CLI::IsMember({"nb", "car"}));
  dump->add_option("--car-min-support", dump_args.car_min_support, "CAR minimum rule support")->capture_default_str();
  dump->add_option("--car-min-confidence", dump_args.car_min_confidence, "CAR minimum confidence")
      ->capture_default_str();
  dump->add_option("--out", out_path, "table file (default stdout)");

  auto* synth = app.add_subcommand("synth", "write the synthetic benchmark to a directory");
  SyntheticConfig scfg;
  std::string synth_dir;
  synth->add_option("--dir", synth_dir, "output directory")->required();
  synth->add_option("--seed", scfg.seed, "benchmark seed")->capture_default_str();
  synth->add_option("--node-types", scfg.node_types)->capture_default_str();
  synth->add_option("--families", scfg.families)->capture_default_str();
  synth->add_option("--intents-per-family", scfg.intents_per_family)->capture_default_str();
  synth->add_option("--distractors", scfg.distractor_edge_types, "unrelated edge types")->capture_default_str();
  synth->add_option("--sessions", scfg.sessions)->capture_default_str();
  synth->add_option("--dropout", scfg.dropout, "chance an intent edge is left out")->capture_default_str();
  synth->add_option("--noise", scfg.noise, "chance of one unrelated edge per session")->capture_default_str();
  synth->add_option("--targets", scfg.targets)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto const data = load(run_data);
      std::vector<CompletionResult> all;
      for (auto const& id : run_ranker.rankers) {
        auto const ranker = make_ranker(run_ranker.spec(id, run_ranker.n_paths, run_ranker.tau), data.log);
        auto results = run_all(data.graph, data.instances, *ranker, cap, seed);
        std::clog << id << ": " << results.size() << " instances done\n";
        all.insert(all.end(), std::make_move_iterator(results.begin()), std::make_move_iterator(results.end()));
      }
      Output out(out_path);
      write_results(out.get(), all);
      write_summary(out.get(), report(all));
    } else if (sweep->parsed()) {
      auto const ns = parse_list(sweep_n), taus = parse_list(sweep_tau);
      auto const data = load(sweep_data);
      Output out(out_path);
      auto& os = out.get();
      os << "# suggestions exclude the given initial edge; capped runs are counted at the cap\n";
      os << "ranker\tn_paths\ttau\tinstances\tmean_suggestions\tmedian_suggestions\tcompleted_fraction\tcapped\n";
      RankerArgs base;
      for (auto n : ns)
        for (auto t : taus) {
          auto const ranker = make_ranker(base.spec(sweep_ranker, n, t), data.log);
          auto const results = run_all(data.graph, data.instances, *ranker, cap, seed);
          auto const s = report(results).rankers.front();
          os << sweep_ranker << '\t' << n << '\t' << t << '\t' << s.instances << '\t' << std::fixed
             << std::setprecision(3) << s.mean_suggestions << '\t' << s.median_suggestions << '\t'
             << s.completion_fraction << '\t' << s.capped << '\n'
             << std::defaultfloat;
          std::clog << "n_paths=" << n << " tau=" << t << " mean=" << s.mean_suggestions << '\n';
        }
    } else if (sim->parsed()) {
      auto const g = load_data_graph(sim_nodes, sim_edges);
      SimulationConfig cfg;
      cfg.max_itemset_size = max_itemset;
      QueryLog log;
      if (method == "import") {
        if (input.empty()) throw InvalidArgument("--method import needs --input");
        log = import_positive_sets(input, g.edge_types());
      } else {
        if (min_support == 0) throw InvalidArgument("--min-support is required for --method " + method);
        cfg.min_support = min_support;
        if (method == "datapos") {
          log = datapos_simulate(g, cfg);
        } else {
          if (windows.empty()) throw InvalidArgument("--method cooccur needs --windows");
          auto r = cooccurrence_ingest(load_entity_windows(windows), g, cfg);
          if (r.skipped_entities) std::clog << r.skipped_entities << " window entities not in the graph\n";
          log = std::move(r.log);
        }
      }
      if (sim_inject) log = inject_negatives(log, g, NegativeInjectionConfig{max_negatives});
      Output out(out_path);
      write_log(out.get(), log, g.edge_types());
      std::clog << log.size() << " sessions\n";
    } else if (dump->parsed()) {
      auto const g = load_data_graph(dump_nodes, dump_edges);
      auto const log = load_log(dump_log, g.edge_types());
      Output out(out_path);
      if (dump_ranker == "nb")
        nb_train(log).write_tsv(out.get(), g.edge_types());
      else
        car_train(log, dump_args.car_min_support, dump_args.car_min_confidence).write_tsv(out.get(), g.edge_types());
    } else if (synth->parsed()) {
      auto const bench = make_synthetic_benchmark(scfg);
      fs::path const dir(synth_dir);
      fs::create_directories(dir / "targets");
      std::ofstream nodes(dir / "nodes.tsv"), edges(dir / "edges.tsv"), log(dir / "log.txt");
      write_data_graph(bench.graph, nodes, edges);
      write_log(log, bench.log, bench.graph.edge_types());
      for (auto const& [name, qg] : bench.targets) {
        std::ofstream t(dir / "targets" / (name + ".qg"));
        write_query_graph(t, qg, bench.graph);
      }
      if (!nodes || !edges || !log) throw Error("cannot write into " + synth_dir);
      std::clog << "wrote " << bench.graph.edge_types().size() << " edge types, " << bench.log.size()
                << " sessions, " << bench.targets.size() << " targets to " << synth_dir << '\n';
    }
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
