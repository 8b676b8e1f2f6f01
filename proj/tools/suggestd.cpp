// HTTP suggestion service, with transcript recording and offline replay.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qsuggest/service_http.hpp"

using namespace qsuggest;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-graph suggestion service"};
  std::string nodes, edges, log_path, append_log, archive, transcript, replay, bind = "127.0.0.1";
  int port = 8080;
  ServiceConfig cfg;
  app.add_option("--graph-nodes", nodes, "node table (tab-separated)")->required()->check(CLI::ExistingFile);
  app.add_option("--graph-edges", edges, "edge table (tab-separated)")->required()->check(CLI::ExistingFile);
  app.add_option("--log", log_path, "query log to train on; created if missing")->required();
  app.add_option("--append-log", append_log, "where submitted sessions go (default: --log)");
  app.add_option("--archive", archive, "directory for submitted query graphs");
  app.add_option("--k", cfg.k, "active suggestions per batch")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--ranker", cfg.ranker.id, "rdp|rdp-noneg|nb|car|freq|alpha")->capture_default_str();
  app.add_option("--n-paths", cfg.ranker.rdp.n_paths, "RDP decision paths per call")->capture_default_str();
  app.add_option("--tau", cfg.ranker.rdp.tau, "RDP stopping threshold")->capture_default_str();
  app.add_option("--seed", cfg.seed, "service seed")->capture_default_str();
  app.add_option("--bind", bind, "listen address")->capture_default_str();
  app.add_option("--port", port, "listen port, 0 picks a free one")->capture_default_str();
  app.add_option("--transcript", transcript, "append every request and response to this JSONL file");
  app.add_option("--replay", replay, "replay a transcript offline and report differences")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    auto const graph = load_data_graph(nodes, edges);
    QueryLog log;
    if (std::filesystem::exists(log_path)) log = load_log(log_path, graph.edge_types());
    cfg.log_path = append_log.empty() ? log_path : append_log;
    cfg.archive_dir = archive;

    if (!replay.empty()) {
      SuggestionService service(graph, log, cfg);
      ServiceApi api(service);
      std::ifstream in(replay);
      auto const outcome = replay_transcript(api, in);
      for (auto const& m : outcome.mismatches) std::cout << m << '\n';
      std::cout << outcome.requests << " requests replayed, " << outcome.mismatches.size() << " differ\n";
      return outcome.identical() ? 0 : 2;
    }

    SuggestionService service(graph, log, cfg);
    std::ofstream transcript_file;
    std::unique_ptr<TranscriptWriter> writer;
    if (!transcript.empty()) {
      transcript_file.open(transcript, std::ios::app);
      if (!transcript_file) throw Error("cannot open " + transcript);
      writer = std::make_unique<TranscriptWriter>(transcript_file);
    }
    ServiceApi api(service, writer.get());
    httplib::Server server;
    mount_api(server, api);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    int const bound = port == 0 ? server.bind_to_any_port(bind) : (server.bind_to_port(bind, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + bind + ":" + std::to_string(port));
    std::clog << "serving " << graph.node_count() << " nodes, " << log.size() << " sessions, ranker "
              << service.ranker_name() << " on http://" << bind << ":" << bound << '\n';
    server.listen_after_bind();
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
