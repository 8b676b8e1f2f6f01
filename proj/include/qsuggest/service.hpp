#pragma once

/// Stateful query-construction sessions: active top-k suggestions with
/// accept/ignore recording, passive edge ranking between two chosen nodes,
/// the node catalog, and durable persistence of finished sessions.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsuggest/candidates.hpp"
#include "qsuggest/rankers.hpp"

namespace qsuggest {

struct ServiceConfig {
  std::size_t k = 3;
  RankerSpec ranker;
  std::uint64_t seed = 0;
  std::string log_path;     // submitted sessions are appended here; empty disables persistence
  std::string archive_dir;  // final query graphs are written here as <session>.qg; empty disables

  void validate() const {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    ranker.rdp.validate();
  }
};

enum class SessionState { open, pending, closed };

inline char const* to_string(SessionState s) {
  switch (s) {
    case SessionState::open: return "open";
    case SessionState::pending: return "pending";
    case SessionState::closed: return "closed";
  }
  return "?";
}

struct SuggestionBatch {
  std::uint64_t version = 0;
  std::vector<RankedSuggestion> items;
};

struct ActiveResponse {
  std::vector<SignedEdge> appended;
  std::vector<std::pair<std::size_t, LocalId>> added;  // batch index -> far node
};

struct PassiveSuggestion {
  EdgeTypeId etype;
  double score = 0.0;
  bool forward = false;
  bool backward = false;
};

struct SessionSnapshot {
  std::string id;
  SessionState state = SessionState::open;
  QueryGraph graph;
  QuerySession session;
  std::optional<SuggestionBatch> outstanding;
  std::chrono::system_clock::time_point created;
  std::chrono::system_clock::time_point updated;
};

enum class CatalogLevel { domains, types, names };

struct CatalogEntry {
  std::string key;    // domain name, type name or node id
  std::string label;  // display text
};

/// Thread-safe: sessions are independent and each is serialized by its own
/// lock; the data graph, log and ranker are shared read-only. `graph` and
/// `log` must outlive the service.
class SuggestionService {
 public:
  SuggestionService(DataGraph const& graph, QueryLog const& log, ServiceConfig cfg)
      : graph_(&graph), cfg_(std::move(cfg)) {
    cfg_.validate();
    ranker_ = make_service_ranker(cfg_.ranker, log);
  }

  DataGraph const& graph() const noexcept { return *graph_; }
  ServiceConfig const& config() const noexcept { return cfg_; }
  std::string ranker_name() const { return ranker_->name(); }

  std::string create_session() {
    std::lock_guard lock(registry_mutex_);
    auto const number = ++created_;
    auto live = std::make_shared<Live>();
    live->snap.id = "s" + std::to_string(number);
    live->number = number;
    live->snap.created = live->snap.updated = std::chrono::system_clock::now();
    sessions_.emplace(live->snap.id, live);
    return live->snap.id;
  }

  SessionSnapshot snapshot(std::string const& id) const {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    return live->snap;
  }

  std::vector<std::string> session_ids() const {
    std::lock_guard lock(registry_mutex_);
    std::vector<std::pair<std::uint64_t, std::string>> ordered;
    for (auto const& [id, live] : sessions_) ordered.emplace_back(live->number, id);
    std::sort(ordered.begin(), ordered.end());
    std::vector<std::string> out;
    for (auto& [n, id] : ordered) out.push_back(std::move(id));
    return out;
  }

  LocalId add_node(std::string const& id, QueryNodeLabel const& label) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto const local = live->snap.graph.add_node(*graph_, label);
    touch(*live);
    return local;
  }

  /// Current active batch. Returns the outstanding batch unchanged unless
  /// `refresh` is set, in which case its items are recorded as ignored first.
  SuggestionBatch active_suggest(std::string const& id, bool refresh = false) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto& s = live->snap;
    if (s.graph.empty()) throw StateError("the query graph is empty; add a node first");
    if (s.graph.pending_connection()) throw StateError("connect the new node before asking for suggestions");
    if (s.outstanding && !refresh) return *s.outstanding;
    if (s.outstanding) {
      for (auto const& item : s.outstanding->items) s.session.append(SignedEdge::neg(item.candidate.etype));
      s.outstanding.reset();
    }

    auto const candidates = active_candidates(*graph_, s.graph, s.session);
    SuggestionBatch batch;
    batch.version = ++live->versions;
    if (!candidates.empty()) {
      auto const ranked = rank_candidates(*ranker_, candidates, s.session, next_stream(*live), graph_->edge_types());
      for (auto const& r : ranked) {
        if (batch.items.size() == cfg_.k) break;
        if (!batch.items.empty() && batch.items.back().candidate.etype == r.candidate.etype) continue;
        batch.items.push_back(r);
      }
    }
    s.outstanding = batch;
    touch(*live);
    return batch;
  }

  /// Accepted batch items are added to the graph and recorded positive, the
  /// rest negative, in batch order.
  ActiveResponse respond_active(std::string const& id, std::uint64_t version, std::vector<std::size_t> accepted) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto& s = live->snap;
    if (!s.outstanding) throw StateError("no suggestions are outstanding");
    if (s.outstanding->version != version)
      throw StateError("stale suggestion batch: version " + std::to_string(version) + ", current " +
                       std::to_string(s.outstanding->version));
    std::sort(accepted.begin(), accepted.end());
    accepted.erase(std::unique(accepted.begin(), accepted.end()), accepted.end());
    auto const& items = s.outstanding->items;
    for (auto i : accepted)
      if (i >= items.size()) throw InvalidArgument("suggestion index " + std::to_string(i) + " out of range");

    ActiveResponse out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto const& c = items[i].candidate;
      bool const take = std::binary_search(accepted.begin(), accepted.end(), i);
      if (take) out.added.emplace_back(i, apply_candidate(s.graph, *graph_, c));
      auto const e = take ? SignedEdge::pos(c.etype) : SignedEdge::neg(c.etype);
      if (s.session.append(e)) out.appended.push_back(e);
    }
    s.outstanding.reset();
    touch(*live);
    return out;
  }

  /// Ranked edge types permitted between two nodes of the session graph.
  std::vector<PassiveSuggestion> passive_edge_suggest(std::string const& id, LocalId src, LocalId dst) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto& s = live->snap;
    if (src >= s.graph.node_count() || dst >= s.graph.node_count())
      throw NotFoundError("unknown node in this session");
    auto const cp = passive_candidates(*graph_, s.graph.label(src), s.graph.label(dst));
    if (cp.empty()) throw InvalidArgument("no possible relationship between these nodes");
    std::vector<EdgeTypeId> types;
    for (auto const& c : cp) types.push_back(c.etype);
    auto const ranked = rank_edge_types(*ranker_, types, s.session, next_stream(*live), graph_->edge_types());
    std::vector<PassiveSuggestion> out;
    for (auto const& r : ranked) {
      auto it = std::find_if(cp.begin(), cp.end(), [&](PassiveCandidate const& c) { return c.etype == r.etype; });
      out.push_back({r.etype, r.score, it->forward, it->backward});
    }
    touch(*live);
    return out;
  }

  /// Adds a user-chosen edge (passive mode) and records it positive.
  void add_edge(std::string const& id, LocalId src, LocalId dst, EdgeTypeId etype) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto& s = live->snap;
    s.graph.add_edge(*graph_, src, dst, etype);
    s.session.append(SignedEdge::pos(etype));
    s.outstanding.reset();
    touch(*live);
  }

  /// Appends the session to the log file (synced before returning), archives
  /// the final graph and closes the session. Returns the log line.
  std::string submit(std::string const& id) {
    auto live = find(id);
    std::lock_guard lock(live->mutex);
    require_not_closed(*live);
    auto& s = live->snap;
    if (s.graph.edge_count() == 0) throw StateError("nothing to submit: the query graph has no edges");
    if (s.graph.pending_connection()) throw StateError("connect the new node before submitting");

    std::string line;
    for (auto e : s.session.edges()) {
      if (!line.empty()) line += ' ';
      line += format_signed(e, graph_->edge_types());
    }
    if (!cfg_.log_path.empty()) append_durably(line + "\n");
    if (!cfg_.archive_dir.empty()) {
      std::filesystem::create_directories(cfg_.archive_dir);
      auto const path = std::filesystem::path(cfg_.archive_dir) / (s.id + ".qg");
      std::ofstream out(path);
      write_query_graph(out, s.graph, *graph_);
      if (!out.flush()) throw Error("cannot write " + path.string());
    }
    s.state = SessionState::closed;
    s.outstanding.reset();
    touch(*live);
    return line;
  }

  std::vector<CatalogEntry> catalog(CatalogLevel level, std::string const& parent = {},
                                    std::string const& keyword = {}) const {
    std::vector<CatalogEntry> out;
    auto keep = [&](std::string const& text) { return contains_ignoring_case(text, keyword); };
    switch (level) {
      case CatalogLevel::domains:
        for (auto const& [d, types] : graph_->domains())
          if (keep(d)) out.push_back({d, d});
        break;
      case CatalogLevel::types: {
        auto it = graph_->domains().find(parent);
        if (it == graph_->domains().end()) throw NotFoundError("unknown domain '" + parent + "'");
        for (auto t : it->second) {
          auto const& name = graph_->node_types().name(t);
          if (keep(name)) out.push_back({name, name});
        }
        break;
      }
      case CatalogLevel::names: {
        auto t = graph_->node_types().find(parent);
        if (!t) throw NotFoundError("unknown node type '" + parent + "'");
        for (auto v : graph_->instances(*t)) {
          auto const& rec = graph_->node(v);
          if (keep(rec.name)) out.push_back({rec.id, rec.name});
        }
        break;
      }
    }
    std::stable_sort(out.begin(), out.end(), [](CatalogEntry const& a, CatalogEntry const& b) {
      return a.label != b.label ? a.label < b.label : a.key < b.key;
    });
    return out;
  }

 private:
  struct Live {
    std::mutex mutex;
    SessionSnapshot snap;
    std::uint64_t number = 0;
    std::uint64_t versions = 0;
    std::uint64_t rank_calls = 0;
  };

  /// The configured ranker, or alphabetical order while the log holds no
  /// positive edge to learn from.
  static std::unique_ptr<EdgeRanker> make_service_ranker(RankerSpec const& spec, QueryLog const& log) {
    for (SessionId s = 0; s < log.size(); ++s)
      for (auto e : log.session(s))
        if (e.positive()) return make_ranker(spec, log);
    QueryLog probe;
    probe.add_session({SignedEdge::pos(EdgeTypeId(0))});
    make_ranker(spec, probe);  // rejects unknown ids
    return std::make_unique<AlphabeticalRanker>();
  }

  static bool contains_ignoring_case(std::string const& text, std::string const& needle) {
    if (needle.empty()) return true;
    auto it = std::search(text.begin(), text.end(), needle.begin(), needle.end(), [](char a, char b) {
      return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it != text.end();
  }

  std::shared_ptr<Live> find(std::string const& id) const {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }

  static void require_not_closed(Live const& live) {
    if (live.snap.state == SessionState::closed) throw StateError("session " + live.snap.id + " is closed");
  }

  static void touch(Live& live) {
    auto& s = live.snap;
    if (s.state != SessionState::closed)
      s.state = s.graph.pending_connection() ? SessionState::pending : SessionState::open;
    s.updated = std::chrono::system_clock::now();
  }

  std::uint64_t next_stream(Live& live) const {
    return derive_stream(derive_stream(cfg_.seed, live.number), live.rank_calls++);
  }

  void append_durably(std::string const& text) {
    std::lock_guard lock(log_mutex_);
    int const fd = ::open(cfg_.log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw Error("cannot open " + cfg_.log_path + " for appending");
    std::size_t done = 0;
    while (done < text.size()) {
      auto const n = ::write(fd, text.data() + done, text.size() - done);
      if (n < 0) {
        ::close(fd);
        throw Error("write failed: " + cfg_.log_path);
      }
      done += static_cast<std::size_t>(n);
    }
    bool const synced = ::fsync(fd) == 0;
    ::close(fd);
    if (!synced) throw Error("fsync failed: " + cfg_.log_path);
  }

  DataGraph const* graph_;
  ServiceConfig cfg_;
  std::unique_ptr<EdgeRanker> ranker_;

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::uint64_t created_ = 0;
  std::mutex log_mutex_;
};

}  // namespace qsuggest
