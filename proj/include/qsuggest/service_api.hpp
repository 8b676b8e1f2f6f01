#pragma once

/// JSON request dispatcher for the suggestion service, shared by the HTTP
/// server and transcript replay. Field names are listed in docs/API.md.

#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsuggest/service.hpp"
#include "qsuggest/text.hpp"

namespace qsuggest {

using Json = nlohmann::json;

inline constexpr char kApiVersion[] = "v1";

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  Json body;

  friend void to_json(Json& j, ApiRequest const& r) {
    j = Json{{"method", r.method}, {"path", r.path}, {"query", r.query}, {"body", r.body}};
  }
  friend void from_json(Json const& j, ApiRequest& r) {
    r.method = j.at("method").get<std::string>();
    r.path = j.at("path").get<std::string>();
    r.query = j.value("query", std::map<std::string, std::string>{});
    r.body = j.value("body", Json());
  }
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Appends one JSON line per handled request.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(std::ostream& out) : out_(&out) {}
  void record(ApiRequest const& req, ApiResponse const& resp) {
    std::lock_guard lock(mutex_);
    *out_ << Json{{"request", req}, {"response", {{"status", resp.status}, {"body", resp.body}}}}.dump() << '\n';
    out_->flush();
  }

 private:
  std::ostream* out_;
  std::mutex mutex_;
};

class ServiceApi {
 public:
  explicit ServiceApi(SuggestionService& service, TranscriptWriter* transcript = nullptr)
      : svc_(&service), transcript_(transcript) {}

  ApiResponse handle(ApiRequest const& req) {
    ApiResponse resp;
    try {
      resp = dispatch(req);
    } catch (NotFoundError const& e) {
      resp = error(404, "not_found", e.what());
    } catch (StateError const& e) {
      resp = error(409, "state", e.what());
    } catch (InvalidArgument const& e) {
      resp = error(400, "invalid", e.what());
    } catch (Json::exception const& e) {
      resp = error(400, "invalid", std::string("malformed request: ") + e.what());
    } catch (std::exception const& e) {
      resp = error(500, "internal", e.what());
    }
    if (transcript_) transcript_->record(req, resp);
    return resp;
  }

 private:
  struct Route {
    std::vector<std::string_view> parts;
    std::string_view at(std::size_t i) const { return i < parts.size() ? parts[i] : std::string_view{}; }
  };

  static ApiResponse error(int status, char const* kind, std::string const& message) {
    return {status, Json{{"error", {{"kind", kind}, {"message", message}}}}};
  }
  static ApiResponse method_not_allowed() { return error(405, "method", "method not allowed"); }

  ApiResponse dispatch(ApiRequest const& req) {
    Route r;
    for (auto p : split(req.path, '/'))
      if (!p.empty()) r.parts.push_back(p);
    auto const n = r.parts.size();
    bool const get = req.method == "GET", post = req.method == "POST";

    if (n == 1 && r.at(0) == "info") {
      if (!get) return method_not_allowed();
      auto const& c = svc_->config();
      return {200, Json{{"api", kApiVersion},
                        {"ranker", svc_->ranker_name()},
                        {"k", c.k},
                        {"edge_types", svc_->graph().edge_types().size()},
                        {"nodes", svc_->graph().node_count()}}};
    }
    if (r.at(0) == "catalog" && n == 2) {
      if (!get) return method_not_allowed();
      return catalog(r.at(1), req);
    }
    if (r.at(0) != "sessions") return error(404, "not_found", "no route for " + req.path);
    if (n == 1) {
      if (post) {
        auto const id = svc_->create_session();
        return {201, session_json(id)};
      }
      if (get) return {200, Json{{"sessions", svc_->session_ids()}}};
      return method_not_allowed();
    }
    std::string const id(r.at(1));
    if (n == 2) {
      if (!get) return method_not_allowed();
      return {200, session_json(id, true)};
    }
    auto const action = r.at(2);
    if (action == "suggestions" && n == 3) {
      if (!get) return method_not_allowed();
      auto mode = req.query.count("mode") ? req.query.at("mode") : std::string("active");
      if (mode != "active")
        throw InvalidArgument("mode must be 'active'; passive suggestions use POST /sessions/{id}/edges/suggest");
      bool refresh = false;
      if (auto it = req.query.find("refresh"); it != req.query.end()) refresh = it->second == "1" || it->second == "true";
      return {200, batch_json(svc_->active_suggest(id, refresh))};
    }
    if (!post) return method_not_allowed();
    if (action == "respond" && n == 3) {
      auto const& b = req.body;
      auto const accepted = b.value("accepted", std::vector<std::size_t>{});
      auto const out = svc_->respond_active(id, b.at("version").get<std::uint64_t>(), accepted);
      Json added = Json::array();
      for (auto [index, node] : out.added) added.push_back({{"index", index}, {"node", node}});
      Json appended = Json::array();
      for (auto e : out.appended) appended.push_back(format_signed(e, svc_->graph().edge_types()));
      auto j = session_json(id);
      j["added"] = added;
      j["appended"] = appended;
      return {200, j};
    }
    if (action == "nodes" && n == 3) {
      auto const label = svc_->graph().resolve_label(req.body.at("kind").get<std::string>(),
                                                     req.body.at("label").get<std::string>());
      auto const node = svc_->add_node(id, label);
      auto j = session_json(id);
      j["node"] = node;
      return {201, j};
    }
    if (action == "edges" && n == 3) {
      auto const etype = edge_type(req.body.at("etype").get<std::string>());
      svc_->add_edge(id, req.body.at("src").get<LocalId>(), req.body.at("dst").get<LocalId>(), etype);
      return {201, session_json(id)};
    }
    if (action == "edges" && n == 4 && r.at(3) == "suggest") {
      auto const ranked =
          svc_->passive_edge_suggest(id, req.body.at("src").get<LocalId>(), req.body.at("dst").get<LocalId>());
      Json items = Json::array();
      for (auto const& s : ranked)
        items.push_back({{"etype", svc_->graph().edge_types().name(s.etype)},
                         {"score", s.score},
                         {"forward", s.forward},
                         {"backward", s.backward}});
      return {200, Json{{"suggestions", items}}};
    }
    if (action == "submit" && n == 3) {
      auto const line = svc_->submit(id);
      auto j = session_json(id);
      j["log_line"] = line;
      return {200, j};
    }
    return error(404, "not_found", "no route for " + req.path);
  }

  ApiResponse catalog(std::string_view level, ApiRequest const& req) {
    auto param = [&](char const* key) {
      auto it = req.query.find(key);
      return it == req.query.end() ? std::string() : it->second;
    };
    std::vector<CatalogEntry> entries;
    if (level == "domains")
      entries = svc_->catalog(CatalogLevel::domains, {}, param("q"));
    else if (level == "types")
      entries = svc_->catalog(CatalogLevel::types, param("domain"), param("q"));
    else if (level == "names")
      entries = svc_->catalog(CatalogLevel::names, param("type"), param("q"));
    else
      return error(404, "not_found", "catalog level must be domains, types or names");
    Json items = Json::array();
    for (auto const& e : entries) items.push_back({{"key", e.key}, {"label", e.label}});
    return {200, Json{{"entries", items}}};
  }

  EdgeTypeId edge_type(std::string const& name) const {
    auto e = svc_->graph().edge_types().find(name);
    if (!e) throw NotFoundError("unknown edge type '" + name + "'");
    return *e;
  }

  Json label_json(QueryNodeLabel const& label) const {
    auto const& g = svc_->graph();
    return {{"kind", DataGraph::label_kind(label)}, {"label", g.label_text(label)}};
  }

  Json session_json(std::string const& id, bool full = false) const {
    auto const s = svc_->snapshot(id);
    auto const& g = svc_->graph();
    Json nodes = Json::array();
    for (LocalId i = 0; i < s.graph.node_count(); ++i) {
      auto j = label_json(s.graph.label(i));
      j["id"] = i;
      nodes.push_back(j);
    }
    Json edges = Json::array();
    for (auto const& e : s.graph.edges())
      edges.push_back({{"src", e.src}, {"dst", e.dst}, {"etype", g.edge_types().name(e.etype)}});
    Json session = Json::array();
    for (auto e : s.session.edges()) session.push_back(format_signed(e, g.edge_types()));
    Json j{{"session", s.id}, {"state", to_string(s.state)}, {"nodes", nodes}, {"edges", edges},
           {"query_session", session}};
    if (full) {
      auto stamp = [](auto tp) {
        return std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
      };
      j["created_at_ms"] = stamp(s.created);
      j["updated_at_ms"] = stamp(s.updated);
      j["outstanding_version"] = s.outstanding ? Json(s.outstanding->version) : Json();
    }
    return j;
  }

  Json batch_json(SuggestionBatch const& batch) const {
    auto const& g = svc_->graph();
    Json items = Json::array();
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
      auto const& c = batch.items[i].candidate;
      Json item{{"index", i},
                {"etype", g.edge_types().name(c.etype)},
                {"score", batch.items[i].score},
                {"anchor", c.anchor},
                {"direction", c.outgoing ? "out" : "in"}};
      if (c.existing) {
        item["existing"] = *c.existing;
        item["new_node"] = nullptr;
      } else {
        item["existing"] = nullptr;
        item["new_node"] = {{"kind", "type"}, {"label", g.node_types().name(c.new_type)}};
      }
      items.push_back(item);
    }
    return {{"version", batch.version}, {"suggestions", items}};
  }

  SuggestionService* svc_;
  TranscriptWriter* transcript_;
};

// ---------------------------------------------------------------------------
// Transcript replay

struct ReplayOutcome {
  std::size_t requests = 0;
  std::vector<std::string> mismatches;  // one line per differing response

  bool identical() const noexcept { return mismatches.empty(); }
};

namespace detail {

/// Drops wall-clock fields, which legitimately differ between runs.
inline Json without_timestamps(Json j) {
  if (j.is_object()) {
    j.erase("created_at_ms");
    j.erase("updated_at_ms");
    for (auto& [key, value] : j.items()) value = without_timestamps(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = without_timestamps(value);
  }
  return j;
}

}  // namespace detail

/// Re-issues every recorded request against `api` (normally a fresh service
/// with the same data, log and seed) and compares responses.
inline ReplayOutcome replay_transcript(ServiceApi& api, std::istream& transcript) {
  ReplayOutcome out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(transcript, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (Json::exception const& e) {
      throw ParseError("transcript", lineno, e.what());
    }
    auto const req = record.at("request").get<ApiRequest>();
    auto const& expected = record.at("response");
    auto const got = api.handle(req);
    ++out.requests;
    if (got.status != expected.at("status").get<int>() ||
        detail::without_timestamps(got.body) != detail::without_timestamps(expected.at("body")))
      out.mismatches.push_back("line " + std::to_string(lineno) + ": " + req.method + " " + req.path +
                               " expected " + expected.dump() + " got " + std::to_string(got.status) + " " +
                               got.body.dump());
  }
  return out;
}

}  // namespace qsuggest
