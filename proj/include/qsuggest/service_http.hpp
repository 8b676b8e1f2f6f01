#pragma once

/// Binds ServiceApi to an httplib server. Every route under "/" goes through
/// the dispatcher; bodies are JSON.

#include <string>

#include "httplib.h"
#include "qsuggest/service_api.hpp"

namespace qsuggest {

inline ApiRequest to_api_request(httplib::Request const& req) {
  ApiRequest out;
  out.method = req.method;
  out.path = req.path;
  for (auto const& [k, v] : req.params) out.query[k] = v;
  if (!trim(req.body).empty()) out.body = Json::parse(req.body);
  return out;
}

inline void mount_api(httplib::Server& server, ServiceApi& api) {
  auto handler = [&api](httplib::Request const& req, httplib::Response& res) {
    ApiResponse out;
    try {
      out = api.handle(to_api_request(req));
    } catch (Json::exception const& e) {
      out = {400, Json{{"error", {{"kind", "invalid"}, {"message", std::string("malformed JSON body: ") + e.what()}}}}};
    }
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", handler);
  server.Post(R"(/.*)", handler);
}

}  // namespace qsuggest
