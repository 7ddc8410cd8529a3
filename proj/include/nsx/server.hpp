// Copyright 2026 The NSX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP surface of the gateway.
//
//   GET  /healthz
//   GET  /search?q=...&k=...&engine=...
//   POST /annotation/session            {"query", "engine_a", "engine_b", ...}
//   GET  /annotation/{id}
//   POST /annotation/{id}/label         {"side", "position", "grade"}
//   GET  /annotation/export?engine=...&format=qrels|run

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "nsx/annotation.hpp"
#include "nsx/gateway.hpp"

namespace nsx {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

/// Runs `fn`, translating library errors into HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const RequestError& e) {
    send_error(res, e.status(), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, std::string("bad request body: ") + e.what());
  } catch (const InvalidArgument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw RequestError(400, "request body required");
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw RequestError(400, std::string("invalid JSON: ") + e.what());
  }
}

inline std::size_t parse_count(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(what);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw RequestError(400, std::string("invalid ") + what + ": " + s);
  }
}

}  // namespace detail

/// Registers every gateway route on `server`.
inline void mount_routes(httplib::Server& server, Gateway& gw) {
  using detail::guarded;
  using detail::send_json;

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  server.Get("/search", [&gw](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      SearchParams params;
      if (req.has_param("k")) params.k = detail::parse_count(req.get_param_value("k"), "k");
      if (req.has_param("engine")) params.engine = req.get_param_value("engine");
      const auto resp = gw.handle_search(req.get_param_value("q"), params);
      send_json(res, 200, resp.to_json());
    });
  });

  server.Post("/annotation/session",
              [&gw](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = detail::parse_body(req);
                  SessionRequest sr;
                  sr.query = body.at("query").get<std::string>();
                  sr.engine_a = body.at("engine_a").get<std::string>();
                  sr.engine_b = body.at("engine_b").get<std::string>();
                  if (body.contains("seed")) sr.seed = body["seed"].get<std::uint64_t>();
                  if (body.contains("swap")) sr.force_swap = body["swap"].get<bool>();
                  if (body.contains("query_id"))
                    sr.query_id = body["query_id"].get<std::string>();
                  if (body.contains("max_grade")) sr.max_grade = body["max_grade"].get<int>();
                  send_json(res, 201, gw.annotations().create_session(sr));
                });
              });

  // Registered before /annotation/{id} so "export" is not taken for an id.
  server.Get("/annotation/export", [&gw](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("engine")) {
        send_json(res, 400, {{"error", "engine parameter required"},
                             {"engines", gw.annotations().engines()}});
        return;
      }
      const auto engine = req.get_param_value("engine");
      const auto format = req.has_param("format") ? req.get_param_value("format") : "qrels";
      if (format == "qrels") {
        res.set_content(gw.annotations().export_qrels(engine), "text/plain; charset=utf-8");
      } else if (format == "run") {
        res.set_content(gw.annotations().export_run(engine), "text/plain; charset=utf-8");
      } else {
        throw RequestError(400, "format must be qrels or run");
      }
    });
  });

  server.Get(R"(/annotation/([0-9a-f]+))",
             [&gw](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 send_json(res, 200, gw.annotations().session_view(req.matches[1]));
               });
             });

  server.Post(R"(/annotation/([0-9a-f]+)/label)",
              [&gw](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = detail::parse_body(req);
                  const auto side = parse_side(body.at("side").get<std::string>());
                  const auto position = body.at("position").get<long long>();
                  if (position < 1) throw RequestError(400, "position must be >= 1");
                  const auto grade = body.at("grade").get<int>();
                  gw.annotations().submit_label(req.matches[1], side,
                                                static_cast<std::size_t>(position), grade);
                  send_json(res, 200,
                            {{"ok", true},
                             {"session_id", std::string(req.matches[1])},
                             {"side", to_string(side)},
                             {"position", position},
                             {"grade", grade}});
                });
              });
}

}  // namespace nsx
