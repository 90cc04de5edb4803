// Copyright 2026 The gridtalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gridtalk/http_server.hpp"

#include <httplib.h>

#include "json_codec.hpp"

namespace gridtalk::session {

using codec::Json;

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::AuthFailure:
      return 403;
    case Errc::UnknownGame:
    case Errc::UnknownTarget:
    case Errc::UnknownWorld:
      return 404;
    case Errc::WrongTurn:
    case Errc::StaleVersion:
      return 409;
    case Errc::RejectedText:
    case Errc::IllegalActions:
    case Errc::MissingQuestion:
    case Errc::MissingRebuild:
      return 422;
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::InvalidPayload:
    case Errc::InvalidArgument:
      return 400;
    default:
      return 500;
  }
}

namespace {

Json view_json(const SessionView& v) {
  Json j;
  j["game_id"] = v.game_id;
  j["mode"] = mode_name(v.mode);
  j["status"] = status_name(v.status);
  j["version"] = v.version;
  j["world_version"] = v.world_version;
  j["turns"] = v.turns;
  j["target_id"] = v.target_id;
  j["world_digest"] = v.world_digest;
  j["world"] = codec::blocks_to_json(v.world);
  return j;
}

Json row_json(const TurnRow& t) {
  Json j;
  j["turn"] = t.turn;
  j["kind"] = turn_kind_name(t.kind);
  if (!t.text.empty()) j["text"] = t.text;
  if (!t.log_digest.empty()) j["log"] = t.log_digest;
  if (!t.world_digest.empty()) j["world"] = t.world_digest;
  if (t.clear) j["clear"] = *t.clear;
  if (!t.questions.empty()) j["questions"] = t.questions;
  if (t.over_time) j["over_time"] = true;
  return j;
}

Json body_of(const httplib::Request& req) {
  Json j = codec::parse(req.body);
  if (!j.is_object()) throw Error(Errc::InvalidPayload, "request body must be a JSON object");
  return j;
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = codec::require(j, key);
  if (!v.is_string()) throw Error(Errc::InvalidPayload, std::string(key) + " must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return string_field(j, key);
}

std::optional<std::uint64_t> version_field(const Json& j) {
  if (!j.contains("version") || j["version"].is_null()) return std::nullopt;
  if (!j["version"].is_number_unsigned()) throw Error(Errc::InvalidPayload, "version must be a non-negative integer");
  return j["version"].get<std::uint64_t>();
}

voxel::AgentState agent_field(const Json& j) {
  return j.contains("agent") ? codec::agent_from_json(j["agent"]) : voxel::AgentState{};
}

std::optional<std::vector<voxel::Action>> actions_field(const Json& j) {
  if (!j.contains("actions") || j["actions"].is_null()) return std::nullopt;
  return codec::actions_from_json(j["actions"]);
}

}  // namespace

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;

  explicit Impl(SessionService& s) : service(s) { routes(); }

  void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename Fn>
  void guarded(httplib::Response& res, const std::string& game_id, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      Json j;
      j["error"] = errc_name(e.code());
      j["message"] = e.what();
      if (e.step()) j["step"] = *e.step();
      if (e.cause()) j["cause"] = errc_name(*e.cause());
      if (!game_id.empty()) {
        if (auto v = service.version_of(game_id)) j["version"] = *v;
      }
      reply(res, http_status(e.code()), j);
    } catch (const nlohmann::json::exception& e) {
      Json j;
      j["error"] = errc_name(Errc::InvalidPayload);
      j["message"] = e.what();
      reply(res, 400, j);
    }
  }

  void routes() {
    server.Post("/games", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, "", [&] {
        Json b = body_of(req);
        auto created = service.create_game(parse_mode(string_field(b, "mode")), optional_string(b, "target_id"),
                                           optional_string(b, "world_id"));
        Json j = view_json(created.view);
        j["architect_key"] = created.architect_key;
        j["builder_key"] = created.builder_key;
        reply(res, 201, j);
      });
    });

    server.Get(R"(/games/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      guarded(res, id, [&] {
        if (!req.has_param("role_key")) throw Error(Errc::AuthFailure, "role_key is required");
        const std::string key = req.get_param_value("role_key");
        Json j = view_json(service.state(id, key));
        j["role"] = service.role_of(id, key) == RoleKind::Architect ? "architect" : "builder";
        Json rows = Json::array();
        for (const auto& t : service.turns(id, key)) rows.push_back(row_json(t));
        j["history"] = std::move(rows);
        reply(res, 200, j);
      });
    });

    server.Post(R"(/games/([^/]+)/instruction)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      guarded(res, id, [&] {
        Json b = body_of(req);
        auto r = service.post_instruction(id, string_field(b, "role_key"), string_field(b, "text"), version_field(b));
        Json j = view_json(r.view);
        j["turn"] = row_json(r.row);
        reply(res, 200, j);
      });
    });

    server.Post(R"(/games/([^/]+)/builder-turn)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      guarded(res, id, [&] {
        Json b = body_of(req);
        BuilderPayload p;
        p.question = optional_string(b, "question");
        p.actions = actions_field(b);
        p.agent = agent_field(b);
        auto r = service.post_builder_turn(id, string_field(b, "role_key"), p, version_field(b));
        Json j = view_json(r.view);
        j["turn"] = row_json(r.row);
        reply(res, 200, j);
      });
    });

    server.Post(R"(/games/([^/]+)/complete)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      guarded(res, id, [&] {
        Json b = body_of(req);
        auto r = service.mark_complete(id, string_field(b, "role_key"), version_field(b));
        Json j = view_json(r.view);
        if (r.match) {
          Json m;
          m["exact"] = r.match->exact;
          m["translated_match"] = r.match->translated_match;
          m["dx"] = r.match->dx;
          m["dz"] = r.match->dz;
          m["missing"] = r.match->missing;
          m["extra"] = r.match->extra;
          j["report"] = std::move(m);
        }
        reply(res, 200, j);
      });
    });

    server.Post(R"(/games/([^/]+)/judgment)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      guarded(res, id, [&] {
        Json b = body_of(req);
        const Json& clear = codec::require(b, "clear");
        if (!clear.is_boolean()) throw Error(Errc::InvalidPayload, "clear must be a boolean");
        Judgment jd;
        jd.clear = clear.get<bool>();
        if (b.contains("questions")) jd.questions = b["questions"].get<std::vector<std::string>>();
        if (auto q = optional_string(b, "question")) jd.questions.push_back(*q);
        jd.rebuild = actions_field(b);
        jd.agent = agent_field(b);
        auto r = service.submit_judgment(id, string_field(b, "role_key"), jd, version_field(b));
        Json j = view_json(r.view);
        j["turn"] = row_json(r.row);
        reply(res, 200, j);
      });
    });

    server.Get("/export/corpus", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, "", [&] {
        const auto kind = dataset::parse_corpus_kind(req.has_param("kind") ? req.get_param_value("kind") : "");
        const std::string body = kind == dataset::CorpusKind::Multi ? dataset::games_to_jsonl(service.export_games())
                                                                    : dataset::samples_to_jsonl(service.export_samples());
        res.status = 200;
        res.set_content(body, "application/x-ndjson");
      });
    });
  }
};

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool HttpServer::serve() { return impl_->server.listen_after_bind(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace gridtalk::session
