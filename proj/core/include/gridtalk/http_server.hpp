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

#pragma once

#include <memory>
#include <string>

#include "gridtalk/error.hpp"
#include "gridtalk/session.hpp"

namespace gridtalk::session {

/// HTTP status for a service error: 403 auth, 404 unknown ids, 409 turn and
/// version conflicts, 422 rule violations, 400 malformed requests.
int http_status(Errc code) noexcept;

/// JSON-over-HTTP front end for a SessionService.
///
///   POST /games                     {"mode", "target_id"?, "world_id"?}
///   GET  /games/{id}/state?role_key=
///   POST /games/{id}/instruction    {"role_key", "version"?, "text"}
///   POST /games/{id}/builder-turn   {"role_key", "version"?, "question" | "actions", "agent"?}
///   POST /games/{id}/complete       {"role_key", "version"?}
///   POST /games/{id}/judgment       {"role_key", "version"?, "clear", "questions"?, "actions"?, "agent"?}
///   GET  /export/corpus?kind=multi|single
///
/// Responses for a known game carry its current "version", errors included.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds an ephemeral port and returns it (-1 on failure).
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Blocks until stop().
  bool serve();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridtalk::session
