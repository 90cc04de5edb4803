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

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "gridtalk/dataset.hpp"
#include "gridtalk/http_server.hpp"
#include "gridtalk/session.hpp"

namespace gt = gridtalk;
namespace v = gridtalk::voxel;
namespace se = gridtalk::session;
namespace ds = gridtalk::dataset;
using Json = nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    tables_ = std::make_shared<se::MemoryTablesStore>();
    objects_ = std::make_shared<se::MemoryObjectStore>();
    service_ = std::make_unique<se::SessionService>(tables_, objects_);
    v::VoxelWorld target;
    target.set({5, 0, 4}, v::BlockColor::Red);
    target_id_ = ds::put_world(*objects_, target);
    empty_id_ = ds::put_world(*objects_, v::VoxelWorld{});
    server_ = std::make_unique<se::HttpServer>(*service_);
    port_ = server_->bind_any_port();
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->serve(); });
    server_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_->stop();
    thread_.join();
  }

  std::pair<int, Json> post(const std::string& path, const Json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) return {0, Json()};
    return {res->status, Json::parse(res->body)};
  }

  std::pair<int, Json> get(const std::string& path) {
    auto res = client_->Get(path);
    if (!res) return {0, Json()};
    return {res->status, res->body.empty() || res->body[0] != '{' ? Json(res->body) : Json::parse(res->body)};
  }

  Json create(const Json& body) {
    auto [status, j] = post("/games", body);
    EXPECT_EQ(status, 201) << j.dump();
    return j;
  }

  std::shared_ptr<se::TablesStore> tables_;
  std::shared_ptr<se::ObjectStore> objects_;
  std::unique_ptr<se::SessionService> service_;
  std::unique_ptr<se::HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
  std::string target_id_;
  std::string empty_id_;
};

}  // namespace

TEST(HttpStatus, ErrorClassesMapToCodes) {
  EXPECT_EQ(se::http_status(gt::Errc::AuthFailure), 403);
  EXPECT_EQ(se::http_status(gt::Errc::UnknownGame), 404);
  EXPECT_EQ(se::http_status(gt::Errc::StaleVersion), 409);
  EXPECT_EQ(se::http_status(gt::Errc::WrongTurn), 409);
  EXPECT_EQ(se::http_status(gt::Errc::MissingQuestion), 422);
  EXPECT_EQ(se::http_status(gt::Errc::IllegalActions), 422);
  EXPECT_EQ(se::http_status(gt::Errc::InvalidPayload), 400);
  EXPECT_EQ(se::http_status(gt::Errc::IoError), 500);
}

TEST_F(HttpTest, MultiTurnGameOverHttp) {
  auto g = create({{"mode", "multi_turn"}, {"target_id", target_id_}});
  const std::string id = g["game_id"];
  const std::string arch = g["architect_key"], bld = g["builder_key"];
  EXPECT_EQ(g["status"], "awaiting_architect");

  auto [s1, i1] = post("/games/" + id + "/instruction", {{"role_key", arch}, {"version", 0}, {"text", "place one red block ahead"}});
  ASSERT_EQ(s1, 200) << i1.dump();
  EXPECT_EQ(i1["status"], "awaiting_builder");
  EXPECT_EQ(i1["version"], 1);

  auto [s2, q] = post("/games/" + id + "/builder-turn", {{"role_key", bld}, {"version", 1}, {"question", "Which color blocks?"}});
  ASSERT_EQ(s2, 200) << q.dump();
  EXPECT_EQ(q["turn"]["text"], "Which color blocks?");

  post("/games/" + id + "/instruction", {{"role_key", arch}, {"text", "a red one please"}});
  Json actions = Json::array({{{"t", 0}, {"kind", "place"}, {"pos", {5, 0, 4}}, {"color", "red"}}});
  auto [s3, b] = post("/games/" + id + "/builder-turn",
                      {{"role_key", bld}, {"actions", actions}, {"agent", {{"pos", {5, 0, 5}}, {"facing", "N"}}}});
  ASSERT_EQ(s3, 200) << b.dump();
  EXPECT_EQ(b["world_version"], 1);

  auto [s4, c] = post("/games/" + id + "/complete", {{"role_key", arch}});
  ASSERT_EQ(s4, 200) << c.dump();
  EXPECT_EQ(c["report"]["exact"], true);
  EXPECT_EQ(c["status"], "complete");

  auto [s5, st] = get("/games/" + id + "/state?role_key=" + bld);
  ASSERT_EQ(s5, 200);
  EXPECT_EQ(st["role"], "builder");
  EXPECT_EQ(st["history"].size(), 5u);
  EXPECT_EQ(st["world"], Json::array({{5, 0, 4, "red"}}));

  auto res = client_->Get("/export/corpus?kind=multi");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto loaded = ds::parse_games(res->body);
  ASSERT_EQ(loaded.records.size(), 1u);
  EXPECT_TRUE(loaded.records[0].completed);
}

TEST_F(HttpTest, ErrorsCarryNameStatusAndVersion) {
  auto g = create({{"mode", "multi_turn"}, {"target_id", target_id_}});
  const std::string id = g["game_id"];
  auto [s1, e1] = post("/games/" + id + "/instruction", {{"role_key", g["builder_key"]}, {"text", "place it there now"}});
  EXPECT_EQ(s1, 403);
  EXPECT_EQ(e1["error"], "AuthFailure");
  EXPECT_EQ(e1["version"], 0);

  auto [s2, e2] = post("/games/" + id + "/instruction", {{"role_key", g["architect_key"]}, {"version", 3}, {"text", "place it there now"}});
  EXPECT_EQ(s2, 409);
  EXPECT_EQ(e2["error"], "StaleVersion");

  auto [s3, e3] = post("/games/" + id + "/instruction", {{"role_key", g["architect_key"]}, {"text", "ok"}});
  EXPECT_EQ(s3, 422);
  EXPECT_EQ(e3["error"], "RejectedText");

  post("/games/" + id + "/instruction", {{"role_key", g["architect_key"]}, {"text", "place it there now"}});
  Json far = Json::array({{{"t", 0}, {"kind", "place"}, {"pos", {5, 0, 4}}, {"color", "red"}},
                          {{"t", 1}, {"kind", "place"}, {"pos", {0, 0, 0}}, {"color", "red"}}});
  auto [s4, e4] = post("/games/" + id + "/builder-turn", {{"role_key", g["builder_key"]}, {"actions", far}});
  EXPECT_EQ(s4, 422);
  EXPECT_EQ(e4["error"], "IllegalActions");
  EXPECT_EQ(e4["step"], 2);
  EXPECT_EQ(e4["cause"], "OutOfReach");

  auto [s5, e5] = post("/games/game-424242/complete", {{"role_key", "x"}});
  EXPECT_EQ(s5, 404);
  EXPECT_EQ(e5["error"], "UnknownGame");

  auto raw = client_->Post("/games", "{nope", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);

  auto [s6, e6] = post("/games", {{"mode", "multi_turn"}, {"target_id", std::string(64, 'e')}});
  EXPECT_EQ(s6, 404);
  EXPECT_EQ(e6["error"], "UnknownTarget");

  auto [s7, e7] = get("/games/" + id + "/state");
  EXPECT_EQ(s7, 403);
}

TEST_F(HttpTest, UnclearJudgmentWithoutQuestionIsRejected) {
  auto g = create({{"mode", "single_turn_judge"}, {"world_id", empty_id_}});
  const std::string id = g["game_id"];
  post("/games/" + id + "/instruction", {{"role_key", g["architect_key"]}, {"text", "place one red block ahead"}});
  auto [s1, e1] = post("/games/" + id + "/judgment", {{"role_key", g["builder_key"]}, {"clear", false}});
  EXPECT_EQ(s1, 422);
  EXPECT_EQ(e1["error"], "MissingQuestion");
  auto [s2, ok] = post("/games/" + id + "/judgment",
                       {{"role_key", g["builder_key"]}, {"clear", false}, {"question", "Which color blocks?"}});
  ASSERT_EQ(s2, 200) << ok.dump();
  auto res = client_->Get("/export/corpus?kind=single");
  ASSERT_TRUE(res);
  auto loaded = ds::parse_samples(res->body);
  ASSERT_EQ(loaded.records.size(), 1u);
  EXPECT_EQ(loaded.records[0].questions, std::vector<std::string>{"Which color blocks?"});
}

TEST_F(HttpTest, ConcurrentBuilderPostsOneWins) {
  auto g = create({{"mode", "multi_turn"}, {"target_id", target_id_}});
  const std::string id = g["game_id"];
  post("/games/" + id + "/instruction", {{"role_key", g["architect_key"]}, {"text", "place one red block ahead"}});
  Json body = {{"role_key", g["builder_key"]},
               {"version", 1},
               {"actions", Json::array({{{"t", 0}, {"kind", "place"}, {"pos", {5, 0, 4}}, {"color", "red"}}})}};
  int statuses[2] = {0, 0};
  std::thread a([&] {
    httplib::Client c("127.0.0.1", port_);
    auto r = c.Post("/games/" + id + "/builder-turn", body.dump(), "application/json");
    statuses[0] = r ? r->status : -1;
  });
  std::thread b([&] {
    httplib::Client c("127.0.0.1", port_);
    auto r = c.Post("/games/" + id + "/builder-turn", body.dump(), "application/json");
    statuses[1] = r ? r->status : -1;
  });
  a.join();
  b.join();
  std::sort(std::begin(statuses), std::end(statuses));
  EXPECT_EQ(statuses[0], 200);
  EXPECT_EQ(statuses[1], 409);
  EXPECT_EQ(service_->audit_logs(), 1u);
}
