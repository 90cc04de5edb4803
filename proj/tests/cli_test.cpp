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
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <json.hpp>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/dataset.hpp"
#include "gridtalk/digest.hpp"
#include "gridtalk/pipelines.hpp"
#include "oracles.hpp"

namespace gt = gridtalk;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = GRIDTALK_FIXTURE_DIR;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(GRIDTALK_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string golden() {
  auto s = gt::read_file(kFixtures + "/fifteen_golden.txt");
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

TEST(Cli, VerbalizePrintsGoldenText) {
  auto r = run("verbalize --world " + kFixtures + "/fifteen.world");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, golden() + "\n");
}

TEST(Cli, JsonLinesVerbalize) {
  auto r = run("--format json-lines verbalize --world " + kFixtures + "/fifteen.world");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["text"], golden());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("verbalize --no-such-flag").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, RankBm25EqualsOracle) {
  auto r = run("--format json-lines clarify rank --method bm25 --k 20 --input " + kFixtures +
               "/corpus5.jsonl --pool " + kFixtures + "/pool8.jsonl --worlds " + kFixtures + "/objects");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);

  auto pool = gt::clarify::parse_pool(gt::read_file(kFixtures + "/pool8.jsonl"));
  auto samples = gt::dataset::load_samples(kFixtures + "/corpus5.jsonl").records;
  std::vector<std::pair<std::vector<std::string>, std::string>> runs;
  for (const auto& s : samples) {
    if (s.clear) continue;
    std::string gold;
    for (const auto& q : pool.questions())
      if (q.text == s.questions.front()) gold = q.id;
    ASSERT_FALSE(gold.empty());
    runs.push_back({oracle::bm25_rank(s.instruction, pool.questions()), gold});
  }
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(j["queries"], 2);
  EXPECT_NEAR(j["mrr"].get<double>(), oracle::mrr(runs, 20), 1e-12);
}

TEST(Cli, ReplayReportsDigest) {
  auto r = run("--format json-lines replay --log " + kFixtures + "/five_actions.log");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  auto log = gt::voxel::ActionLog::parse_jsonl(gt::read_file(kFixtures + "/five_actions.log"));
  EXPECT_EQ(j["digest"], gt::voxel::replay(log).world.content_digest());
}

TEST(Cli, LoadWithRejectedRecordExitsOne) {
  auto r = run("dataset load --kind single --input " + kFixtures + "/unclear_without_question.jsonl");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(run("dataset load --kind single --input " + kFixtures + "/corpus5.jsonl").code, 0);
}

TEST(Cli, ClassifyAndMatch) {
  auto r = run("--format json-lines classify-structure --world " + kFixtures + "/fifteen.world");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["flat"], false);
  EXPECT_EQ(j["flying"], false);
  auto m = run("--format json-lines match --world " + kFixtures + "/fifteen.world --target " + kFixtures +
               "/fifteen.world");
  ASSERT_EQ(m.code, 0);
  EXPECT_EQ(nlohmann::json::parse(m.out)["exact"], true);
}

TEST(Cli, SynthIsByteReproducible) {
  auto base = fs::temp_directory_path() / ("gridtalk-cli-" + gt::random_token(6));
  auto a = base / "a", b = base / "b";
  ASSERT_EQ(run("synth --out " + a.string() + " --samples 60 --games 5 --seed 3").code, 0);
  ASSERT_EQ(run("synth --out " + b.string() + " --samples 60 --games 5 --seed 3").code, 0);
  for (const char* f : {"samples.jsonl", "games.jsonl", "pool.jsonl", "expected.json"}) {
    EXPECT_EQ(gt::read_file(a / f), gt::read_file(b / f)) << f;
  }
  auto stats = run("--format json-lines dataset stats --kind single --input " + (a / "samples.jsonl").string());
  ASSERT_EQ(stats.code, 0);
  auto expected = nlohmann::json::parse(gt::read_file(a / "expected.json"));
  auto got = nlohmann::json::parse(stats.out);
  ASSERT_TRUE(expected.contains("single"));
  EXPECT_EQ(got, expected["single"]);
  fs::remove_all(base);
}
