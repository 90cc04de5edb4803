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

#include <set>
#include <string>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/verbalizer.hpp"
#include "oracles.hpp"

namespace gt = gridtalk;
namespace v = gridtalk::voxel;
namespace vb = gridtalk::verbal;

namespace {

std::string fixture(const std::string& name) {
  auto s = gt::read_file(std::string(GRIDTALK_FIXTURE_DIR) + "/" + name);
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::map<int, std::map<v::BlockColor, int>> as_map(const std::vector<vb::LevelSummary>& levels) {
  std::map<int, std::map<v::BlockColor, int>> out;
  for (const auto& l : levels) out[l.level] = l.counts;
  return out;
}

}  // namespace

TEST(Verbalize, FifteenBlockFixtureIsByteExact) {
  auto w = v::world_from_json(fixture("fifteen.world"));
  EXPECT_EQ(w.block_count(), 15);
  EXPECT_EQ(vb::verbalize_world(w), fixture("fifteen_golden.txt"));
}

TEST(Verbalize, GoldenTextParsesToTheTally) {
  auto w = v::world_from_json(fixture("fifteen.world"));
  EXPECT_EQ(as_map(vb::parse_verbalization(fixture("fifteen_golden.txt"))), oracle::level_tally(w));
  EXPECT_EQ(as_map(vb::parse_verbalization(fixture("fifteen_mixed_phrasing.txt"))), oracle::level_tally(w));
}

TEST(Verbalize, EmptyWorld) {
  EXPECT_EQ(vb::verbalize_world({}), "There are 0 levels. There are 0 different blocks.");
  EXPECT_TRUE(vb::parse_verbalization("There are 0 levels. There are 0 different blocks.").empty());
}

TEST(Verbalize, SingleBlockAgreement) {
  v::VoxelWorld w;
  w.set({0, 0, 0}, v::BlockColor::Red);
  EXPECT_EQ(vb::verbalize_world(w), "There are 1 levels. There are 1 different blocks. At level 0, there are 1 red block.");
}

TEST(Verbalize, RandomWorldsRoundTripToGridTally) {
  gt::Rng rng(123);
  for (int i = 0; i < 300; ++i) {
    auto w = oracle::random_world(rng, static_cast<int>(rng.below(60)));
    auto text = vb::verbalize_world(w);
    ASSERT_EQ(as_map(vb::parse_verbalization(text)), oracle::level_tally(w)) << text;
  }
}

TEST(Verbalize, ParserRejectsInconsistentTotals) {
  for (const char* bad : {
           "There are 2 levels. There are 3 different blocks. At level 0, there are 3 green blocks.",
           "There are 1 levels. There are 4 different blocks. At level 0, there are 3 green blocks.",
           "There are 1 levels. There are 3 different blocks. At level 0, there are 3 pink blocks.",
           "Hello there."}) {
    try {
      vb::parse_verbalization(bad);
      ADD_FAILURE() << bad;
    } catch (const gt::Error& e) {
      EXPECT_EQ(e.code(), gt::Errc::ParseError);
    }
  }
}

TEST(Verbalize, HistogramSkipsEmptyLevels) {
  v::VoxelWorld w;
  w.set({0, 0, 0}, v::BlockColor::Red);
  w.set({0, 4, 0}, v::BlockColor::Blue);
  auto h = vb::level_histogram(w);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[1].level, 4);
}

TEST(StateLine, NineGreenBlocks) {
  v::VoxelWorld w;
  for (int x = 0; x < 9; ++x) w.set({x, 0, 0}, v::BlockColor::Green);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    EXPECT_EQ(vb::state_line(w, seed), "state: There are nine green blocks");
  }
}

TEST(StateLine, SingularAgreement) {
  v::VoxelWorld w;
  w.set({3, 0, 3}, v::BlockColor::Red);
  EXPECT_EQ(vb::state_line(w, 5), "state: There is one red block");
}

TEST(StateLine, SeedSweepCoversExactlyThePresentColors) {
  v::VoxelWorld w;
  w.set({0, 0, 0}, v::BlockColor::Red);
  w.set({1, 0, 0}, v::BlockColor::Blue);
  w.set({2, 0, 0}, v::BlockColor::Blue);
  w.set({3, 0, 0}, v::BlockColor::Yellow);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(vb::state_line(w, seed));
  EXPECT_EQ(seen, (std::set<std::string>{"state: There is one red block", "state: There are two blue blocks",
                                         "state: There is one yellow block"}));
}

TEST(StateLine, EmptyWorldThrows) {
  try {
    vb::state_line({}, 0);
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), gt::Errc::EmptyWorld);
  }
}
