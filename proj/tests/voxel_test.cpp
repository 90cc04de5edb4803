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

#include <functional>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/voxel.hpp"
#include "oracles.hpp"

namespace gt = gridtalk;
namespace v = gridtalk::voxel;
using gt::Errc;

namespace {

v::Action place(v::Position p, v::BlockColor c, std::int64_t t = 0) { return {t, v::Place{p, c}}; }
v::Action brk(v::Position p, std::int64_t t = 0) { return {t, v::Break{p}}; }
v::Action mv(v::Direction d, std::int64_t t = 0) { return {t, v::Move{d}}; }
v::Action jump(std::int64_t t = 0) { return {t, v::Jump{}}; }

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const gt::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidArgument;
}

}  // namespace

TEST(Voxel, GroundPlacementNextToAgent) {
  v::AgentState agent;
  auto s = v::apply_action({}, agent, place({5, 0, 6}, v::BlockColor::Green));
  EXPECT_EQ(s.world.block_count(), 1);
  EXPECT_EQ(s.world.at({5, 0, 6}), v::BlockColor::Green);
}

TEST(Voxel, PlacementBeyondRadiusIsOutOfReach) {
  EXPECT_EQ(v::check_action({}, {}, place({5, 5, 5}, v::BlockColor::Red)), Errc::OutOfReach);
  EXPECT_DOUBLE_EQ(v::reach_distance({}, {5, 5, 5}), 5.0);
}

TEST(Voxel, RuleViolationsAreNamed) {
  v::VoxelWorld w;
  w.set({5, 0, 4}, v::BlockColor::Blue);
  v::AgentState agent;
  EXPECT_EQ(v::check_action(w, agent, place({11, 0, 0}, v::BlockColor::Red)), Errc::OutOfBounds);
  EXPECT_EQ(v::check_action(w, agent, place({5, 0, 4}, v::BlockColor::Red)), Errc::CellOccupied);
  EXPECT_EQ(v::check_action(w, agent, place({5, 0, 5}, v::BlockColor::Red)), Errc::CellOccupied);
  EXPECT_EQ(v::check_action(w, agent, brk({5, 0, 6})), Errc::CellEmpty);
  EXPECT_EQ(v::check_action(w, agent, place({6, 2, 6}, v::BlockColor::Red)), Errc::Unsupported);
  EXPECT_EQ(v::check_action(w, agent, place({5, 1, 4}, v::BlockColor::Red)), std::nullopt);
}

TEST(Voxel, JumpLiftsOnlyTheNextReach) {
  v::State s;
  // (5,3,4) is 3.16 away from the ground origin but 2.24 from the lifted one.
  s.world.set({5, 0, 4}, v::BlockColor::Blue);
  s.world.set({5, 1, 4}, v::BlockColor::Blue);
  s.world.set({5, 2, 4}, v::BlockColor::Blue);
  const auto top = place({5, 3, 4}, v::BlockColor::Red);
  EXPECT_EQ(v::check_action(s.world, s.agent, top), Errc::OutOfReach);
  v::apply_action_inplace(s, jump());
  EXPECT_TRUE(s.agent.lifted);
  EXPECT_EQ(v::check_action(s.world, s.agent, top), std::nullopt);
  v::apply_action_inplace(s, top);
  EXPECT_FALSE(s.agent.lifted);
}

TEST(Voxel, MovesStepUpOneLevelAtMost) {
  v::State s;
  s.world.set({5, 0, 4}, v::BlockColor::Blue);
  v::apply_action_inplace(s, mv(v::Direction::North));
  EXPECT_EQ(s.agent.position, (v::Position{5, 1, 4}));
  s.world.set({5, 1, 3}, v::BlockColor::Blue);
  s.world.set({5, 2, 3}, v::BlockColor::Blue);
  EXPECT_EQ(v::check_action(s.world, s.agent, mv(v::Direction::North)), Errc::CellOccupied);
  EXPECT_EQ(v::check_action(s.world, s.agent, mv(v::Direction::East)), Errc::Unsupported);
  EXPECT_EQ(v::check_action(s.world, s.agent, brk({5, 0, 4})), Errc::Unsupported);
}

TEST(Voxel, ApplyLeavesStateUntouchedOnError) {
  v::State s;
  s.world.set({5, 0, 4}, v::BlockColor::Blue);
  const v::State before = s;
  EXPECT_EQ(error_of([&] { v::apply_action_inplace(s, place({0, 0, 0}, v::BlockColor::Red)); }),
            Errc::OutOfReach);
  EXPECT_EQ(s.world, before.world);
  EXPECT_EQ(s.agent, before.agent);
  EXPECT_EQ(s.world.version(), before.world.version());
}

TEST(Voxel, RandomSequenceBlockCountMatchesOccupancy) {
  gt::Rng rng(11);
  v::State start;
  auto actions = oracle::random_legal_actions(rng, start, 50);
  int places = 0, breaks = 0;
  for (const auto& a : actions) {
    places += std::holds_alternative<v::Place>(a.kind);
    breaks += std::holds_alternative<v::Break>(a.kind);
  }
  v::ActionLog log(start.world, start.agent);
  for (const auto& a : actions) log.append(a);
  auto end = v::replay(log);
  EXPECT_EQ(static_cast<int>(oracle::cells_of(end.world).size()), places - breaks);
  EXPECT_EQ(end.world.block_count(), places - breaks);
}

TEST(Replay, EmptyLogIsIdentity) {
  gt::Rng rng(3);
  auto w = oracle::random_world(rng, 30);
  v::AgentState agent{{0, 0, 0}, v::Direction::East, false};
  auto s = v::replay(v::ActionLog(w, agent));
  EXPECT_EQ(s.world, w);
  EXPECT_EQ(s.agent, agent);
}

TEST(Replay, PlaceThenBreakRestoresWorld) {
  v::ActionLog log({}, {});
  log.append(place({5, 0, 4}, v::BlockColor::Orange, 0));
  log.append(brk({5, 0, 4}, 10));
  EXPECT_EQ(v::replay(log).world, v::VoxelWorld{});
}

TEST(Replay, ThousandRandomActionsAreDeterministic) {
  gt::Rng rng(2024);
  v::State start;
  v::ActionLog log(start.world, start.agent);
  for (const auto& a : oracle::random_legal_actions(rng, start, 1000)) log.append(a);
  auto first = v::replay(log);
  auto second = v::replay(log);
  EXPECT_EQ(first.world.content_digest(), second.world.content_digest());
  EXPECT_EQ(first.agent, second.agent);
  EXPECT_EQ(first.world, log.tail().world);
}

TEST(Replay, EveryStepKeepsPhysicsInvariants) {
  gt::Rng rng(99);
  v::State s;
  for (const auto& a : oracle::random_legal_actions(rng, s, 2000)) {
    v::State next = v::apply_action(s.world, s.agent, a);
    ASSERT_TRUE(oracle::step_invariants(s, a, next));
    s = next;
  }
}

TEST(Replay, TamperedLogIsCorrupt) {
  v::ActionLog good({}, {});
  good.append(place({5, 0, 4}, v::BlockColor::Red, 0));
  auto steps = good.steps();
  steps.push_back(brk({5, 0, 3}, 5));
  auto bad = v::ActionLog::unchecked({}, {}, steps);
  EXPECT_EQ(error_of([&] { v::replay(bad); }), Errc::CorruptLog);
  try {
    bad.validate();
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), Errc::IllegalActions);
    EXPECT_EQ(e.step(), 2u);
    EXPECT_EQ(e.cause(), Errc::CellEmpty);
  }
}

TEST(ActionLog, AppendRejectsAndKeepsLog) {
  v::ActionLog log({}, {});
  log.append(place({5, 0, 4}, v::BlockColor::Red, 100));
  try {
    log.append(place({5, 0, 3}, v::BlockColor::Red, 50));
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), Errc::NonMonotoneTimestamp);
    EXPECT_EQ(e.step(), 2u);
  }
  try {
    log.append(place({0, 0, 0}, v::BlockColor::Red, 200));
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfReach);
  }
  EXPECT_EQ(log.steps().size(), 1u);
}

TEST(ActionLog, JsonlRoundTrip) {
  gt::Rng rng(5);
  v::State start;
  start.world.set({0, 0, 0}, v::BlockColor::Yellow);
  v::ActionLog log(start.world, start.agent);
  for (const auto& a : oracle::random_legal_actions(rng, start, 200)) log.append(a);
  auto text = log.to_jsonl();
  auto back = v::ActionLog::parse_jsonl(text);
  EXPECT_EQ(back, log);
  EXPECT_EQ(back.to_jsonl(), text);
  EXPECT_NO_THROW(back.validate());
}

TEST(ActionLog, FixtureLogReplays) {
  auto log = v::ActionLog::parse_jsonl(gt::read_file(GRIDTALK_FIXTURE_DIR "/five_actions.log"));
  EXPECT_EQ(log.steps().size(), 5u);
  auto s = v::replay(log);
  EXPECT_EQ(s.world.block_count(), 2);
  EXPECT_EQ(log.duration_ms(), 400);
}

TEST(ActionLog, MalformedLinesReportLine) {
  try {
    v::ActionLog::parse_jsonl("{\"world\":[],\"agent\":{\"pos\":[5,0,5],\"facing\":\"N\"}}\n{oops\n");
    FAIL();
  } catch (const gt::Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_EQ(e.step(), 2u);
  }
  EXPECT_EQ(error_of([] { v::ActionLog::parse_jsonl("{\"world\":[]}\n"); }), Errc::SchemaError);
}

TEST(Diff, IdenticalWorldsHaveEmptyDiff) {
  gt::Rng rng(1);
  auto w = oracle::random_world(rng, 40);
  EXPECT_TRUE(v::diff_worlds(w, w).empty());
}

TEST(Diff, SingleAddedBlock) {
  v::VoxelWorld a, b;
  b.set({2, 0, 3}, v::BlockColor::Green);
  auto d = v::diff_worlds(a, b);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], (v::CellChange{{2, 0, 3}, std::nullopt, v::BlockColor::Green}));
}

TEST(Diff, RandomPairsMatchCellScan) {
  gt::Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    auto a = oracle::random_world(rng, 60);
    auto b = oracle::random_world(rng, 60);
    auto d = v::diff_worlds(a, b);
    EXPECT_EQ(static_cast<int>(d.size()), oracle::mismatch_count(a, b));
    v::apply_diff(a, d);
    EXPECT_EQ(a, b);
  }
}

TEST(World, VersionBumpsOnlyOnChange) {
  v::VoxelWorld w;
  w.set({1, 1, 1}, v::BlockColor::Red);
  w.set({1, 1, 1}, v::BlockColor::Red);
  EXPECT_EQ(w.version(), 1u);
  w.set({1, 1, 1}, std::nullopt);
  EXPECT_EQ(w.version(), 2u);
}

TEST(World, CanonicalJsonRoundTrip) {
  gt::Rng rng(17);
  auto w = oracle::random_world(rng, 25);
  auto text = v::world_to_json(w);
  EXPECT_EQ(v::world_from_json(text), w);
  EXPECT_EQ(v::world_to_json(v::VoxelWorld{}), "{\"blocks\":[]}");
  EXPECT_EQ(error_of([] { v::world_from_json("{\"blocks\":[[0,0,0,\"pink\"]]}"); }), Errc::SchemaError);
  EXPECT_EQ(error_of([] { v::world_from_json("{\"blocks\":[[0,20,0,\"red\"]]}"); }), Errc::SchemaError);
}

TEST(World, CellIndexIsXMajor) {
  EXPECT_EQ(v::cell_index({0, 0, 1}), 1);
  EXPECT_EQ(v::cell_index({0, 1, 0}), v::kSizeZ);
  EXPECT_EQ(v::cell_index({1, 0, 0}), v::kSizeY * v::kSizeZ);
  for (int i = 0; i < v::kCellCount; i += 37) EXPECT_EQ(v::cell_index(v::cell_position(i)), i);
}
