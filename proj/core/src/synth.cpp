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

#include <algorithm>
#include <array>
#include <cmath>

#include "gridtalk/dataset.hpp"
#include "gridtalk/digest.hpp"
#include "gridtalk/text.hpp"

namespace gridtalk::dataset {

namespace {

using voxel::BlockColor;
using voxel::Direction;
using voxel::Position;

constexpr std::array<const char*, 4> kVerbs = {"place", "put", "build", "add"};
constexpr std::array<Direction, 4> kDirections = {Direction::North, Direction::South, Direction::East,
                                                  Direction::West};

const char* direction_word(Direction d) {
  switch (d) {
    case Direction::North: return "north";
    case Direction::South: return "south";
    case Direction::East: return "east";
    case Direction::West: return "west";
  }
  return "?";
}

// Worlds only use the border ring so the central cross the samples build on
// stays free.
bool in_ring(int x, int z) { return x < 2 || x > 8 || z < 2 || z > 8; }

voxel::VoxelWorld random_world(Rng& rng, int blocks) {
  static constexpr std::array<std::array<int, 2>, 4> kSteps = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  voxel::State st;
  int placed = 0;
  for (int attempt = 0; placed < blocks && attempt < 10'000; ++attempt) {
    const int x = static_cast<int>(rng.below(voxel::kSizeX));
    const int z = static_cast<int>(rng.below(voxel::kSizeZ));
    if (!in_ring(x, z)) continue;
    int y = 0;
    while (y < voxel::kSizeY && st.world.occupied({x, y, z})) ++y;
    if (y > 2) continue;
    const auto color = voxel::kAllColors[rng.below(voxel::kAllColors.size())];
    const auto first = rng.below(kSteps.size());
    for (std::size_t k = 0; k < kSteps.size(); ++k) {
      const auto& s = kSteps[(first + k) % kSteps.size()];
      const Position stand{x + s[0], 0, z + s[1]};
      if (!voxel::in_bounds(stand) || st.world.occupied(stand)) continue;
      st.agent.position = stand;
      st.agent.lifted = false;
      try {
        voxel::apply_action_inplace(st, {0, voxel::Place{{x, y, z}, color}});
        ++placed;
        break;
      } catch (const Error&) {
      }
    }
  }
  return st.world;
}

std::string pool_id(Slot s, std::string_view verb) { return "q-" + std::string(slot_name(s)) + "-" + std::string(verb); }

std::string question_text(Slot s, std::string_view verb) {
  const std::string v(verb);
  switch (s) {
    case Slot::Color: return "Which color should I use when I " + v + " them?";
    case Slot::Direction: return "In which direction should the row go when I " + v + " it?";
    case Slot::Count: return "How many should I " + v + "?";
    case Slot::Identity: return "Which structure do you mean when I " + v + " next to it?";
  }
  return {};
}

struct Instruction {
  std::string text;
  std::size_t words = 0;
};

// Assembles the instruction piece by piece, tallying words per piece so the
// expected statistics do not reuse the corpus word counter.
struct Builder {
  Instruction out;
  void add(std::string_view piece, std::size_t words) {
    if (!out.text.empty()) out.text += ' ';
    out.text += piece;
    out.words += words;
  }
};

Instruction render(std::string_view verb, int count, BlockColor color, Direction dir, BlockColor ref,
                   std::optional<Slot> drop) {
  Builder b;
  b.add(verb, 1);
  if (drop == Slot::Count) {
    b.add("some", 1);
  } else {
    b.add(count_word(static_cast<std::size_t>(count)), 1);
  }
  if (drop != Slot::Color) b.add(color_name(color), 1);
  b.add(count == 1 && drop != Slot::Count ? "block" : "blocks", 1);
  b.add("in a row", 3);
  if (drop != Slot::Direction) {
    b.add("heading", 1);
    b.add(direction_word(dir), 1);
  }
  b.add("from your spot, close to", 5);
  if (drop == Slot::Identity) {
    b.add("that structure", 2);
  } else {
    b.add("the", 1);
    b.add(color_name(ref), 1);
    b.add("structure", 1);
  }
  return b.out;
}

voxel::ActionLog build_line(const voxel::VoxelWorld& world, int count, BlockColor color, Direction dir) {
  voxel::ActionLog log(world, voxel::AgentState{});
  const Position step = voxel::direction_offset(dir);
  Position p = log.initial_agent().position;
  for (int k = 1; k <= count; ++k) {
    p = p + step;
    log.append({800 * k, voxel::Place{p, color}});
  }
  return log;
}

BlockColor random_present_color(Rng& rng, const voxel::VoxelWorld& w) {
  auto blocks = w.blocks();
  return *w.at(blocks[rng.below(blocks.size())]);
}

struct Tally {
  std::size_t instructions = 0;
  std::size_t clear = 0;
  std::size_t questions = 0;
  double instruction_words = 0;
  double question_words = 0;

  CorpusStats finish() const {
    CorpusStats s;
    s.instructions = instructions;
    s.clear = clear;
    s.ambiguous = instructions - clear;
    s.questions = questions;
    if (instructions) s.avg_instruction_words = instruction_words / static_cast<double>(instructions);
    if (questions) s.avg_question_words = question_words / static_cast<double>(questions);
    return s;
  }
};

// Question texts are built from fixed phrases; their word counts are fixed
// per slot (verb is a single word).
std::size_t question_words(Slot s) {
  switch (s) {
    case Slot::Color: return 9;
    case Slot::Direction: return 11;
    case Slot::Count: return 5;
    case Slot::Identity: return 11;
  }
  return 0;
}

}  // namespace

std::string_view slot_name(Slot s) noexcept {
  switch (s) {
    case Slot::Color: return "color";
    case Slot::Direction: return "direction";
    case Slot::Count: return "count";
    case Slot::Identity: return "identity";
  }
  return "?";
}

clarify::QuestionPool synth_question_pool() {
  std::vector<clarify::Question> qs;
  for (Slot s : kAllSlots) {
    for (const char* v : kVerbs) qs.push_back({pool_id(s, v), question_text(s, v)});
  }
  const std::array<const char*, 8> distractors = {
      "Should the row start from your spot?",
      "Is the structure close to the edge?",
      "Do you want the blocks heading north?",
      "Should I stand on the row when I build?",
      "Can I remove blocks from the structure?",
      "Do you want green blocks in a row?",
      "Is this a tower or a row of blocks?",
      "Should I place them close together?",
  };
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    qs.push_back({"q-other-" + std::to_string(i + 1), distractors[i]});
  }
  return clarify::QuestionPool(std::move(qs));
}

std::optional<Slot> question_slot(std::string_view question_id) {
  for (Slot s : kAllSlots) {
    const std::string prefix = "q-" + std::string(slot_name(s)) + "-";
    if (question_id.substr(0, prefix.size()) == prefix) return s;
  }
  return std::nullopt;
}

SynthCorpus synth_generate(const SynthConfig& config) {
  if (!(config.ambiguity_rate >= 0.0 && config.ambiguity_rate <= 1.0)) {
    throw Error(Errc::InvalidArgument, "ambiguity rate must be in [0, 1]");
  }
  if (config.worlds == 0) throw Error(Errc::InvalidArgument, "need at least one world");
  SynthCorpus out;
  Rng rng(mix_seed(config.seed, 0x73796e7468ULL));

  std::vector<std::string> world_ids;
  while (world_ids.size() < config.worlds) {
    auto w = random_world(rng, 3 + static_cast<int>(rng.below(10)));
    auto id = sha256_hex(voxel::world_to_json(w));
    if (out.worlds.emplace(id, w).second) world_ids.push_back(id);
  }

  const std::size_t n = config.samples;
  const auto n_ambiguous = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.ambiguity_rate));
  out.expected_ambiguous = static_cast<double>(n) * config.ambiguity_rate;
  std::vector<bool> ambiguous(n, false);
  std::fill(ambiguous.begin(), ambiguous.begin() + static_cast<long>(n_ambiguous), true);
  rng.shuffle(ambiguous);

  Tally tally;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& wid = world_ids[rng.below(world_ids.size())];
    const auto& world = out.worlds.at(wid);
    const char* verb = kVerbs[rng.below(kVerbs.size())];
    const int count = 1 + static_cast<int>(rng.below(3));
    const BlockColor color = voxel::kAllColors[rng.below(voxel::kAllColors.size())];
    const Direction dir = kDirections[rng.below(kDirections.size())];
    const BlockColor ref = random_present_color(rng, world);
    std::optional<Slot> drop;
    if (ambiguous[i]) drop = kAllSlots[rng.below(std::size(kAllSlots))];

    const Instruction ins = render(verb, count, color, dir, ref, drop);
    SingleTurnSample s;
    s.id = "s" + std::to_string(i + 1);
    s.world_id = wid;
    s.worker_id = "w" + std::to_string(i + 1);
    s.actions = build_line(world, count, color, dir);
    s.instruction = ins.text;
    s.clear = !drop;
    if (drop) s.questions.push_back(question_text(*drop, verb));

    ++tally.instructions;
    tally.instruction_words += static_cast<double>(ins.words);
    if (drop) {
      ++tally.questions;
      tally.question_words += static_cast<double>(question_words(*drop));
    } else {
      ++tally.clear;
    }
    out.samples.push_back(std::move(s));
    out.deleted_slot.push_back(drop);
    out.gold_question.push_back(drop ? pool_id(*drop, verb) : std::string());
  }
  out.expected_stats = tally.finish();

  constexpr std::array<DropReason, 4> kCycle = {DropReason::TooShort, DropReason::NotEnglish,
                                                DropReason::Duplicate, DropReason::MissingQuestion};
  const std::string& base_world = world_ids.front();
  for (std::size_t k = 0; k < config.planted_violations; ++k) {
    const DropReason reason = kCycle[k % kCycle.size()];
    SingleTurnSample s;
    s.id = "planted" + std::to_string(k + 1);
    s.world_id = base_world;
    s.worker_id = "pw" + std::to_string(k + 1);
    s.actions = voxel::ActionLog(out.worlds.at(base_world), voxel::AgentState{});
    switch (reason) {
      case DropReason::TooShort:
        s.instruction = "ok";
        break;
      case DropReason::NotEnglish:
        s.instruction = "把 三个 绿色 方块 放在 北边";
        break;
      case DropReason::Duplicate: {
        if (out.samples.empty()) throw Error(Errc::InvalidArgument, "duplicates need at least one sample");
        const auto& src = out.samples[rng.below(n)];
        s.world_id = src.world_id;
        s.worker_id = src.worker_id;
        s.actions = src.actions;
        s.instruction = src.instruction;
        s.clear = src.clear;
        s.questions = src.questions;
        break;
      }
      case DropReason::MissingQuestion:
        s.instruction = "build a tall thing for planted record " + std::to_string(k + 1);
        s.clear = false;
        break;
    }
    out.planted.emplace(s.id, reason);
    out.samples.push_back(std::move(s));
    out.deleted_slot.push_back(std::nullopt);
    out.gold_question.emplace_back();
  }
  return out;
}

std::vector<clarify::LabeledInstruction> synth_world_dependent(const SynthCorpus& corpus, std::size_t threshold) {
  std::vector<clarify::LabeledInstruction> out;
  for (const auto& s : corpus.samples) {
    if (corpus.planted.count(s.id)) continue;
    const auto& world = corpus.worlds.at(s.world_id);
    const bool amb = static_cast<std::size_t>(world.block_count()) > threshold;
    clarify::LabeledInstruction li{s.id, s.instruction, s.world_id,
                                   amb ? clarify::Label::Ambiguous : clarify::Label::Clear, {}};
    if (amb) li.questions.push_back("Which structure do you mean?");
    out.push_back(std::move(li));
  }
  return out;
}

SynthGames synth_games(std::size_t count, std::uint64_t seed) {
  SynthGames out;
  Rng rng(mix_seed(seed, 0x67616d6573ULL));
  std::vector<double> durations;
  std::size_t utterances = 0;
  std::size_t instructions = 0;
  std::size_t questions = 0;
  double instruction_words = 0;
  std::set<std::string> used_targets;

  for (std::size_t g = 0; g < count; ++g) {
    // Target: a short ground line in each of two or three directions from
    // the centre, always reachable from the default agent position.
    voxel::VoxelWorld target;
    std::vector<std::pair<Position, BlockColor>> plan;
    const std::size_t arms = 2 + rng.below(2);
    for (std::size_t a = 0; a < arms; ++a) {
      const Position step = voxel::direction_offset(kDirections[a]);
      const int len = 1 + static_cast<int>(rng.below(3));
      const BlockColor c = voxel::kAllColors[rng.below(voxel::kAllColors.size())];
      Position p = voxel::AgentState{}.position;
      for (int k = 0; k < len; ++k) {
        p = p + step;
        target.set(p, c);
        plan.push_back({p, c});
      }
    }
    const std::string tid = sha256_hex(voxel::world_to_json(target));
    out.targets.emplace(tid, target);

    GameRecord rec;
    rec.id = "g" + std::to_string(g + 1);
    rec.target_id = tid;
    rec.completed = g % 5 != 4;
    rec.duration_minutes = 20.0 + static_cast<double>(rng.below(71));
    const std::size_t steps = rec.completed ? plan.size() : plan.size() / 2;

    voxel::VoxelWorld current;
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& [pos, color] = plan[k];
      const bool ask = rng.bernoulli(0.25);
      auto add_architect = [&](std::string text, std::size_t words) {
        rec.turns.push_back({Role::Architect, std::move(text), std::nullopt, false, false});
        ++utterances;
        ++instructions;
        instruction_words += static_cast<double>(words);
      };
      const std::string cell = "(" + std::to_string(pos.x) + ", " + std::to_string(pos.z) + ")";
      if (ask) {
        add_architect("put a block at " + cell + " on the ground", 9);
        rec.turns.push_back({Role::Builder, "which color should it be?", std::nullopt, true, false});
        ++utterances;
        ++questions;
        add_architect("make it " + std::string(color_name(color)) + " please", 4);
      } else {
        add_architect("put a " + std::string(color_name(color)) + " block at " + cell + " on the ground", 10);
      }
      voxel::ActionLog log(current, voxel::AgentState{});
      log.append({1000, voxel::Place{pos, color}});
      current = log.tail().world;
      rec.turns.push_back({Role::Builder, "", std::move(log), false, false});
      ++utterances;
    }
    if (rec.completed) {
      rec.turns.push_back({Role::Architect, "complete", std::nullopt, false, true});
      durations.push_back(rec.duration_minutes);
      used_targets.insert(tid);
    }
    out.games.push_back(std::move(rec));
  }

  CorpusStats& s = out.expected_stats;
  s.structures = used_targets.size();
  s.games = durations.size();
  if (!durations.empty()) {
    std::sort(durations.begin(), durations.end());
    s.median_duration_minutes = durations[(durations.size() - 1) / 2];
  }
  s.utterances = utterances;
  if (instructions) s.avg_instruction_words = instruction_words / static_cast<double>(instructions);
  s.questions = questions;
  return out;
}

std::vector<DialogueExample> synth_dialogues(std::size_t count, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6469616cULL));
  std::vector<DialogueExample> out;
  for (std::size_t i = 0; i < count; ++i) {
    DialogueExample ex;
    ex.world = random_world(rng, 2 + static_cast<int>(rng.below(6)));
    const bool amb = i % 2 == 1;
    const char* verb = kVerbs[rng.below(kVerbs.size())];
    const BlockColor color = voxel::kAllColors[rng.below(voxel::kAllColors.size())];
    const Direction dir = kDirections[rng.below(kDirections.size())];
    const auto ins = render(verb, 1 + static_cast<int>(rng.below(3)), color, dir, random_present_color(rng, ex.world),
                            amb ? std::optional<Slot>(Slot::Color) : std::nullopt);
    ex.turns.push_back({Role::Architect, ins.text});
    ex.label = amb ? 1.0 : 0.0;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace gridtalk::dataset
