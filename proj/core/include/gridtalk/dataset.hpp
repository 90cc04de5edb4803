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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gridtalk/clarification.hpp"
#include "gridtalk/error.hpp"
#include "gridtalk/ranking.hpp"
#include "gridtalk/voxel.hpp"

namespace gridtalk::session {
class ObjectStore;
}

namespace gridtalk::dataset {

enum class Role { Architect, Builder };

std::string_view role_name(Role r) noexcept;

struct Turn {
  Role role = Role::Architect;
  std::string utterance;
  /// Builder turns that executed the instruction.
  std::optional<voxel::ActionLog> actions;
  /// Builder turns that asked for clarification instead.
  bool question = false;
  /// The architect's final "complete" mark; not counted as an utterance.
  bool completion_mark = false;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct GameRecord {
  std::string id;
  std::string target_id;
  std::vector<Turn> turns;
  bool completed = false;
  double duration_minutes = 0.0;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

/// Roles alternate starting with the architect; a completed game ends with
/// the architect's completion mark and only there. Throws ValidationError.
void validate(const GameRecord& game);

struct SingleTurnSample {
  std::string id;
  std::string world_id;
  voxel::ActionLog actions;
  std::string instruction;
  bool clear = true;
  std::vector<std::string> questions;
  std::optional<std::string> worker_id;

  friend bool operator==(const SingleTurnSample&, const SingleTurnSample&) = default;
};

inline constexpr std::int64_t kBuildWindowMs = 60'000;

/// An ambiguous sample must carry at least one clarifying question and the
/// instruction must be non-empty. Throws ValidationError.
void validate(const SingleTurnSample& sample);

/// The one-minute build window is advisory: exceeding it warns, never rejects.
inline bool exceeds_build_window(const SingleTurnSample& s) {
  return s.actions.duration_ms() > kBuildWindowMs;
}

clarify::LabeledInstruction to_labeled(const SingleTurnSample& s);

enum class CorpusKind { Multi, Single };

CorpusKind parse_corpus_kind(std::string_view s);

/// Maps external field names onto the canonical schema: each entry is
/// (canonical name, external name) and applies to top-level keys only.
using FieldMap = std::map<std::string, std::string>;

/// Reads a mapping from a JSON object file of the form
/// {"canonical": "external", ...}.
FieldMap load_field_map(const std::filesystem::path& path);

struct LoadIssue {
  std::size_t line = 0;
  std::string id;
  Errc code = Errc::ValidationError;
  std::string message;

  friend bool operator==(const LoadIssue&, const LoadIssue&) = default;
};

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  /// Records skipped because they broke an invariant.
  std::vector<LoadIssue> rejected;
  /// Advisory notes (e.g. the build window); the record is kept.
  std::vector<LoadIssue> warnings;
};

/// JSON-lines parsing. Malformed lines throw ParseError (message carries the
/// line); missing fields throw SchemaError; invariant breaches are skipped
/// and reported in `rejected`.
LoadResult<GameRecord> parse_games(std::string_view text, const FieldMap& fields = {});
LoadResult<SingleTurnSample> parse_samples(std::string_view text, const FieldMap& fields = {});

LoadResult<GameRecord> load_games(const std::filesystem::path& path, const FieldMap& fields = {});
LoadResult<SingleTurnSample> load_samples(const std::filesystem::path& path, const FieldMap& fields = {});

/// Canonical serialization: one compact JSON object per line.
std::string game_to_json(const GameRecord& g);
std::string sample_to_json(const SingleTurnSample& s);
std::string games_to_jsonl(const std::vector<GameRecord>& games);
std::string samples_to_jsonl(const std::vector<SingleTurnSample>& samples);

// ---------------------------------------------------------------- cleaning

enum class DropReason { TooShort, NotEnglish, Duplicate, MissingQuestion };

std::string_view drop_reason_name(DropReason r) noexcept;

struct CleanOptions {
  std::size_t min_words = 3;
  /// Minimum share of non-space characters that are ASCII letters, digits or
  /// punctuation.
  double min_ascii_share = 0.9;
};

struct Dropped {
  SingleTurnSample sample;
  DropReason reason = DropReason::TooShort;
};

struct CleanResult {
  std::vector<SingleTurnSample> kept;
  std::vector<Dropped> dropped;
};

/// The bundled list of 200 common English function words.
const std::set<std::string, std::less<>>& english_stopwords();

bool looks_english(std::string_view text, double min_ascii_share = 0.9);

/// Text-only rules shared with the session service: TooShort, NotEnglish.
std::optional<DropReason> check_instruction(std::string_view text, const CleanOptions& opts = {});

/// Applies the text rules, the question rule and exact-duplicate removal
/// (per worker when worker ids exist, otherwise global), keeping the first
/// occurrence. Idempotent.
CleanResult clean(const std::vector<SingleTurnSample>& samples, const CleanOptions& opts = {});

// ---------------------------------------------------------------- statistics

struct CorpusStats {
  // multi-turn
  std::optional<std::size_t> structures;
  std::optional<std::size_t> games;
  std::optional<double> median_duration_minutes;
  std::optional<std::size_t> utterances;
  // both
  std::optional<double> avg_instruction_words;
  std::optional<std::size_t> questions;
  // single-turn
  std::optional<std::size_t> instructions;
  std::optional<std::size_t> clear;
  std::optional<std::size_t> ambiguous;
  std::optional<double> avg_question_words;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Table-1 style summary. Games, the median duration and structures count
/// completed games only; utterances count every turn except the completion
/// mark. Throws EmptyCorpus.
CorpusStats stats(const std::vector<GameRecord>& games);
/// Table-3 style summary. Throws EmptyCorpus.
CorpusStats stats(const std::vector<SingleTurnSample>& samples);

std::string stats_to_json(const CorpusStats& s);

std::size_t word_count(std::string_view text);

// ---------------------------------------------------------------- worlds

/// Canonical world ids are the object-store digests of world_to_json.
std::string put_world(session::ObjectStore& store, const voxel::VoxelWorld& world);
voxel::VoxelWorld get_world(const session::ObjectStore& store, const std::string& id);
/// Loads every referenced world id. Throws UnknownWorld.
clarify::WorldCatalog load_catalog(const session::ObjectStore& store, const std::set<std::string>& ids);

// ---------------------------------------------------------------- synthesis

/// The information slot deleted to make an instruction ambiguous.
enum class Slot { Color, Direction, Count, Identity };

inline constexpr Slot kAllSlots[] = {Slot::Color, Slot::Direction, Slot::Count, Slot::Identity};

std::string_view slot_name(Slot s) noexcept;

struct SynthConfig {
  std::size_t samples = 200;
  std::size_t worlds = 24;
  double ambiguity_rate = 0.13;
  /// Records appended that clean() must drop; cycled through the reasons.
  std::size_t planted_violations = 0;
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  clarify::WorldCatalog worlds;
  std::vector<SingleTurnSample> samples;
  /// Parallel to `samples`: the deleted slot of each ambiguous record.
  std::vector<std::optional<Slot>> deleted_slot;
  /// Gold question id of each ambiguous record (empty for clear ones).
  std::vector<std::string> gold_question;
  std::map<std::string, DropReason> planted;
  /// Binomial expectation n * rate, recorded at generation time.
  double expected_ambiguous = 0.0;
  /// Statistics tallied while generating, over the non-planted records.
  CorpusStats expected_stats;
};

/// Deterministic single-turn corpus. Worlds are built through voxel-core
/// actions around an empty central cross; every sample then builds a short
/// line from the centre, so each ActionLog is legal. Exactly
/// round(samples * ambiguity_rate) records are ambiguous.
SynthCorpus synth_generate(const SynthConfig& config);

/// The fixed candidate pool for synthetic queries: one question per
/// (slot, verb) plus distractors.
clarify::QuestionPool synth_question_pool();

/// Slot category named by a pool question, if any.
std::optional<Slot> question_slot(std::string_view question_id);

struct SynthGames {
  clarify::WorldCatalog targets;
  std::vector<GameRecord> games;
  CorpusStats expected_stats;
};

SynthGames synth_games(std::size_t count, std::uint64_t seed);

/// World-dependent need labels: ambiguous iff the world holds more than
/// `threshold` blocks, independent of the (shared) instruction texts.
std::vector<clarify::LabeledInstruction> synth_world_dependent(const SynthCorpus& corpus, std::size_t threshold = 6);

/// Small role-tagged dialogues over random worlds for the fusion model.
/// Label 1 marks an architect instruction that omits the colour, so the set
/// is separable from the text alone.
struct DialogueExample {
  voxel::VoxelWorld world;
  std::vector<std::pair<Role, std::string>> turns;
  double label = 0.0;
};

std::vector<DialogueExample> synth_dialogues(std::size_t count, std::uint64_t seed);

}  // namespace gridtalk::dataset
