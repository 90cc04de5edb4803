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

#include "gridtalk/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/stores.hpp"
#include "gridtalk/text.hpp"
#include "json_codec.hpp"

namespace gridtalk::dataset {

using codec::Json;

std::string_view role_name(Role r) noexcept { return r == Role::Architect ? "architect" : "builder"; }

namespace {

Role parse_role(std::string_view s) {
  if (s == "architect") return Role::Architect;
  if (s == "builder") return Role::Builder;
  throw Error(Errc::SchemaError, "role must be architect or builder, got '" + std::string(s) + "'");
}

[[noreturn]] void invalid(const std::string& id, const std::string& why) {
  throw Error(Errc::ValidationError, "record " + id + ": " + why);
}

Json log_to_json(const voxel::ActionLog& log) {
  Json j;
  j["world"] = codec::blocks_to_json(log.initial_world());
  j["agent"] = codec::agent_to_json(log.initial_agent());
  j["actions"] = codec::actions_to_json(log.steps());
  return j;
}

voxel::ActionLog log_from_json(const Json& j) {
  return voxel::ActionLog::unchecked(codec::blocks_from_json(codec::require(j, "world")),
                                     codec::agent_from_json(codec::require(j, "agent")),
                                     codec::actions_from_json(codec::require(j, "actions")));
}

void apply_field_map(Json& j, const FieldMap& fields) {
  for (const auto& [canonical, external] : fields) {
    if (canonical == external || !j.contains(external) || j.contains(canonical)) continue;
    j[canonical] = j[external];
    j.erase(external);
  }
}

GameRecord game_from_json(const Json& j) {
  GameRecord g;
  g.id = codec::require(j, "id").get<std::string>();
  g.target_id = codec::require(j, "target_id").get<std::string>();
  g.completed = codec::require(j, "completed").get<bool>();
  g.duration_minutes = codec::require(j, "duration_min").get<double>();
  for (const auto& t : codec::require(j, "turns")) {
    Turn turn;
    turn.role = parse_role(codec::require(t, "role").get<std::string>());
    turn.utterance = codec::require(t, "text").get<std::string>();
    if (t.contains("question")) turn.question = t["question"].get<bool>();
    if (t.contains("complete")) turn.completion_mark = t["complete"].get<bool>();
    if (t.contains("log")) turn.actions = log_from_json(t["log"]);
    g.turns.push_back(std::move(turn));
  }
  return g;
}

SingleTurnSample sample_from_json(const Json& j) {
  SingleTurnSample s;
  s.id = codec::require(j, "id").get<std::string>();
  s.world_id = codec::require(j, "world_id").get<std::string>();
  if (j.contains("worker_id") && !j["worker_id"].is_null()) s.worker_id = j["worker_id"].get<std::string>();
  s.instruction = codec::require(j, "instruction").get<std::string>();
  s.clear = codec::require(j, "clear").get<bool>();
  s.questions = codec::require(j, "questions").get<std::vector<std::string>>();
  if (j.contains("log")) s.actions = log_from_json(j["log"]);
  return s;
}

template <typename Record, typename FromJson, typename Check>
LoadResult<Record> parse_lines(std::string_view text, const FieldMap& fields, FromJson from_json, Check check) {
  LoadResult<Record> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = codec::parse(line, lineno);
    if (!j.is_object()) throw Error(Errc::SchemaError, "line " + std::to_string(lineno) + ": record must be an object", lineno);
    apply_field_map(j, fields);
    Record rec;
    try {
      rec = from_json(j);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (line " + std::to_string(lineno) + ")", lineno);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaError, "line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    try {
      check(rec, out, lineno);
    } catch (const Error& e) {
      out.rejected.push_back({lineno, rec.id, e.code(), e.what()});
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

void validate(const GameRecord& game) {
  if (game.id.empty()) invalid("<unnamed>", "game id must be non-empty");
  for (std::size_t i = 0; i < game.turns.size(); ++i) {
    const Turn& t = game.turns[i];
    const Role expected = i % 2 == 0 ? Role::Architect : Role::Builder;
    if (t.role != expected) {
      invalid(game.id, "turn " + std::to_string(i) + " should be by the " + std::string(role_name(expected)));
    }
    if (t.completion_mark && (t.role != Role::Architect || i + 1 != game.turns.size())) {
      invalid(game.id, "only the final architect turn may carry the completion mark");
    }
    if (t.role == Role::Architect && (t.question || t.actions)) {
      invalid(game.id, "architect turns carry neither questions nor actions");
    }
    if (t.question && t.actions) invalid(game.id, "a builder turn either asks or acts, not both");
    if (!t.completion_mark && t.utterance.empty() && !t.actions) {
      invalid(game.id, "turn " + std::to_string(i) + " is empty");
    }
    if (t.actions) {
      try {
        t.actions->validate();
      } catch (const Error& e) {
        throw Error(Errc::ValidationError, "record " + game.id + ": turn " + std::to_string(i) + ": " + e.what(),
                    e.step(), e.code());
      }
    }
  }
  const bool marked = !game.turns.empty() && game.turns.back().completion_mark;
  if (game.completed != marked) {
    invalid(game.id, game.completed ? "completed games end with the architect's completion mark"
                                     : "an unfinished game cannot carry a completion mark");
  }
}

void validate(const SingleTurnSample& sample) {
  if (sample.id.empty()) invalid("<unnamed>", "sample id must be non-empty");
  if (sample.instruction.find_first_not_of(" \t\r\n") == std::string::npos) {
    invalid(sample.id, "instruction must be non-empty");
  }
  if (!sample.clear && sample.questions.empty()) {
    invalid(sample.id, "an ambiguous instruction must have a clarifying question");
  }
  try {
    sample.actions.validate();
  } catch (const Error& e) {
    throw Error(Errc::ValidationError, "record " + sample.id + ": " + e.what(), e.step(), e.code());
  }
}

clarify::LabeledInstruction to_labeled(const SingleTurnSample& s) {
  return {s.id, s.instruction, s.world_id, s.clear ? clarify::Label::Clear : clarify::Label::Ambiguous,
          s.questions};
}

CorpusKind parse_corpus_kind(std::string_view s) {
  if (s == "multi") return CorpusKind::Multi;
  if (s == "single") return CorpusKind::Single;
  throw Error(Errc::InvalidArgument, "corpus kind must be multi or single, got '" + std::string(s) + "'");
}

FieldMap load_field_map(const std::filesystem::path& path) {
  Json j = codec::parse(read_file(path));
  if (!j.is_object()) throw Error(Errc::SchemaError, "field map must be a JSON object");
  FieldMap out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw Error(Errc::SchemaError, "field map values must be strings");
    out[k] = v.get<std::string>();
  }
  return out;
}

LoadResult<GameRecord> parse_games(std::string_view text, const FieldMap& fields) {
  return parse_lines<GameRecord>(text, fields, game_from_json,
                                 [](const GameRecord& g, auto&, std::size_t) { validate(g); });
}

LoadResult<SingleTurnSample> parse_samples(std::string_view text, const FieldMap& fields) {
  return parse_lines<SingleTurnSample>(
      text, fields, sample_from_json, [](const SingleTurnSample& s, auto& out, std::size_t line) {
        validate(s);
        if (exceeds_build_window(s)) {
          out.warnings.push_back({line, s.id, Errc::ValidationError,
                                  "build took " + std::to_string(s.actions.duration_ms()) + " ms (> 60000)"});
        }
      });
}

LoadResult<GameRecord> load_games(const std::filesystem::path& path, const FieldMap& fields) {
  return parse_games(read_file(path), fields);
}

LoadResult<SingleTurnSample> load_samples(const std::filesystem::path& path, const FieldMap& fields) {
  return parse_samples(read_file(path), fields);
}

std::string game_to_json(const GameRecord& g) {
  Json j;
  j["id"] = g.id;
  j["target_id"] = g.target_id;
  j["completed"] = g.completed;
  j["duration_min"] = g.duration_minutes;
  Json turns = Json::array();
  for (const auto& t : g.turns) {
    Json tj;
    tj["role"] = role_name(t.role);
    tj["text"] = t.utterance;
    if (t.question) tj["question"] = true;
    if (t.completion_mark) tj["complete"] = true;
    if (t.actions) tj["log"] = log_to_json(*t.actions);
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

std::string sample_to_json(const SingleTurnSample& s) {
  Json j;
  j["id"] = s.id;
  j["world_id"] = s.world_id;
  if (s.worker_id) j["worker_id"] = *s.worker_id;
  j["instruction"] = s.instruction;
  j["clear"] = s.clear;
  j["questions"] = s.questions;
  j["log"] = log_to_json(s.actions);
  return j.dump();
}

std::string games_to_jsonl(const std::vector<GameRecord>& games) {
  std::string out;
  for (const auto& g : games) out += game_to_json(g) + '\n';
  return out;
}

std::string samples_to_jsonl(const std::vector<SingleTurnSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += sample_to_json(s) + '\n';
  return out;
}

// ---------------------------------------------------------------- cleaning

std::string_view drop_reason_name(DropReason r) noexcept {
  switch (r) {
    case DropReason::TooShort: return "TooShort";
    case DropReason::NotEnglish: return "NotEnglish";
    case DropReason::Duplicate: return "Duplicate";
    case DropReason::MissingQuestion: return "MissingQuestion";
  }
  return "?";
}

const std::set<std::string, std::less<>>& english_stopwords() {
  static const std::set<std::string, std::less<>> kWords = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
      "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
      "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
      "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
      "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
      "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
      "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
      "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
      "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
      "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
      "yourselves", "let", "lets", "make", "put", "place", "build", "add", "remove", "take",
      "start", "next", "one", "two", "three", "four", "five", "first", "second", "last", "left",
      "right", "top", "bottom", "side", "front", "back", "row", "line", "tower", "block", "blocks",
      "color", "colour", "around", "across", "along", "behind", "beside", "near", "onto", "toward",
      "towards", "upon", "within", "without", "also", "still", "even", "ever", "every", "many",
      "much", "like", "well", "way", "use", "used", "want", "need", "go", "going", "get", "got",
      "see", "look", "new", "old", "another", "either", "neither", "else", "may", "might", "must",
  };
  return kWords;
}

bool looks_english(std::string_view text, double min_ascii_share) {
  std::size_t chars = 0;
  std::size_t ascii = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation byte
    if (c < 0x80 && std::isspace(c)) continue;
    ++chars;
    if (c < 0x80 && (std::isalnum(c) || std::ispunct(c))) ++ascii;
  }
  if (chars == 0) return false;
  if (static_cast<double>(ascii) < min_ascii_share * static_cast<double>(chars)) return false;
  const auto& stop = english_stopwords();
  for (const auto& w : tokenize_words(text)) {
    if (stop.count(w)) return true;
  }
  return false;
}

std::optional<DropReason> check_instruction(std::string_view text, const CleanOptions& opts) {
  if (word_count(text) < opts.min_words) return DropReason::TooShort;
  if (!looks_english(text, opts.min_ascii_share)) return DropReason::NotEnglish;
  return std::nullopt;
}

CleanResult clean(const std::vector<SingleTurnSample>& samples, const CleanOptions& opts) {
  CleanResult out;
  std::set<std::string> seen;
  for (const auto& s : samples) {
    std::optional<DropReason> reason = check_instruction(s.instruction, opts);
    if (!reason && !s.clear && s.questions.empty()) reason = DropReason::MissingQuestion;
    if (!reason) {
      std::string key = s.worker_id.value_or("") + '\x1f' + s.instruction;
      if (!seen.insert(std::move(key)).second) reason = DropReason::Duplicate;
    }
    if (reason) {
      out.dropped.push_back({s, *reason});
    } else {
      out.kept.push_back(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------- statistics

std::size_t word_count(std::string_view text) { return split_whitespace(text).size(); }

namespace {

std::optional<double> mean_of(double total, std::size_t n) {
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

}  // namespace

CorpusStats stats(const std::vector<GameRecord>& games) {
  if (games.empty()) throw Error(Errc::EmptyCorpus, "no games to summarize");
  CorpusStats s;
  std::set<std::string> targets;
  std::vector<double> durations;
  std::size_t utterances = 0;
  std::size_t questions = 0;
  std::size_t instructions = 0;
  double instruction_words = 0.0;
  for (const auto& g : games) {
    if (g.completed) {
      targets.insert(g.target_id);
      durations.push_back(g.duration_minutes);
    }
    for (const auto& t : g.turns) {
      if (t.completion_mark) continue;
      ++utterances;
      if (t.role == Role::Architect) {
        ++instructions;
        instruction_words += static_cast<double>(word_count(t.utterance));
      } else if (t.question) {
        ++questions;
      }
    }
  }
  s.structures = targets.size();
  s.games = durations.size();
  if (!durations.empty()) {
    std::sort(durations.begin(), durations.end());
    s.median_duration_minutes = durations[(durations.size() - 1) / 2];
  }
  s.utterances = utterances;
  s.avg_instruction_words = mean_of(instruction_words, instructions);
  s.questions = questions;
  return s;
}

CorpusStats stats(const std::vector<SingleTurnSample>& samples) {
  if (samples.empty()) throw Error(Errc::EmptyCorpus, "no samples to summarize");
  CorpusStats s;
  std::size_t clear = 0;
  std::size_t questions = 0;
  double instruction_words = 0.0;
  double question_words = 0.0;
  for (const auto& r : samples) {
    if (r.clear) ++clear;
    instruction_words += static_cast<double>(word_count(r.instruction));
    for (const auto& q : r.questions) {
      ++questions;
      question_words += static_cast<double>(word_count(q));
    }
  }
  s.instructions = samples.size();
  s.clear = clear;
  s.ambiguous = samples.size() - clear;
  s.avg_instruction_words = mean_of(instruction_words, samples.size());
  s.questions = questions;
  s.avg_question_words = mean_of(question_words, questions);
  return s;
}

std::string stats_to_json(const CorpusStats& s) {
  Json j = Json::object();
  auto put = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  put("structures", s.structures);
  put("games", s.games);
  put("median_duration_min", s.median_duration_minutes);
  put("utterances", s.utterances);
  put("instructions", s.instructions);
  put("clear", s.clear);
  put("ambiguous", s.ambiguous);
  put("avg_instruction_words", s.avg_instruction_words);
  put("questions", s.questions);
  put("avg_question_words", s.avg_question_words);
  return j.dump();
}

// ---------------------------------------------------------------- worlds

std::string put_world(session::ObjectStore& store, const voxel::VoxelWorld& world) {
  return store.put(voxel::world_to_json(world));
}

voxel::VoxelWorld get_world(const session::ObjectStore& store, const std::string& id) {
  return voxel::world_from_json(store.get(id));
}

clarify::WorldCatalog load_catalog(const session::ObjectStore& store, const std::set<std::string>& ids) {
  clarify::WorldCatalog out;
  for (const auto& id : ids) out.emplace(id, get_world(store, id));
  return out;
}

}  // namespace gridtalk::dataset
