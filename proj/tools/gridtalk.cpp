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

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "gridtalk/checkpoint.hpp"
#include "gridtalk/dataset.hpp"
#include "gridtalk/digest.hpp"
#include "gridtalk/dual_encoder.hpp"
#include "gridtalk/error.hpp"
#include "gridtalk/fusion.hpp"
#include "gridtalk/http_server.hpp"
#include "gridtalk/need_classifier.hpp"
#include "gridtalk/pipelines.hpp"
#include "gridtalk/session.hpp"
#include "gridtalk/stores.hpp"
#include "gridtalk/structure.hpp"
#include "gridtalk/verbalizer.hpp"
#include "gridtalk/voxel.hpp"

namespace fs = std::filesystem;
namespace gt = gridtalk;
using Json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string format = "text";
  bool json() const { return format == "json-lines"; }
};

Globals g;

void emit(const Json& j) { std::cout << j.dump() << '\n'; }

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string default_data_dir() {
  const char* env = std::getenv("GRIDTALK_DATA_DIR");
  return env ? env : "gridtalk-data";
}

gt::voxel::VoxelWorld read_world(const std::string& path) { return gt::voxel::world_from_json(gt::read_file(path)); }

gt::clarify::WorldCatalog catalog_for(const std::vector<gt::dataset::SingleTurnSample>& samples,
                                      const std::string& objects_dir) {
  gt::session::FileObjectStore store(objects_dir);
  std::set<std::string> ids;
  for (const auto& s : samples) ids.insert(s.world_id);
  return gt::dataset::load_catalog(store, ids);
}

gt::clarify::PostfilterMode parse_postfilter(const std::string& s) {
  if (s == "on") return gt::clarify::PostfilterMode::Demote;
  if (s == "strict") return gt::clarify::PostfilterMode::Strict;
  return gt::clarify::PostfilterMode::Off;
}

std::vector<gt::dataset::SingleTurnSample> load_samples_reporting(const std::string& path) {
  auto loaded = gt::dataset::load_samples(path);
  for (const auto& r : loaded.rejected) std::cerr << "skipped line " << r.line << ": " << r.message << '\n';
  return loaded.records;
}

// ------------------------------------------------------------------ commands

int cmd_replay(const std::string& log_path) {
  auto log = gt::voxel::ActionLog::parse_jsonl(gt::read_file(log_path));
  auto state = gt::voxel::replay(log);
  const auto digest = state.world.content_digest();
  if (g.json()) {
    emit({{"digest", digest},
          {"blocks", state.world.block_count()},
          {"steps", log.steps().size()},
          {"world", Json::parse(gt::voxel::world_to_json(state.world))["blocks"]}});
  } else {
    std::cout << "steps " << log.steps().size() << "\nblocks " << state.world.block_count() << "\ndigest " << digest
              << '\n';
  }
  return 0;
}

int cmd_verbalize(const std::string& world_path, bool state_line, std::uint64_t seed) {
  const auto world = read_world(world_path);
  const std::string text = state_line ? gt::verbal::state_line(world, seed) : gt::verbal::verbalize_world(world);
  if (g.json()) {
    emit({{"text", text}});
  } else {
    std::cout << text << '\n';
  }
  return 0;
}

int cmd_classify(const std::string& world_path, int tall_above) {
  const auto labels = gt::structure::classify_structure(read_world(world_path), {tall_above});
  Json j{{"flat", labels.flat},
         {"flying", labels.flying},
         {"diagonal", labels.diagonal},
         {"tricky", labels.tricky},
         {"tall", labels.tall}};
  if (g.json()) {
    emit(j);
  } else {
    for (const auto& [k, v] : j.items()) std::cout << k << ' ' << (v.get<bool>() ? "true" : "false") << '\n';
  }
  return 0;
}

int cmd_match(const std::string& world_path, const std::string& target_path) {
  const auto r = gt::structure::match(read_world(world_path), read_world(target_path));
  Json j{{"exact", r.exact}, {"translated_match", r.translated_match}, {"dx", r.dx},
         {"dz", r.dz},       {"missing", r.missing},                   {"extra", r.extra}};
  if (g.json()) {
    emit(j);
  } else {
    std::cout << "exact " << (r.exact ? "true" : "false") << "\ntranslated_match "
              << (r.translated_match ? "true" : "false") << "\noffset " << r.dx << ' ' << r.dz << "\nmissing "
              << r.missing << "\nextra " << r.extra << '\n';
  }
  return 0;
}

int cmd_dataset_load(const std::string& kind, const std::string& input, const std::string& field_map) {
  const auto fields = field_map.empty() ? gt::dataset::FieldMap{} : gt::dataset::load_field_map(field_map);
  std::size_t records = 0;
  std::vector<gt::dataset::LoadIssue> rejected;
  std::vector<gt::dataset::LoadIssue> warnings;
  if (gt::dataset::parse_corpus_kind(kind) == gt::dataset::CorpusKind::Multi) {
    auto r = gt::dataset::load_games(input, fields);
    records = r.records.size();
    rejected = r.rejected;
    warnings = r.warnings;
  } else {
    auto r = gt::dataset::load_samples(input, fields);
    records = r.records.size();
    rejected = r.rejected;
    warnings = r.warnings;
  }
  for (const auto& w : warnings) std::cerr << "warning line " << w.line << ": " << w.message << '\n';
  if (g.json()) {
    emit({{"records", records}, {"rejected", rejected.size()}, {"warnings", warnings.size()}});
    for (const auto& r : rejected) {
      emit({{"line", r.line}, {"id", r.id}, {"error", gt::errc_name(r.code)}, {"message", r.message}});
    }
  } else {
    std::cout << "records " << records << "\nrejected " << rejected.size() << "\nwarnings " << warnings.size()
              << '\n';
    for (const auto& r : rejected) std::cout << "rejected line " << r.line << ": " << r.message << '\n';
  }
  return rejected.empty() ? 0 : 1;
}

int cmd_dataset_clean(const std::string& input, const std::string& output, std::size_t min_words) {
  auto samples = load_samples_reporting(input);
  gt::dataset::CleanOptions opts;
  opts.min_words = min_words;
  auto result = gt::dataset::clean(samples, opts);
  if (!output.empty()) gt::write_file(output, gt::dataset::samples_to_jsonl(result.kept));
  if (g.json()) {
    emit({{"kept", result.kept.size()}, {"dropped", result.dropped.size()}});
    for (const auto& d : result.dropped) {
      emit({{"id", d.sample.id}, {"reason", gt::dataset::drop_reason_name(d.reason)}});
    }
  } else {
    std::cout << "kept " << result.kept.size() << "\ndropped " << result.dropped.size() << '\n';
    for (const auto& d : result.dropped) {
      std::cout << d.sample.id << '\t' << gt::dataset::drop_reason_name(d.reason) << '\n';
    }
  }
  return 0;
}

int cmd_dataset_stats(const std::string& kind, const std::string& input, const std::string& field_map) {
  const auto fields = field_map.empty() ? gt::dataset::FieldMap{} : gt::dataset::load_field_map(field_map);
  gt::dataset::CorpusStats s;
  if (gt::dataset::parse_corpus_kind(kind) == gt::dataset::CorpusKind::Multi) {
    s = gt::dataset::stats(gt::dataset::load_games(input, fields).records);
  } else {
    s = gt::dataset::stats(gt::dataset::load_samples(input, fields).records);
  }
  Json j = Json::parse(gt::dataset::stats_to_json(s));
  if (g.json()) {
    emit(j);
  } else {
    for (const auto& [k, v] : j.items()) {
      std::cout << k << ' ' << (v.is_number_float() ? fixed(v.get<double>(), 2) : v.dump()) << '\n';
    }
  }
  return 0;
}

struct SynthArgs {
  std::string out;
  std::size_t samples = 200;
  std::size_t worlds = 24;
  std::size_t games = 10;
  double rate = 0.13;
  std::size_t planted = 0;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  if (a.out.empty()) throw gt::Error(gt::Errc::InvalidArgument, "--out is required");
  fs::create_directories(a.out);
  gt::session::FileObjectStore store(fs::path(a.out) / "objects");
  gt::dataset::SynthConfig cfg;
  cfg.samples = a.samples;
  cfg.worlds = a.worlds;
  cfg.ambiguity_rate = a.rate;
  cfg.planted_violations = a.planted;
  cfg.seed = a.seed;
  auto corpus = gt::dataset::synth_generate(cfg);
  for (const auto& [id, w] : corpus.worlds) {
    if (gt::dataset::put_world(store, w) != id) throw gt::Error(gt::Errc::IoError, "world id mismatch");
  }
  auto games = gt::dataset::synth_games(a.games, a.seed);
  for (const auto& [id, w] : games.targets) gt::dataset::put_world(store, w);

  gt::write_file(fs::path(a.out) / "samples.jsonl", gt::dataset::samples_to_jsonl(corpus.samples));
  gt::write_file(fs::path(a.out) / "games.jsonl", gt::dataset::games_to_jsonl(games.games));
  gt::write_file(fs::path(a.out) / "pool.jsonl", gt::clarify::pool_to_jsonl(gt::dataset::synth_question_pool()));
  Json expected;
  expected["single"] = Json::parse(gt::dataset::stats_to_json(corpus.expected_stats));
  expected["multi"] = Json::parse(gt::dataset::stats_to_json(games.expected_stats));
  expected["expected_ambiguous"] = corpus.expected_ambiguous;
  Json planted = Json::object();
  for (const auto& [id, reason] : corpus.planted) planted[id] = gt::dataset::drop_reason_name(reason);
  expected["planted"] = planted;
  gt::write_file(fs::path(a.out) / "expected.json", expected.dump(2) + "\n");

  if (g.json()) {
    emit({{"samples", corpus.samples.size()}, {"worlds", corpus.worlds.size()}, {"games", games.games.size()}});
  } else {
    std::cout << "samples " << corpus.samples.size() << "\nworlds " << corpus.worlds.size() << "\ngames "
              << games.games.size() << "\nout " << a.out << '\n';
  }
  return 0;
}

struct NeedArgs {
  std::string input;
  std::string worlds;
  std::string model;
  bool prefix = false;
  std::uint64_t seed = 1;
  int epochs = gt::clarify::NeedClassifierConfig{}.max_epochs;
};

std::vector<gt::clarify::LabeledInstruction> labeled(const std::vector<gt::dataset::SingleTurnSample>& samples) {
  std::vector<gt::clarify::LabeledInstruction> out;
  for (const auto& s : samples) out.push_back(gt::dataset::to_labeled(s));
  return out;
}

int cmd_need_train(const NeedArgs& a) {
  auto samples = load_samples_reporting(a.input);
  auto worlds = catalog_for(samples, a.worlds);
  gt::clarify::NeedClassifierConfig cfg;
  cfg.use_world_prefix = a.prefix;
  cfg.seed = a.seed;
  cfg.max_epochs = a.epochs;
  auto items = labeled(samples);
  auto model = gt::clarify::NeedClassifier::train(items, worlds, cfg);
  model.to_checkpoint().save(a.model);
  const double f1 = gt::clarify::evaluate_need(model, items, worlds);
  if (g.json()) {
    emit({{"epochs", model.epochs_run()}, {"train_f1", f1}, {"model", a.model}});
  } else {
    std::cout << "epochs " << model.epochs_run() << "\ntrain_f1 " << fixed(f1) << '\n';
  }
  return 0;
}

int cmd_need_eval(const NeedArgs& a) {
  auto model = gt::clarify::NeedClassifier::from_checkpoint(gt::Checkpoint::load(a.model));
  auto samples = load_samples_reporting(a.input);
  auto worlds = catalog_for(samples, a.worlds);
  const double f1 = gt::clarify::evaluate_need(model, labeled(samples), worlds);
  if (g.json()) {
    emit({{"f1", f1}, {"items", samples.size()}});
  } else {
    std::cout << "f1 " << fixed(f1) << '\n';
  }
  return 0;
}

struct RankArgs {
  std::string method = "bm25";
  std::string postfilter = "off";
  int k = 20;
  std::string input;
  std::string pool;
  std::string worlds;
  std::string model;
  std::string save_model;
  double train_fraction = 0.0;
  int steps = 150;
  std::uint64_t seed = 1;
};

int cmd_rank(const RankArgs& a) {
  auto samples = load_samples_reporting(a.input);
  auto worlds = catalog_for(samples, a.worlds);
  auto pool = gt::clarify::parse_pool(gt::read_file(a.pool));
  auto queries = gt::clarify::ranking_queries(samples, pool);
  auto split = gt::clarify::split_items(queries, a.train_fraction, a.seed);
  gt::clarify::RankingOptions opts;
  opts.postfilter = parse_postfilter(a.postfilter);
  opts.k = a.k;
  if (split.test.empty()) throw gt::Error(gt::Errc::EmptyInput, "no evaluation queries");

  double mrr = 0.0;
  if (a.method == "bm25") {
    mrr = gt::clarify::evaluate_bm25(split.test, pool, worlds, opts);
  } else {
    std::optional<gt::clarify::DualEncoder> model;
    if (!a.model.empty()) {
      model = gt::clarify::DualEncoder::from_checkpoint(gt::Checkpoint::load(a.model));
    } else {
      if (split.train.empty()) {
        throw gt::Error(gt::Errc::InvalidArgument, "dual ranking needs --model or --train-fraction > 0");
      }
      gt::clarify::DualEncoderConfig cfg;
      cfg.steps = a.steps;
      cfg.seed = a.seed;
      model = gt::clarify::DualEncoder::train(gt::clarify::dual_examples(split.train, worlds), pool, cfg);
    }
    if (!a.save_model.empty()) model->to_checkpoint().save(a.save_model);
    mrr = gt::clarify::evaluate_dual(*model, split.test, pool, worlds, opts);
  }
  if (g.json()) {
    emit({{"method", a.method}, {"k", a.k}, {"queries", split.test.size()}, {"mrr", mrr}});
  } else {
    std::cout << "queries " << split.test.size() << "\nmrr@" << a.k << ' ' << fixed(mrr, 6) << '\n';
  }
  return 0;
}

struct FusionArgs {
  std::size_t samples = 32;
  int steps = 200;
  std::uint64_t seed = 7;
  std::string model;
  std::string world;
  std::string dialogue;
};

int cmd_fusion_train(const FusionArgs& a) {
  auto data = gt::dataset::synth_dialogues(a.samples, a.seed);
  std::vector<std::string> texts;
  for (const auto& ex : data) texts.push_back(gt::fusion::dialogue_of(ex).render());
  gt::fusion::FusionConfig cfg;
  cfg.seed = a.seed;
  auto vocab = gt::fusion::Vocabulary::build(texts, static_cast<std::size_t>(cfg.vocab_size));
  auto examples = gt::fusion::make_examples(data, vocab);
  gt::fusion::FusionModel model(cfg);
  const double initial = model.loss(examples);
  double last = initial;
  for (int s = 0; s < a.steps; ++s) last = model.backward_and_step(examples);
  const double final_loss = model.loss(examples);
  if (!a.model.empty()) model.to_checkpoint(vocab).save(a.model);
  if (g.json()) {
    emit({{"initial_loss", initial}, {"final_loss", final_loss}, {"last_step_loss", last}, {"steps", a.steps}});
  } else {
    std::cout << "initial_loss " << fixed(initial, 6) << "\nfinal_loss " << fixed(final_loss, 6) << '\n';
  }
  return 0;
}

int cmd_fusion_predict(const FusionArgs& a) {
  auto [model, vocab] = gt::fusion::FusionModel::from_checkpoint(gt::Checkpoint::load(a.model));
  const double p = model.forward(gt::fusion::one_hot_encode(read_world(a.world)), vocab.encode(a.dialogue));
  if (g.json()) {
    emit({{"probability", p}});
  } else {
    std::cout << "probability " << fixed(p, 6) << '\n';
  }
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::size_t min_words = 3;
};

int cmd_serve(const ServeArgs& a) {
  const fs::path root = a.data_dir.empty() ? fs::path(default_data_dir()) : fs::path(a.data_dir);
  auto objects = std::make_shared<gt::session::FileObjectStore>(root / "objects");
  auto tables = std::make_shared<gt::session::JournalTablesStore>(root / "tables.jsonl");
  gt::session::SessionConfig cfg;
  cfg.clean.min_words = a.min_words;
  gt::session::SessionService service(tables, objects, cfg);
  gt::session::HttpServer server(service);
  if (!server.bind(a.host, a.port)) throw gt::Error(gt::Errc::IoError, "cannot bind " + a.host + ":" + std::to_string(a.port));
  std::cerr << "serving on " << a.host << ':' << a.port << " (data " << root.string() << ")\n";
  return server.serve() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridtalk: voxel building, corpora and clarification baselines"};
  app.require_subcommand(1);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json-lines"}));

  std::function<int()> run;

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "Replay an action log and print the final digest");
  replay->add_option("--log", log_path, "Action log (JSON lines)")->required()->check(CLI::ExistingFile);
  replay->callback([&] { run = [&] { return cmd_replay(log_path); }; });

  std::string world_path;
  bool state_line = false;
  std::uint64_t seed = 0;
  auto* verbalize = app.add_subcommand("verbalize", "Describe a world level by level");
  verbalize->add_option("--world", world_path, "World file")->required()->check(CLI::ExistingFile);
  verbalize->add_flag("--state-line", state_line, "Print the one-colour state line instead");
  verbalize->add_option("--seed", seed, "Seed for the state line colour");
  verbalize->callback([&] { run = [&] { return cmd_verbalize(world_path, state_line, seed); }; });

  int tall_above = 3;
  auto* classify = app.add_subcommand("classify-structure", "Label a structure flat/flying/diagonal/tricky/tall");
  classify->alias("classify");
  classify->add_option("--world", world_path, "World file")->required()->check(CLI::ExistingFile);
  classify->add_option("--tall-above", tall_above, "Highest level that is not tall");
  classify->callback([&] { run = [&] { return cmd_classify(world_path, tall_above); }; });

  std::string target_path;
  auto* match = app.add_subcommand("match", "Compare a built world with a target");
  match->add_option("--world", world_path, "Built world file")->required()->check(CLI::ExistingFile);
  match->add_option("--target", target_path, "Target world file")->required()->check(CLI::ExistingFile);
  match->callback([&] { run = [&] { return cmd_match(world_path, target_path); }; });

  std::string kind = "single";
  std::string input;
  std::string output;
  std::string field_map;
  std::size_t min_words = 3;
  auto* dataset = app.add_subcommand("dataset", "Corpus loading, cleaning, statistics and synthesis");
  dataset->require_subcommand(1);
  auto* dload = dataset->add_subcommand("load", "Validate a corpus file");
  dload->add_option("--kind", kind, "multi or single")->check(CLI::IsMember({"multi", "single"}));
  dload->add_option("--input", input, "Corpus file")->required()->check(CLI::ExistingFile);
  dload->add_option("--field-map", field_map, "JSON object mapping canonical to external field names");
  dload->callback([&] { run = [&] { return cmd_dataset_load(kind, input, field_map); }; });

  auto* dclean = dataset->add_subcommand("clean", "Drop short, non-English, duplicate or question-less samples");
  dclean->add_option("--input", input, "Single-turn corpus")->required()->check(CLI::ExistingFile);
  dclean->add_option("--output", output, "Where to write the kept samples");
  dclean->add_option("--min-words", min_words, "Shortest acceptable instruction");
  dclean->callback([&] { run = [&] { return cmd_dataset_clean(input, output, min_words); }; });

  auto* dstats = dataset->add_subcommand("stats", "Summarize a corpus");
  dstats->add_option("--kind", kind, "multi or single")->check(CLI::IsMember({"multi", "single"}));
  dstats->add_option("--input", input, "Corpus file")->required()->check(CLI::ExistingFile);
  dstats->add_option("--field-map", field_map, "JSON object mapping canonical to external field names");
  dstats->callback([&] { run = [&] { return cmd_dataset_stats(kind, input, field_map); }; });

  SynthArgs synth_args;
  auto add_synth_options = [&](CLI::App* sub) {
    sub->add_option("--out", synth_args.out, "Output directory")->required();
    sub->add_option("--samples", synth_args.samples, "Single-turn samples");
    sub->add_option("--worlds", synth_args.worlds, "Distinct starting worlds");
    sub->add_option("--games", synth_args.games, "Multi-turn games");
    sub->add_option("--rate", synth_args.rate, "Ambiguity rate")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--planted", synth_args.planted, "Records clean must drop");
    sub->add_option("--seed", synth_args.seed, "Generator seed");
    sub->callback([&] { run = [&] { return cmd_synth(synth_args); }; });
  };
  add_synth_options(dataset->add_subcommand("synth", "Generate a synthetic corpus"));
  add_synth_options(app.add_subcommand("synth", "Generate a synthetic corpus (same as dataset synth)"));

  NeedArgs need;
  RankArgs rank;
  const std::string objects_default = (fs::path(default_data_dir()) / "objects").string();
  need.worlds = objects_default;
  rank.worlds = objects_default;
  auto* clarify = app.add_subcommand("clarify", "Clarification need and question ranking baselines");
  clarify->require_subcommand(1);
  auto* ntrain = clarify->add_subcommand("need-train", "Train the clarification-need classifier");
  auto* neval = clarify->add_subcommand("need-eval", "Evaluate a need classifier (F1)");
  for (auto* sub : {ntrain, neval}) {
    sub->add_option("--input", need.input, "Single-turn corpus")->required()->check(CLI::ExistingFile);
    sub->add_option("--worlds", need.worlds, "Object store holding the referenced worlds");
    sub->add_option("--model", need.model, "Model checkpoint")->required();
  }
  ntrain->add_flag("--world-prefix", need.prefix, "Prefix instructions with the world description");
  ntrain->add_option("--seed", need.seed, "Training seed");
  ntrain->add_option("--epochs", need.epochs, "Maximum epochs");
  ntrain->callback([&] { run = [&] { return cmd_need_train(need); }; });
  neval->callback([&] { run = [&] { return cmd_need_eval(need); }; });

  auto* crank = clarify->add_subcommand("rank", "Rank clarifying questions and report MRR@k");
  crank->add_option("--method", rank.method, "bm25 or dual")->check(CLI::IsMember({"bm25", "dual"}));
  crank->add_option("--postfilter", rank.postfilter, "Colour post-filter")->check(CLI::IsMember({"on", "off", "strict"}));
  crank->add_option("--k", rank.k, "MRR cut-off")->check(CLI::PositiveNumber);
  crank->add_option("--input", rank.input, "Single-turn corpus")->required()->check(CLI::ExistingFile);
  crank->add_option("--pool", rank.pool, "Question pool (JSON lines)")->required()->check(CLI::ExistingFile);
  crank->add_option("--worlds", rank.worlds, "Object store holding the referenced worlds");
  crank->add_option("--model", rank.model, "Trained dual-encoder checkpoint");
  crank->add_option("--save-model", rank.save_model, "Save the trained dual encoder here");
  crank->add_option("--train-fraction", rank.train_fraction, "Share of queries used for training")
      ->check(CLI::Range(0.0, 1.0));
  crank->add_option("--steps", rank.steps, "Dual-encoder training steps");
  crank->add_option("--seed", rank.seed, "Split and training seed");
  crank->callback([&] { run = [&] { return cmd_rank(rank); }; });

  FusionArgs fusion_args;
  auto* fusion = app.add_subcommand("fusion", "Grid/text fusion network");
  fusion->require_subcommand(1);
  auto* ftrain = fusion->add_subcommand("train", "Train on synthetic dialogues");
  ftrain->add_option("--samples", fusion_args.samples, "Synthetic dialogues");
  ftrain->add_option("--steps", fusion_args.steps, "Gradient steps");
  ftrain->add_option("--seed", fusion_args.seed, "Seed");
  ftrain->add_option("--model", fusion_args.model, "Checkpoint to write");
  ftrain->callback([&] { run = [&] { return cmd_fusion_train(fusion_args); }; });
  auto* fpredict = fusion->add_subcommand("predict", "Clarification-need probability for one input");
  fpredict->add_option("--model", fusion_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  fpredict->add_option("--world", fusion_args.world, "World file")->required()->check(CLI::ExistingFile);
  fpredict->add_option("--dialogue", fusion_args.dialogue, "Rendered dialogue text")->required();
  fpredict->callback([&] { run = [&] { return cmd_fusion_predict(fusion_args); }; });

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the session service over HTTP");
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--data-dir", serve_args.data_dir, "Data directory (default $GRIDTALK_DATA_DIR)");
  serve->add_option("--min-words", serve_args.min_words, "Shortest acceptable instruction");
  serve->callback([&] { run = [&] { return cmd_serve(serve_args); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run ? run() : 2;
  } catch (const gt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
