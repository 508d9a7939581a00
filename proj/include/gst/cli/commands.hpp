#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gst/server/http_server.hpp"
#include "gst/train/ablate.hpp"

namespace gst::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "1.0.0";

// data.* keys describe the synthetic world a corpus came from. They travel
// from gen-data's manifest into checkpoint metadata, so later commands can
// rebuild the same templates and scene streams.
struct DataSpec {
  std::uint64_t seed = 1;
  std::size_t games = 5000;
  std::size_t valid = 1000;
  std::size_t test = 1000;
  int max_rounds = 5;
  int min_objects = 3;
  int max_objects = 10;

  SceneConfig Scene() const {
    SceneConfig c;
    c.min_objects = min_objects;
    c.max_objects = max_objects;
    c.Validate();
    return c;
  }

  KeyValues ToKeyValues() const {
    KeyValues kv;
    kv.SetNumber("data.seed", seed);
    kv.SetNumber("data.games", games);
    kv.SetNumber("data.valid", valid);
    kv.SetNumber("data.test", test);
    kv.SetNumber("data.max_rounds", max_rounds);
    kv.SetNumber("data.min_objects", min_objects);
    kv.SetNumber("data.max_objects", max_objects);
    return kv;
  }

  static DataSpec FromKeyValues(const KeyValues& kv) {
    DataSpec d;
    d.seed = static_cast<std::uint64_t>(kv.GetInt("data.seed", static_cast<long long>(d.seed)));
    d.games = static_cast<std::size_t>(kv.GetInt("data.games", static_cast<long long>(d.games)));
    d.valid = static_cast<std::size_t>(kv.GetInt("data.valid", static_cast<long long>(d.valid)));
    d.test = static_cast<std::size_t>(kv.GetInt("data.test", static_cast<long long>(d.test)));
    d.max_rounds = static_cast<int>(kv.GetInt("data.max_rounds", d.max_rounds));
    d.min_objects = static_cast<int>(kv.GetInt("data.min_objects", d.min_objects));
    d.max_objects = static_cast<int>(kv.GetInt("data.max_objects", d.max_objects));
    d.Scene();
    return d;
  }
};

inline DataSpec ReadDataSpec(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.txt";
  if (!fs::exists(manifest)) throw NotFoundError("no manifest.txt in data directory " + dir.string());
  return DataSpec::FromKeyValues(KeyValues::Load(manifest.string()));
}

inline ModelConfig DefaultModelConfig(const TemplateSet& t) {
  ModelConfig c;
  c.num_categories = t.config().num_categories;
  c.vocab_size = static_cast<int>(t.vocabulary().size());
  c.answer_tokens[0] = t.vocabulary().Id("yes");
  c.answer_tokens[1] = t.vocabulary().Id("no");
  c.answer_tokens[2] = t.vocabulary().Id("n/a");
  return c;
}

// Layers `over` onto `base` and rejects keys no section knows about.
// run.*, artifact.* and checkpoint.* are skipped so a manifest can be fed
// back in as a config file.
inline KeyValues ResolveKeys(const KeyValues& base, const KeyValues& over) {
  KeyValues known = base;
  for (const char* k : TrainConfig::kKeys) {
    if (!known.Has(k)) known.Set(k, "");
  }
  KeyValues out = base;
  for (const auto& [k, v] : over.values()) {
    if (k.rfind("run.", 0) == 0 || k.rfind("artifact.", 0) == 0 || k.rfind("checkpoint.", 0) == 0) {
      continue;
    }
    if (!known.Has(k)) throw ConfigError("unknown config key '" + k + "'");
    out.Set(k, v);
  }
  return out;
}

inline KeyValues DefaultKeys(const TemplateSet& t, TrainPhase phase) {
  KeyValues kv = DefaultModelConfig(t).ToKeyValues();
  kv.Merge(TrackerOptionsToKeyValues(TrackerOptions{}));
  kv.Merge(TrainConfig::ForPhase(phase).ToKeyValues());
  return kv;
}

inline void WriteManifest(const fs::path& dir, const std::string& command,
                          const std::vector<std::string>& argv, const KeyValues& config,
                          const std::vector<fs::path>& artifacts) {
  KeyValues kv = config;
  kv.Set("run.command", command);
  std::string joined;
  for (const auto& a : argv) joined += (joined.empty() ? "" : " ") + a;
  kv.Set("run.argv", joined);
  kv.Set("run.tool_version", kToolVersion);
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    kv.Set("artifact." + std::to_string(i), artifacts[i].string());
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.txt").string());
  out << "# gst run manifest\n" << kv.ToString();
}

inline fs::path CheckpointPath(const std::string& arg) {
  fs::path p(arg);
  if (fs::is_directory(p)) p /= "model.ckpt";
  if (!fs::exists(p)) throw NotFoundError("checkpoint " + p.string() + " not found");
  return p;
}

inline void EnsureDir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

inline std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flags that map onto config keys. Unset flags leave the file / default
// value in place.
struct KeyFlags {
  std::deque<std::pair<std::string, std::optional<std::string>>> flags;

  void Add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    flags.emplace_back(key, std::nullopt);
    app->add_option(flag, flags.back().second, help);
  }
  void Apply(KeyValues& kv) const {
    for (const auto& [key, value] : flags) {
      if (value) kv.Set(key, *value);
    }
  }
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string init;
  std::optional<int> dim;
  std::optional<int> hidden;
  KeyFlags keys;
};

inline void AddTrainFlags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--config", a.config, "key = value config file");
  cmd->add_option("--data", a.data, "directory written by gen-data")->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--dim", a.dim, "set every embedding and LSTM width");
  cmd->add_option("--hidden", a.hidden, "scorer hidden width");
  a.keys.Add(cmd, "--seed", "train.seed", "training seed");
  a.keys.Add(cmd, "--jobs", "train.jobs", "worker threads");
  a.keys.Add(cmd, "--epochs", "train.epochs", "epochs");
  a.keys.Add(cmd, "--lr", "train.lr", "learning rate");
  a.keys.Add(cmd, "--batch-size", "train.batch_size", "mini-batch size");
  a.keys.Add(cmd, "--patience", "train.patience", "early-stopping patience (0 disables)");
  a.keys.Add(cmd, "--alpha", "loss.alpha", "ES+PS weight");
  a.keys.Add(cmd, "--c", "loss.c", "IS offset, > 1");
  a.keys.Add(cmd, "--loss", "loss.variant", "full | no-es-ps | no-is | ps-only");
  a.keys.Add(cmd, "--concat", "model.concat", "symmetric | product | plain");
  a.keys.Add(cmd, "--model", "model.kind", "gst | baseline");
}

inline KeyValues ResolveTrainKeys(const TrainArgs& a, const TemplateSet& t, TrainPhase phase,
                                  const KeyValues& base) {
  KeyValues over = a.config.empty() ? KeyValues{} : KeyValues::Load(a.config);
  a.keys.Apply(over);
  if (a.dim) {
    for (const char* k : {"model.category_dim", "model.object_dim", "model.word_dim",
                          "model.lstm_dim", "model.answer_dim"}) {
      over.SetNumber(k, *a.dim);
    }
  }
  if (a.hidden) over.SetNumber("model.scorer_hidden", *a.hidden);
  KeyValues defaults = DefaultKeys(t, phase);
  defaults.Merge(base);
  return ResolveKeys(defaults, over);
}

inline int TrainSlCommand(const TrainArgs& a, const std::vector<std::string>& argv,
                          std::ostream& out) {
  const DataSpec data = ReadDataSpec(a.data);
  const TemplateSet templates(data.Scene());
  KeyValues base = data.ToKeyValues();
  base.SetNumber("train.data_seed", data.seed);
  base.SetNumber("train.rl_train_scenes", data.games);
  const KeyValues kv = ResolveTrainKeys(a, templates, TrainPhase::kSl, base);
  const TrainConfig cfg = TrainConfig::FromKeyValues(kv, TrainPhase::kSl);
  if (cfg.phase != TrainPhase::kSl) throw ConfigError("train-sl needs train.phase = sl");
  const ModelConfig mc = ModelConfig::FromKeyValues(kv);
  const TrackerOptions to = TrackerOptionsFromKeyValues(kv);
  const auto train = ReadCorpus((fs::path(a.data) / "train.jsonl").string());
  const auto valid = ReadCorpus((fs::path(a.data) / "valid.jsonl").string());
  EnsureDir(a.out);
  const fs::path log = fs::path(a.out) / "metrics.log";
  std::ofstream log_out(log, std::ios::binary | std::ios::trunc);
  GuesserModel<double> init = a.init.empty() ? GuesserModel<double>(mc, cfg.seed, to)
                                             : LoadModel<double>(CheckpointPath(a.init).string()).model;
  const auto result = TrainSl(std::move(init), train, valid, cfg, [&](const EpochMetrics& m) {
    log_out << m.ToLine() << "\n";
    log_out.flush();
    out << m.ToLine() << "\n";
  });
  KeyValues meta = kv;
  meta.Merge(result.model.MetaKeyValues());
  meta.SetNumber("checkpoint.epoch", result.best_epoch);
  meta.SetNumber("checkpoint.valid_error", result.best_valid_error);
  const fs::path ckpt = fs::path(a.out) / "model.ckpt";
  SaveModel(ckpt.string(), result.model, meta);
  WriteManifest(a.out, "train-sl", argv, kv, {ckpt, log});
  out << "checkpoint " << ckpt.string() << " epoch=" << result.best_epoch
      << " valid_error=" << result.best_valid_error << "\n";
  return 0;
}

inline int TrainRlCommand(const TrainArgs& a, const std::vector<std::string>& argv,
                          std::ostream& out, std::ostream& err) {
  if (a.init.empty()) throw ConfigError("train-rl needs --init <sl checkpoint>");
  auto loaded = LoadModel<double>(CheckpointPath(a.init).string());
  const DataSpec data = ReadDataSpec(a.data);
  const TemplateSet templates(data.Scene());
  // The checkpoint's architecture wins; training keys restart from RL defaults.
  KeyValues base = loaded.model.MetaKeyValues();
  base.Merge(data.ToKeyValues());
  base.SetNumber("train.data_seed", data.seed);
  base.SetNumber("train.rl_train_scenes", data.games);
  const KeyValues kv = ResolveTrainKeys(a, templates, TrainPhase::kRl, base);
  TrainConfig cfg = TrainConfig::FromKeyValues(kv, TrainPhase::kRl);
  if (cfg.phase != TrainPhase::kRl) throw ConfigError("train-rl needs train.phase = rl");
  const auto valid = ReadCorpus((fs::path(a.data) / "valid.jsonl").string());
  EnsureDir(a.out);
  const fs::path log = fs::path(a.out) / "metrics.log";
  std::ofstream log_out(log, std::ios::binary | std::ios::trunc);
  const auto result = TrainRl(std::move(loaded.model), templates, valid, cfg,
                              [&](const EpochMetrics& m) {
                                log_out << m.ToLine() << "\n";
                                log_out.flush();
                                out << m.ToLine() << "\n";
                              },
                              &err);
  KeyValues meta = kv;
  meta.Merge(result.model.MetaKeyValues());
  meta.SetNumber("checkpoint.epoch", result.best_epoch);
  meta.SetNumber("checkpoint.valid_error", result.best_valid_error);
  const fs::path ckpt = fs::path(a.out) / "model.ckpt";
  SaveModel(ckpt.string(), result.model, meta);
  WriteManifest(a.out, "train-rl", argv, kv, {ckpt, log});
  out << "checkpoint " << ckpt.string() << "\n";
  return 0;
}

inline std::string BeliefCurveCsv(const std::vector<double>& all, const std::vector<double>& won) {
  std::ostringstream os;
  os.precision(10);
  os << "round,all,successful\n";
  for (std::size_t j = 0; j < std::max(all.size(), won.size()); ++j) {
    os << j << ",";
    if (j < all.size()) os << all[j];
    os << ",";
    if (j < won.size()) os << won[j];
    os << "\n";
  }
  return os.str();
}

struct EvalArgs {
  std::string ckpt;
  std::string split = "newgame";
  std::string mode = "greedy";
  int n = 1000;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string dialogues;
  std::string report;
  std::string traces;
  std::string curve;
  std::optional<double> stop_threshold;
};

inline int EvalCommand(const EvalArgs& a, std::ostream& out) {
  const auto loaded = LoadModel<double>(CheckpointPath(a.ckpt).string());
  const DataSpec data = DataSpec::FromKeyValues(loaded.meta);
  const TemplateSet templates(data.Scene());
  std::vector<GameRecord> records;
  EvalReport report;
  if (!a.dialogues.empty()) {
    report = GuesserOnlyError(loaded.model, ReadCorpus(a.dialogues), fs::path(a.dialogues).stem().string(),
                              a.jobs, &records);
  } else {
    EvalOptions o;
    o.split = ParseEvalSplit(a.split);
    o.mode = ParseEvalMode(a.mode);
    o.n_games = a.n;
    o.data_seed = data.seed;
    o.eval_seed = a.seed;
    o.train_scenes = data.games;
    o.max_rounds = data.max_rounds;
    o.jobs = a.jobs;
    if (a.stop_threshold) o.stop = StopPolicy::Confidence(*a.stop_threshold);
    report = Evaluate(loaded.model, templates, o, &records);
  }
  out << report.ToTable();
  const Json j = report.ToJson();
  out << j.dump() << "\n";
  if (!a.report.empty()) {
    std::ofstream f(a.report, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + a.report);
    f << j.dump() << "\n";
  }
  if (!a.traces.empty()) WriteCorpus(a.traces, records, &templates.vocabulary());
  if (!a.curve.empty()) {
    std::ofstream f(a.curve, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + a.curve);
    f << BeliefCurveCsv(BeliefCurve(records, false), BeliefCurve(records, true));
  }
  return 0;
}

// Round-by-round table of one traced game: the question and answer of each
// round followed by pi over the objects; '*' marks the target, '>' the guess.
// `exact` prints round-trippable values instead of five decimals.
inline std::string RenderTrace(const GameRecord& g, const Vocabulary& vocab, bool exact = false) {
  if (g.states.empty()) throw NotFoundError("game " + std::to_string(g.id) + " has no states");
  std::ostringstream os;
  char buf[64];
  os << "game " << g.id << "  target " << g.target << "  guess " << g.guess << "  " << g.status
     << "\n";
  os << "round  " << std::string(40, ' ');
  for (std::size_t i = 0; i < g.scene.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "  %c%c%-5zu", static_cast<int>(i) == g.target ? '*' : ' ',
                  static_cast<int>(i) == g.guess ? '>' : ' ', i);
    os << buf;
  }
  os << "\n";
  for (std::size_t j = 0; j < g.states.size(); ++j) {
    std::string label = "(prior)";
    if (j > 0 && j - 1 < g.rounds.size()) {
      label = vocab.Render(g.rounds[j - 1].question.tokens) + " " + AnswerName(g.rounds[j - 1].answer);
    }
    if (label.size() > 40) label = label.substr(0, 37) + "...";
    std::snprintf(buf, sizeof(buf), "%-5zu  %-40s", j, label.c_str());
    os << buf;
    for (double p : g.states[j]) {
      std::snprintf(buf, sizeof(buf), exact ? "  %.17g" : "  %.5f", p);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline int InspectCommand(const std::string& trace, std::optional<std::uint64_t> id, bool exact,
                          std::ostream& out) {
  const auto games = ReadCorpus(trace);
  const TemplateSet templates{SceneConfig{}};
  for (const auto& g : games) {
    if (id && g.id != *id) continue;
    out << RenderTrace(g, templates.vocabulary(), exact);
    if (id) return 0;
  }
  if (id) throw NotFoundError("game " + std::to_string(*id) + " not in " + trace);
  return 0;
}

inline int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guessing-state tracking for object-guessing dialogue games", "gst"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // gen-data
  DataSpec gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate synthetic train/valid/test corpora");
  gen_cmd->add_option("--games", gen.games, "training games");
  gen_cmd->add_option("--valid", gen.valid, "validation games");
  gen_cmd->add_option("--test", gen.test, "test games");
  gen_cmd->add_option("--seed", gen.seed, "data seed");
  gen_cmd->add_option("--max-rounds", gen.max_rounds, "rounds per dialogue");
  gen_cmd->add_option("--min-objects", gen.min_objects, "fewest objects per scene");
  gen_cmd->add_option("--max-objects", gen.max_objects, "most objects per scene");
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  TrainArgs sl, rl;
  auto* sl_cmd = app.add_subcommand("train-sl", "supervised training on a corpus");
  AddTrainFlags(sl_cmd, sl);
  sl_cmd->add_option("--init", sl.init, "start from this checkpoint");
  auto* rl_cmd = app.add_subcommand("train-rl", "self-play refinement of an SL checkpoint");
  AddTrainFlags(rl_cmd, rl);
  rl_cmd->add_option("--init", rl.init, "SL checkpoint")->required();
  rl.keys.Add(rl_cmd, "--questions", "train.rl_questions", "greedy | random | scripted");
  rl.keys.Add(rl_cmd, "--batches", "train.rl_batches_per_epoch", "batches per epoch");
  rl.keys.Add(rl_cmd, "--momentum", "train.momentum", "SGD momentum");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "play evaluation games or replay a corpus");
  eval_cmd->add_option("--ckpt", ev.ckpt, "checkpoint file or training output directory")->required();
  eval_cmd->add_option("--split", ev.split, "newgame | newobject");
  eval_cmd->add_option("--mode", ev.mode, "greedy | sample");
  eval_cmd->add_option("--n", ev.n, "games to play");
  eval_cmd->add_option("--seed", ev.seed, "evaluation seed");
  eval_cmd->add_option("--jobs", ev.jobs, "worker threads");
  eval_cmd->add_option("--dialogues", ev.dialogues, "replay this corpus instead (guesser-only error)");
  eval_cmd->add_option("--report", ev.report, "write the JSON report here");
  eval_cmd->add_option("--traces", ev.traces, "write played games with states here");
  eval_cmd->add_option("--curve", ev.curve, "write the belief curve CSV here");
  eval_cmd->add_option("--stop-threshold", ev.stop_threshold, "stop once max belief reaches this");

  TrainArgs ab;
  std::string ab_losses = "full,no-es-ps,no-is", ab_concats = "symmetric,product,plain",
              ab_cs = "1.1,1.5,2.0", ab_seeds = "1,2,3";
  int ab_n = 1000;
  auto* ab_cmd = app.add_subcommand("ablate", "grid of SL runs over losses, concat variants and c");
  AddTrainFlags(ab_cmd, ab);
  ab_cmd->add_option("--losses", ab_losses, "comma-separated loss variants");
  ab_cmd->add_option("--concats", ab_concats, "comma-separated concat variants");
  ab_cmd->add_option("--cs", ab_cs, "comma-separated IS offsets");
  ab_cmd->add_option("--seeds", ab_seeds, "comma-separated seeds");
  ab_cmd->add_option("--n", ab_n, "NewGame evaluation games per run");

  std::string trace;
  std::optional<std::uint64_t> game_id;
  bool inspect_exact = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "render a traced game round by round");
  inspect_cmd->add_option("--trace", trace, "trace file written by eval --traces")->required();
  inspect_cmd->add_option("--game", game_id, "game id (default: every game)");
  inspect_cmd->add_flag("--exact", inspect_exact, "print full-precision beliefs");

  std::string serve_ckpt, serve_host = "127.0.0.1", serve_static;
  int serve_port = 8080;
  std::optional<double> serve_stop;
  std::size_t serve_sessions = 256;
  int serve_idle = 1800;
  std::uint64_t serve_seed = 0;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP play server with a human Oracle");
  serve_cmd->add_option("--checkpoint", serve_ckpt, "checkpoint file or directory")->required();
  serve_cmd->add_option("--port", serve_port, "listen port");
  serve_cmd->add_option("--host", serve_host, "listen address");
  serve_cmd->add_option("--stop-threshold", serve_stop, "stop once max belief reaches this");
  serve_cmd->add_option("--static", serve_static, "directory served at /");
  serve_cmd->add_option("--max-sessions", serve_sessions, "concurrent session cap");
  serve_cmd->add_option("--idle-timeout", serve_idle, "seconds before an idle session expires");
  serve_cmd->add_option("--seed", serve_seed, "scene seed for creates without one");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) {
      const TemplateSet templates(gen.Scene());
      if (gen.max_rounds < 1) throw ConfigError("max-rounds must be >= 1");
      EnsureDir(gen_out);
      const fs::path dir(gen_out);
      const auto* vocab = &templates.vocabulary();
      WriteCorpus((dir / "train.jsonl").string(),
                  GenerateCorpus(templates, gen.games, gen.seed, SceneStream::kTrain, gen.max_rounds), vocab);
      WriteCorpus((dir / "valid.jsonl").string(),
                  GenerateCorpus(templates, gen.valid, gen.seed, SceneStream::kValid, gen.max_rounds), vocab);
      WriteCorpus((dir / "test.jsonl").string(),
                  GenerateCorpus(templates, gen.test, gen.seed, SceneStream::kTest, gen.max_rounds), vocab);
      {
        std::ofstream v(dir / "vocab.txt", std::ios::binary | std::ios::trunc);
        for (std::size_t i = 0; i < templates.vocabulary().size(); ++i) {
          v << templates.vocabulary().Word(static_cast<int>(i)) << "\n";
        }
      }
      WriteManifest(dir, "gen-data", args, gen.ToKeyValues(),
                    {dir / "train.jsonl", dir / "valid.jsonl", dir / "test.jsonl", dir / "vocab.txt"});
      out << "wrote " << gen.games << "/" << gen.valid << "/" << gen.test << " games to " << gen_out << "\n";
      return 0;
    }
    if (*sl_cmd) return TrainSlCommand(sl, args, out);
    if (*rl_cmd) return TrainRlCommand(rl, args, out, err);
    if (*eval_cmd) return EvalCommand(ev, out);
    if (*inspect_cmd) return InspectCommand(trace, game_id, inspect_exact, out);
    if (*ab_cmd) {
      const DataSpec data = ReadDataSpec(ab.data);
      const TemplateSet templates(data.Scene());
      KeyValues base = data.ToKeyValues();
      const KeyValues kv = ResolveTrainKeys(ab, templates, TrainPhase::kSl, base);
      const TrainConfig cfg = TrainConfig::FromKeyValues(kv, TrainPhase::kSl);
      AblationGrid grid;
      grid.variants.clear();
      grid.concats.clear();
      grid.cs.clear();
      grid.seeds.clear();
      for (const auto& s : SplitList(ab_losses)) grid.variants.push_back(ParseLossVariant(s));
      for (const auto& s : SplitList(ab_concats)) grid.concats.push_back(ParseConcatVariant(s));
      for (const auto& s : SplitList(ab_cs)) grid.cs.push_back(KeyValues::Parse("v=" + s).GetDouble("v", 0));
      for (const auto& s : SplitList(ab_seeds)) {
        grid.seeds.push_back(static_cast<std::uint64_t>(KeyValues::Parse("v=" + s).GetInt("v", 0)));
      }
      const auto train = ReadCorpus((fs::path(ab.data) / "train.jsonl").string());
      const auto valid = ReadCorpus((fs::path(ab.data) / "valid.jsonl").string());
      EvalOptions eo;
      eo.n_games = ab_n;
      eo.data_seed = data.seed;
      eo.train_scenes = data.games;
      eo.max_rounds = data.max_rounds;
      eo.jobs = cfg.jobs;
      EnsureDir(ab.out);
      const fs::path rows_path = fs::path(ab.out) / "ablation.jsonl";
      std::ofstream rows_out(rows_path, std::ios::binary | std::ios::trunc);
      const auto rows = Ablate<double>(grid, ModelConfig::FromKeyValues(kv), TrackerOptionsFromKeyValues(kv),
                                       cfg, templates, train, valid, eo, [&](const AblationRow& r) {
                                         rows_out << r.ToJson().dump() << "\n";
                                         rows_out.flush();
                                       });
      const std::string table = AblationTable(rows);
      std::ofstream(fs::path(ab.out) / "ablation.txt", std::ios::binary | std::ios::trunc) << table;
      out << table;
      WriteManifest(ab.out, "ablate", args, kv, {rows_path, fs::path(ab.out) / "ablation.txt"});
      return 0;
    }
    if (*serve_cmd) {
      const fs::path ckpt = CheckpointPath(serve_ckpt);
      auto loaded = LoadModel<double>(ckpt.string());
      const DataSpec data = DataSpec::FromKeyValues(loaded.meta);
      const TemplateSet templates(data.Scene());
      PlayServiceOptions o;
      o.max_sessions = serve_sessions;
      o.idle_timeout = std::chrono::seconds(serve_idle);
      o.max_rounds = data.max_rounds;
      o.seed = serve_seed;
      o.checkpoint_root = ckpt.parent_path().string();
      if (serve_stop) o.stop = StopPolicy::Confidence(*serve_stop);
      PlayService service(std::make_shared<const GuesserModel<double>>(std::move(loaded.model)),
                          templates, o);
      httplib::Server server;
      BindPlayService(server, service, serve_static);
      out << "listening on " << serve_host << ":" << serve_port << "\n";
      out.flush();
      if (!server.listen(serve_host, serve_port)) {
        throw IoError("cannot listen on " + serve_host + ":" + std::to_string(serve_port));
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.Category() << ": " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    err << "error: protocol: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace gst::cli
