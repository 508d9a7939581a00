#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gst/env/corpus.hpp"
#include "gst/model/guesser_model.hpp"
#include "gst/parallel.hpp"

namespace gst {

enum class EvalSplit { kNewObject, kNewGame };
enum class EvalMode { kGreedy, kSample };

inline std::string EvalSplitName(EvalSplit s) {
  return s == EvalSplit::kNewObject ? "newobject" : "newgame";
}
inline EvalSplit ParseEvalSplit(const std::string& s) {
  if (s == "newobject") return EvalSplit::kNewObject;
  if (s == "newgame") return EvalSplit::kNewGame;
  throw ConfigError("unknown split '" + s + "' (newobject | newgame)");
}
inline std::string EvalModeName(EvalMode m) { return m == EvalMode::kGreedy ? "greedy" : "sample"; }
inline EvalMode ParseEvalMode(const std::string& s) {
  if (s == "greedy") return EvalMode::kGreedy;
  if (s == "sample") return EvalMode::kSample;
  throw ConfigError("unknown eval mode '" + s + "' (greedy | sample)");
}

struct EvalReport {
  std::string split;
  std::string mode;
  long games = 0;
  long successes = 0;
  long errors = 0;  // games aborted with an error status
  double success_rate = 0;
  double error_rate = 0;
  double ci_low = 0;  // 95% Wilson interval on the success rate
  double ci_high = 0;
  std::vector<double> mean_target_belief;  // over all games, rounds 0..J

  Json ToJson() const {
    return {{"split", split},
            {"mode", mode},
            {"games", games},
            {"successes", successes},
            {"errors", errors},
            {"success_rate", success_rate},
            {"error_rate", error_rate},
            {"ci95", {ci_low, ci_high}},
            {"mean_target_belief", mean_target_belief}};
  }

  std::string ToTable() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-10s %-7s %7ld %9.2f%% %8.2f%%  [%.2f, %.2f]\n",
                  split.c_str(), mode.c_str(), games, 100 * success_rate, 100 * error_rate,
                  100 * ci_low, 100 * ci_high);
    return std::string("split      mode      games   success     error  ci95\n") + buf;
  }
};

inline void WilsonInterval(long successes, long n, double& lo, double& hi) {
  if (n <= 0) {
    lo = 0;
    hi = 1;
    return;
  }
  const double z = 1.959963984540054;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n)) / denom;
  lo = std::max(0.0, centre - half);
  hi = std::min(1.0, centre + half);
}

// Mean pi^(j)[target] per round. Games that ended early are padded with
// their last state. Empty when no game passes the filter.
inline std::vector<double> BeliefCurve(const std::vector<GameRecord>& games, bool successful_only) {
  std::size_t len = 0;
  for (const auto& g : games) {
    if ((!successful_only || g.success) && !g.states.empty()) len = std::max(len, g.states.size());
  }
  std::vector<double> sum(len, 0.0);
  long count = 0;
  for (const auto& g : games) {
    if ((successful_only && !g.success) || g.states.empty()) continue;
    ++count;
    for (std::size_t j = 0; j < len; ++j) {
      const Belief& s = g.states[std::min(j, g.states.size() - 1)];
      sum[j] += s[static_cast<std::size_t>(g.target)];
    }
  }
  for (double& v : sum) v /= static_cast<double>(count);
  return sum;
}

inline EvalReport Summarize(const std::vector<GameRecord>& records, const std::string& split,
                            const std::string& mode) {
  EvalReport r;
  r.split = split;
  r.mode = mode;
  r.games = static_cast<long>(records.size());
  for (const auto& g : records) {
    r.successes += g.success ? 1 : 0;
    r.errors += g.status.rfind("error:", 0) == 0 ? 1 : 0;
  }
  if (r.games > 0) {
    r.success_rate = static_cast<double>(r.successes) / static_cast<double>(r.games);
    r.error_rate = 1 - r.success_rate;
  }
  WilsonInterval(r.successes, r.games, r.ci_low, r.ci_high);
  r.mean_target_belief = BeliefCurve(records, false);
  return r;
}

struct EvalOptions {
  EvalSplit split = EvalSplit::kNewGame;
  EvalMode mode = EvalMode::kGreedy;
  int n_games = 1000;
  std::uint64_t data_seed = 1;    // seed the corpus was generated from
  std::uint64_t eval_seed = 0;    // question sampling and sampled guesses
  std::size_t train_scenes = 5000;  // NewObject draws scenes from the first train_scenes
  int max_rounds = 5;
  StopPolicy stop;
  int jobs = 1;

  void Validate() const {
    if (n_games <= 0) throw ConfigError("n_games must be positive");
    if (train_scenes == 0) throw ConfigError("train_scenes must be positive");
    if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  }
};

using GuesserFactory = std::function<std::unique_ptr<Guesser>()>;

// Plays n games. NewObject re-targets a different object in a training
// scene; NewGame draws unseen scenes. Greedy pairs GreedySplit questions
// with the argmax guess; Sample pairs random questions with a sampled guess.
inline std::vector<GameRecord> PlayEvaluationGames(const TemplateSet& templates,
                                                   const GuesserFactory& factory,
                                                   const EvalOptions& opts) {
  opts.Validate();
  const QuestionGenerator qgen(
      templates, opts.mode == EvalMode::kGreedy ? QGenPolicy::kGreedySplit : QGenPolicy::kRandom);
  GameOptions game;
  game.max_rounds = opts.max_rounds;
  game.stop = opts.stop;
  game.guess_mode = opts.mode == EvalMode::kGreedy ? GuessMode::kArgmax : GuessMode::kSample;
  const std::uint64_t split_salt = opts.split == EvalSplit::kNewObject ? 0x0B1EC7 : 0x9A3E;
  std::vector<GameRecord> records(static_cast<std::size_t>(opts.n_games));
  const int jobs = std::max(1, opts.jobs);
  ParallelFor(static_cast<std::size_t>(jobs), jobs, [&](std::size_t w) {
    std::unique_ptr<Guesser> guesser = factory();
    for (std::size_t i = w; i < records.size(); i += static_cast<std::size_t>(jobs)) {
      Rng rng(DeriveSeed(DeriveSeed(opts.eval_seed, split_salt), i));
      std::uint64_t scene_seed;
      std::uint64_t id;
      if (opts.split == EvalSplit::kNewObject) {
        const std::uint64_t idx = i % opts.train_scenes;
        scene_seed = SceneSeed(opts.data_seed, SceneStream::kTrain, idx);
        id = static_cast<std::uint64_t>(SceneStream::kTrain) + idx;
      } else {
        scene_seed = SceneSeed(opts.data_seed, SceneStream::kNewGame, i);
        id = static_cast<std::uint64_t>(SceneStream::kNewGame) + i;
      }
      const Scene scene = GenerateScene(scene_seed, templates.config());
      std::size_t target = rng.Below(scene.size());
      if (opts.split == EvalSplit::kNewObject) {
        const std::size_t seen = CorpusTarget(scene_seed, scene.size());
        target = (seen + 1 + rng.Below(scene.size() - 1)) % scene.size();
      }
      records[i] = PlayGame(templates, scene, target, *guesser, qgen, game, rng, id);
    }
  });
  return records;
}

template <typename T>
GuesserFactory ModelGuesserFactory(const GuesserModel<T>& model) {
  return [&model] { return std::make_unique<ModelGuesser<T>>(model, false); };
}

template <typename T>
EvalReport Evaluate(const GuesserModel<T>& model, const TemplateSet& templates,
                    const EvalOptions& opts, std::vector<GameRecord>* records_out = nullptr) {
  EvalOptions o = opts;
  o.max_rounds = std::min(o.max_rounds, model.tracker_options().max_rounds);
  std::vector<GameRecord> records = PlayEvaluationGames(templates, ModelGuesserFactory(model), o);
  EvalReport r = Summarize(records, EvalSplitName(o.split), EvalModeName(o.mode));
  if (records_out) *records_out = std::move(records);
  return r;
}

// Tracker run over recorded dialogues (no self-play), argmax guess.
template <typename T>
std::vector<GameRecord> ReplayDialogues(const GuesserModel<T>& model,
                                        const std::vector<GameRecord>& corpus, int jobs = 1) {
  std::vector<GameRecord> out(corpus.size());
  ParallelFor(corpus.size(), jobs, [&](std::size_t i) {
    const GameRecord& src = corpus[i];
    GameRecord g;
    g.id = src.id;
    g.scene = src.scene;
    g.target = src.target;
    g.rounds = src.rounds;
    try {
      Tape<T> tape(&model.store(), false);
      DialogueRun<T> run = RunDialogue(model, tape, src.scene, src.rounds);
      for (const Var<T>& s : run.States()) g.states.push_back(ToBelief(s));
      g.guess = static_cast<int>(ArgmaxLowest(g.states.back()));
      g.success = g.guess == g.target;
      g.status = g.success ? "success" : "failure";
    } catch (const Error& e) {
      g.status = "error:" + e.Category();
    }
    out[i] = std::move(g);
  });
  return out;
}

template <typename T>
EvalReport GuesserOnlyError(const GuesserModel<T>& model, const std::vector<GameRecord>& corpus,
                            const std::string& name, int jobs = 1,
                            std::vector<GameRecord>* records_out = nullptr) {
  std::vector<GameRecord> records = ReplayDialogues(model, corpus, jobs);
  EvalReport r = Summarize(records, name, "dialogue");
  if (records_out) *records_out = std::move(records);
  return r;
}

}  // namespace gst
