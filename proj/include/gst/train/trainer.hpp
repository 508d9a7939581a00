#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "gst/eval/evaluate.hpp"
#include "gst/model/losses.hpp"
#include "gst/parallel.hpp"
#include "gst/train/optimizer.hpp"
#include "gst/train/train_config.hpp"

namespace gst {

struct EpochMetrics {
  int epoch = 0;
  long step = 0;
  double es = 0;
  double ps = 0;
  double is = 0;
  double total = 0;
  double success_rate = 0;  // SL: argmax on the training dialogues; RL: self-play
  double valid_error = -1;  // -1 when not evaluated this epoch
  double lr = 0;
  long games = 0;
  long contributing = 0;  // games whose gradient entered the update

  std::string ToLine() const {
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "step=%ld epoch=%d es=%.6f ps=%.6f is=%.6f total=%.6f success_rate=%.4f "
                  "valid_error=%.4f lr=%.6g games=%ld contributing=%ld",
                  step, epoch, es, ps, is, total, success_rate, valid_error, lr, games,
                  contributing);
    return buf;
  }
};

template <typename T>
struct TrainResult {
  GuesserModel<T> model;
  std::vector<EpochMetrics> history;
  int best_epoch = -1;
  double best_valid_error = 1.0;
};

struct ExampleStats {
  LossBreakdown loss;
  bool success = false;
  bool contributed = false;
};

// Gradient of one SL example, added into `sink`.
template <typename T>
ExampleStats SlExampleGradient(const GuesserModel<T>& model, const GameRecord& game,
                               const SupervisionConfig& sup, Gradients<T>& sink) {
  if (game.rounds.empty()) throw ConfigError("game " + std::to_string(game.id) + " has no rounds");
  Tape<T> tape(&model.store(), true);
  DialogueRun<T> run = RunDialogue(model, tape, game.scene, game.rounds);
  const LossTerms<T> terms = SlLoss(run.States(), game.target, sup);
  ExampleStats s;
  s.loss = Breakdown(terms, run.States(), game.target);
  const auto& last = run.States().back().value().values();
  s.success = static_cast<int>(ArgmaxLowest(std::vector<double>(last.begin(), last.end()))) ==
              game.target;
  s.contributed = true;
  tape.Backward(terms.total);
  tape.AccumulateParamGrads(sink);
  return s;
}

// Sum of per-example gradients in example order. With jobs > 1 every
// example gets its own buffer and the buffers are reduced in order, so the
// result is bit-identical to the serial sum.
template <typename T>
class BatchGradient {
 public:
  explicit BatchGradient(const ParameterStore<T>& store) : store_(&store), total_(store) {}

  template <typename ExampleFn>
  const Gradients<T>& Run(std::size_t n, int jobs, ExampleFn&& fn, std::vector<ExampleStats>& stats) {
    total_.Zero();
    stats.assign(n, {});
    if (jobs <= 1) {
      for (std::size_t i = 0; i < n; ++i) stats[i] = fn(i, total_);
      return total_;
    }
    while (buffers_.size() < n) buffers_.emplace_back(*store_);
    ParallelFor(n, jobs, [&](std::size_t i) {
      buffers_[i].Zero();
      stats[i] = fn(i, buffers_[i]);
    });
    for (std::size_t i = 0; i < n; ++i) total_.Add(buffers_[i]);
    return total_;
  }

 private:
  const ParameterStore<T>* store_;
  Gradients<T> total_;
  std::vector<Gradients<T>> buffers_;
};

inline void AccumulateEpoch(EpochMetrics& m, const std::vector<ExampleStats>& stats) {
  for (const auto& s : stats) {
    ++m.games;
    m.success_rate += s.success ? 1 : 0;
    if (!s.contributed) continue;
    ++m.contributing;
    m.es += s.loss.es;
    m.ps += s.loss.ps;
    m.is += s.loss.is;
    m.total += s.loss.total;
  }
}

inline void FinishEpoch(EpochMetrics& m) {
  if (m.games > 0) m.success_rate /= static_cast<double>(m.games);
  if (m.contributing > 0) {
    const double n = static_cast<double>(m.contributing);
    m.es /= n;
    m.ps /= n;
    m.is /= n;
    m.total /= n;
  }
}

inline std::vector<std::size_t> ShuffledOrder(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
  return order;
}

using MetricsSink = std::function<void(const EpochMetrics&)>;

// Mini-batch Adam on the supervision objective with early stopping on the
// validation guesser-only error. Returns the best-validation parameters.
template <typename T>
TrainResult<T> TrainSl(GuesserModel<T> model, const std::vector<GameRecord>& train,
                       const std::vector<GameRecord>& valid, const TrainConfig& cfg,
                       const MetricsSink& sink = {}) {
  cfg.Validate();
  if (train.empty()) throw ConfigError("empty training corpus");
  Adam<T> opt(model.store(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  BatchGradient<T> batch(model.store());
  TrainResult<T> result{model, {}, -1, 2.0};
  int since_best = 0;
  long step = 0;
  std::vector<ExampleStats> stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = ShuffledOrder(train.size(), DeriveSeed(cfg.seed, 0x5EED0000ULL + epoch));
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = cfg.lr;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t n = std::min<std::size_t>(cfg.batch_size, order.size() - b);
      const Gradients<T>& g = batch.Run(
          n, cfg.jobs,
          [&](std::size_t i, Gradients<T>& out) {
            return SlExampleGradient(model, train[order[b + i]], cfg.supervision, out);
          },
          stats);
      Gradients<T> scaled = g;
      scaled.Scale(static_cast<T>(1.0 / static_cast<double>(n)));
      opt.Step(model.mutable_store(), scaled);
      ++step;
      AccumulateEpoch(m, stats);
    }
    FinishEpoch(m);
    m.step = step;
    if (!valid.empty()) {
      m.valid_error = GuesserOnlyError(model, valid, "valid", cfg.jobs).error_rate;
      if (m.valid_error < result.best_valid_error) {
        result.best_valid_error = m.valid_error;
        result.best_epoch = epoch;
        result.model = model;
        since_best = 0;
      } else {
        ++since_best;
      }
    } else {
      result.model = model;
      result.best_epoch = epoch;
    }
    result.history.push_back(m);
    if (sink) sink(m);
    if (cfg.patience > 0 && since_best >= cfg.patience) break;
  }
  if (result.best_epoch < 0) result.model = model;
  return result;
}

// Success-filtered REINFORCE self-play with momentum SGD. Self-play games
// re-target objects of the first rl_train_scenes training scenes.
template <typename T>
TrainResult<T> TrainRl(GuesserModel<T> model, const TemplateSet& templates,
                       const std::vector<GameRecord>& valid, const TrainConfig& cfg,
                       const MetricsSink& sink = {}, std::ostream* warnings = nullptr) {
  cfg.Validate();
  MomentumSgd<T> opt(model.store(), cfg.lr, cfg.momentum);
  BatchGradient<T> batch(model.store());
  const QuestionGenerator qgen(templates, ParseQGenPolicy(cfg.rl_questions));
  GameOptions game_opts;
  game_opts.max_rounds = std::min(cfg.supervision.max_rounds, model.tracker_options().max_rounds);
  game_opts.guess_mode = GuessMode::kSample;
  game_opts.keep_states = false;
  TrainResult<T> result{model, {}, -1, 2.0};
  long step = 0;
  std::vector<ExampleStats> stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = DecayedLearningRate(cfg.lr, cfg.lr_decay, cfg.lr_decay_every, epoch);
    opt.set_lr(lr);
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    for (int b = 0; b < cfg.rl_batches_per_epoch; ++b) {
      const std::uint64_t base =
          (static_cast<std::uint64_t>(epoch) * cfg.rl_batches_per_epoch + b) * cfg.batch_size;
      const Gradients<T>& g = batch.Run(
          static_cast<std::size_t>(cfg.batch_size), cfg.jobs,
          [&](std::size_t i, Gradients<T>& out) {
            Rng rng(DeriveSeed(DeriveSeed(cfg.seed, 0x5E1F9A7ULL), base + i));
            const std::uint64_t idx = rng.Below(cfg.rl_train_scenes);
            const Scene scene =
                GenerateScene(SceneSeed(cfg.data_seed, SceneStream::kTrain, idx), templates.config());
            const std::size_t target = rng.Below(scene.size());
            ModelGuesser<T> guesser(model, true);
            const GameRecord rec = PlayGame(templates, scene, target, guesser, qgen, game_opts, rng);
            ExampleStats s;
            s.success = rec.success;
            if (rec.status.rfind("error:", 0) == 0) return s;
            const double reward = rec.success ? 1.0 : 0.0;
            if (reward == 0.0) return s;
            const auto& states = guesser.run().States();
            const LossTerms<T> terms = SlLoss(states, rec.guess, cfg.supervision);
            s.loss = Breakdown(terms, states, rec.guess);
            s.contributed = true;
            guesser.tape().Backward(RlStepLoss(states, rec.guess, reward, cfg.supervision));
            guesser.tape().AccumulateParamGrads(out);
            return s;
          },
          stats);
      Gradients<T> scaled = g;
      scaled.Scale(static_cast<T>(1.0 / cfg.batch_size));
      opt.Step(model.mutable_store(), scaled);
      ++step;
      AccumulateEpoch(m, stats);
    }
    FinishEpoch(m);
    m.step = step;
    if (m.contributing == 0 && warnings) {
      *warnings << "warning: epoch " << epoch << " had no successful self-play game\n";
    }
    const bool last = epoch + 1 == cfg.epochs;
    if (!valid.empty() && ((epoch + 1) % cfg.eval_every == 0 || last)) {
      m.valid_error = GuesserOnlyError(model, valid, "valid", cfg.jobs).error_rate;
    }
    result.history.push_back(m);
    if (sink) sink(m);
  }
  result.model = model;
  result.best_epoch = cfg.epochs - 1;
  if (!result.history.empty()) result.best_valid_error = result.history.back().valid_error;
  return result;
}

}  // namespace gst
