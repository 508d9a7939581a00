#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gst/train/ablate.hpp"
#include "support/fixtures.hpp"

namespace gst {
namespace {

using testing::DefaultTemplates;
using testing::SmallConfig;

const TemplateSet& ToyTemplates() {
  static const TemplateSet t = [] {
    SceneConfig c;
    c.min_objects = 3;
    c.max_objects = 5;
    return TemplateSet{c};
  }();
  return t;
}

std::vector<GameRecord> ToyCorpus(std::size_t n, SceneStream stream = SceneStream::kTrain) {
  return GenerateCorpus(ToyTemplates(), n, 11, stream, 5);
}

TrainConfig QuickConfig() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 16;
  c.lr = 3e-3;
  c.patience = 0;
  return c;
}

bool SameStore(const ParameterStore<double>& a, const ParameterStore<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.Value(i).values() != b.Value(i).values()) return false;
  }
  return true;
}

TEST(Optimizer, DecayedLearningRate) {
  EXPECT_DOUBLE_EQ(DecayedLearningRate(1e-3, 0.99, 25, 0), 1e-3);
  EXPECT_DOUBLE_EQ(DecayedLearningRate(1e-3, 0.99, 25, 24), 1e-3);
  EXPECT_NEAR(DecayedLearningRate(1e-3, 0.99, 25, 50), 1e-3 * 0.99 * 0.99, 1e-18);
  EXPECT_THROW(DecayedLearningRate(1e-3, 0.99, 0, 1), ConfigError);
}

TEST(Optimizer, ZeroGradientLeavesParameters) {
  GuesserModel<double> model(SmallConfig(4, 4), 3, {});
  const ParameterStore<double> before = model.store();
  Gradients<double> zero(model.store());
  Adam<double> adam(model.store(), 0.1);
  adam.Step(model.mutable_store(), zero);
  EXPECT_TRUE(SameStore(before, model.store()));
  MomentumSgd<double> sgd(model.store(), 0.1);
  sgd.Step(model.mutable_store(), zero);
  EXPECT_TRUE(SameStore(before, model.store()));
}

TEST(Optimizer, MomentumArithmetic) {
  ParameterStore<double> store;
  store.Add("w", Array<double>::Row({1.0}));
  Gradients<double> g(store);
  g[0].values()[0] = 2.0;
  MomentumSgd<double> sgd(store, 0.1, 0.5);
  sgd.Step(store, g);  // v = 2, w = 0.8
  EXPECT_DOUBLE_EQ(store.Value(0).values()[0], 0.8);
  sgd.Step(store, g);  // v = 3, w = 0.5
  EXPECT_NEAR(store.Value(0).values()[0], 0.5, 1e-15);
}

TEST(Optimizer, AdamFirstStepMovesByLr) {
  ParameterStore<double> store;
  store.Add("w", Array<double>::Row({1.0, -1.0}));
  Gradients<double> g(store);
  g[0].values() = {0.3, -5.0};
  Adam<double> adam(store, 0.01);
  adam.Step(store, g);
  EXPECT_NEAR(store.Value(0).values()[0], 0.99, 1e-9);
  EXPECT_NEAR(store.Value(0).values()[1], -0.99, 1e-9);
}

TEST(TrainSl, ZeroLearningRateKeepsParameters) {
  const auto train = ToyCorpus(24);
  GuesserModel<double> model(SmallConfig(6, 6), 5, {});
  TrainConfig cfg = QuickConfig();
  cfg.lr = 0;
  const auto result = TrainSl(model, train, {}, cfg);
  EXPECT_TRUE(SameStore(model.store(), result.model.store()));
  EXPECT_EQ(result.history.size(), 2u);
}

TEST(TrainSl, EmptyCorpusRejected) {
  GuesserModel<double> model(SmallConfig(4, 4), 5, {});
  EXPECT_THROW(TrainSl(model, {}, {}, QuickConfig()), ConfigError);
}

TEST(TrainSl, LossDecreasesOnToyCorpus) {
  const auto train = ToyCorpus(200);
  GuesserModel<double> model(SmallConfig(12, 12), 7, {});
  TrainConfig cfg = QuickConfig();
  cfg.epochs = 5;
  const auto result = TrainSl(model, train, {}, cfg);
  ASSERT_EQ(result.history.size(), 5u);
  EXPECT_LT(result.history.back().total, result.history.front().total);
  EXPECT_LT(result.history.back().ps, result.history.front().ps);
}

TEST(TrainSl, SameSeedSameParameters) {
  const auto train = ToyCorpus(40);
  const auto valid = ToyCorpus(20, SceneStream::kValid);
  GuesserModel<double> a(SmallConfig(6, 6), 9, {});
  GuesserModel<double> b(SmallConfig(6, 6), 9, {});
  const auto ra = TrainSl(a, train, valid, QuickConfig());
  const auto rb = TrainSl(b, train, valid, QuickConfig());
  EXPECT_TRUE(SameStore(ra.model.store(), rb.model.store()));
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].ToLine(), rb.history[i].ToLine());
  }
}

TEST(TrainSl, JobsDoNotChangeResult) {
  const auto train = ToyCorpus(40);
  GuesserModel<double> model(SmallConfig(6, 6), 9, {});
  TrainConfig cfg = QuickConfig();
  const auto serial = TrainSl(model, train, {}, cfg);
  cfg.jobs = 3;
  const auto threaded = TrainSl(model, train, {}, cfg);
  EXPECT_TRUE(SameStore(serial.model.store(), threaded.model.store()));
}

TEST(TrainSl, BatchGradientIsSumOfExamples) {
  const auto train = ToyCorpus(3);
  GuesserModel<double> model(SmallConfig(6, 6), 13, {});
  const SupervisionConfig sup;
  std::vector<Gradients<double>> each;
  for (const auto& g : train) {
    each.emplace_back(model.store());
    SlExampleGradient(model, g, sup, each.back());
  }
  for (int jobs : {1, 3}) {
    BatchGradient<double> batch(model.store());
    std::vector<ExampleStats> stats;
    const Gradients<double>& total = batch.Run(
        3, jobs,
        [&](std::size_t i, Gradients<double>& out) {
          return SlExampleGradient(model, train[i], sup, out);
        },
        stats);
    for (std::size_t p = 0; p < model.store().size(); ++p) {
      for (std::size_t k = 0; k < total[p].values().size(); ++k) {
        const double expected =
            each[0][p].values()[k] + each[1][p].values()[k] + each[2][p].values()[k];
        EXPECT_NEAR(total[p].values()[k], expected, 1e-12 * (1 + std::abs(expected)));
      }
    }
  }
}

TEST(TrainSl, EarlyStoppingKeepsBestEpoch) {
  const auto train = ToyCorpus(40);
  const auto valid = ToyCorpus(30, SceneStream::kValid);
  GuesserModel<double> model(SmallConfig(6, 6), 2, {});
  TrainConfig cfg = QuickConfig();
  cfg.epochs = 6;
  cfg.patience = 1;
  const auto r = TrainSl(model, train, valid, cfg);
  ASSERT_GE(r.best_epoch, 0);
  double best = 2;
  for (const auto& m : r.history) best = std::min(best, m.valid_error);
  EXPECT_DOUBLE_EQ(r.best_valid_error, best);
  EXPECT_DOUBLE_EQ(GuesserOnlyError(r.model, valid, "valid").error_rate, best);
}

TEST(TrainRl, RunsAndIsDeterministic) {
  GuesserModel<double> model(SmallConfig(6, 6), 4, {});
  TrainConfig cfg = TrainConfig::ForPhase(TrainPhase::kRl);
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.rl_batches_per_epoch = 2;
  cfg.rl_train_scenes = 50;
  std::ostringstream warn;
  const auto a = TrainRl(model, ToyTemplates(), {}, cfg, {}, &warn);
  const auto b = TrainRl(model, ToyTemplates(), {}, cfg, {}, &warn);
  ASSERT_EQ(a.history.size(), 2u);
  EXPECT_EQ(a.history[0].games, 16);
  EXPECT_TRUE(SameStore(a.model.store(), b.model.store()));
  cfg.jobs = 2;
  const auto c = TrainRl(model, ToyTemplates(), {}, cfg, {}, &warn);
  EXPECT_TRUE(SameStore(a.model.store(), c.model.store()));
}

TEST(TrainRl, LearningRateDecays) {
  GuesserModel<double> model(SmallConfig(4, 4), 4, {});
  TrainConfig cfg = TrainConfig::ForPhase(TrainPhase::kRl);
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.rl_batches_per_epoch = 1;
  cfg.lr_decay_every = 2;
  cfg.rl_train_scenes = 10;
  const auto r = TrainRl(model, ToyTemplates(), {}, cfg);
  EXPECT_DOUBLE_EQ(r.history[0].lr, 1e-3);
  EXPECT_DOUBLE_EQ(r.history[1].lr, 1e-3);
  EXPECT_DOUBLE_EQ(r.history[2].lr, 1e-3 * 0.99);
}

TEST(TrainRl, NoSuccessWarnsAndKeepsParameters) {
  // Zero weights give a uniform belief; with one round allowed and m >= 3,
  // a run with every game failing leaves the parameters untouched.
  GuesserModel<double> model(SmallConfig(4, 4), 4, {});
  testing::ZeroParameters(model.mutable_store());
  TrainConfig cfg = TrainConfig::ForPhase(TrainPhase::kRl);
  cfg.epochs = 1;
  cfg.batch_size = 1;
  cfg.rl_batches_per_epoch = 1;
  cfg.rl_train_scenes = 10;
  for (std::uint64_t seed = 1; seed < 40; ++seed) {
    cfg.seed = seed;
    std::ostringstream warn;
    const auto r = TrainRl(model, ToyTemplates(), {}, cfg, {}, &warn);
    if (r.history[0].contributing == 0) {
      EXPECT_NE(warn.str().find("warning"), std::string::npos);
      EXPECT_TRUE(SameStore(model.store(), r.model.store()));
      return;
    }
  }
  FAIL() << "every seed produced a success";
}

TEST(Ablation, OneRowPerCell) {
  const auto train = ToyCorpus(16);
  const auto valid = ToyCorpus(8, SceneStream::kValid);
  AblationGrid grid;
  grid.variants = {LossVariant::kFull, LossVariant::kNoEsPs};
  grid.concats = {ConcatVariant::kPlain};
  grid.cs = {1.1, 2.0};
  grid.seeds = {1, 2};
  TrainConfig cfg = QuickConfig();
  cfg.epochs = 1;
  EvalOptions eo;
  eo.n_games = 10;
  const auto rows =
      Ablate<double>(grid, SmallConfig(4, 4), {}, cfg, ToyTemplates(), train, valid, eo);
  ASSERT_EQ(rows.size(), grid.Cells());
  EXPECT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.success.size(), 2u);
    EXPECT_GE(r.mean_success(), 0);
    EXPECT_LE(r.mean_success(), 1);
  }
  EXPECT_EQ(rows[1].c, 2.0);
  EXPECT_EQ(rows[2].variant, LossVariant::kNoEsPs);
  const std::string table = AblationTable(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
  grid.cs.clear();
  EXPECT_THROW(Ablate<double>(grid, SmallConfig(4, 4), {}, cfg, ToyTemplates(), train, valid, eo),
               ConfigError);
}

TEST(TrainConfig, RoundTrip) {
  TrainConfig c = TrainConfig::ForPhase(TrainPhase::kRl);
  c.seed = 77;
  c.supervision.alpha = 0.25;
  c.supervision.variant = LossVariant::kNoIs;
  c.rl_questions = "random";
  const TrainConfig d = TrainConfig::FromKeyValues(c.ToKeyValues(), TrainPhase::kSl);
  EXPECT_EQ(d.ToKeyValues().values(), c.ToKeyValues().values());
  EXPECT_EQ(d.phase, TrainPhase::kRl);
}

TEST(TrainConfig, PhaseDefaults) {
  const TrainConfig sl = TrainConfig::ForPhase(TrainPhase::kSl);
  EXPECT_DOUBLE_EQ(sl.lr, 3e-4);
  EXPECT_EQ(sl.batch_size, 64);
  EXPECT_EQ(sl.epochs, 20);
  const TrainConfig rl = TrainConfig::ForPhase(TrainPhase::kRl);
  EXPECT_DOUBLE_EQ(rl.lr, 1e-3);
  EXPECT_DOUBLE_EQ(rl.momentum, 0.9);
  EXPECT_EQ(rl.epochs, 50);
}

TEST(TrainConfig, RejectsUnknownAndInvalid) {
  KeyValues kv;
  kv.Set("train.lerning_rate", "1");
  EXPECT_THROW(TrainConfig::FromKeyValues(kv, TrainPhase::kSl), ConfigError);
  KeyValues bad;
  bad.SetNumber("train.batch_size", 0);
  EXPECT_THROW(TrainConfig::FromKeyValues(bad, TrainPhase::kSl), ConfigError);
  KeyValues version;
  version.SetNumber("config.version", 9);
  EXPECT_THROW(TrainConfig::FromKeyValues(version, TrainPhase::kSl), ConfigError);
  KeyValues other;
  other.Set("model.lstm_dim", "16");
  EXPECT_NO_THROW(TrainConfig::FromKeyValues(other, TrainPhase::kSl));
}

TEST(EpochMetrics, LineFormat) {
  EpochMetrics m;
  m.step = 3;
  m.epoch = 1;
  const std::string line = m.ToLine();
  for (const char* key : {"step=3", "epoch=1", "es=", "ps=", "is=", "total=", "success_rate=",
                          "valid_error=", "lr="}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace gst
