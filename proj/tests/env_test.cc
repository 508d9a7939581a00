#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "gst/env/corpus.hpp"
#include "gst/env/game.hpp"
#include "gst/env/oracle.hpp"
#include "gst/env/qgen.hpp"
#include "gst/env/reference_guessers.hpp"

namespace gst {
namespace {

std::string ReadFileText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Predicate evaluator written against normalized [-1, 1] coordinates and
// raw attribute membership, independent of OracleAnswer.
Answer BruteForceAnswer(const TemplateSet& ts, const Scene& s, std::size_t target, int template_id) {
  const SceneObject& o = s.objects[target];
  const Template& t = ts.at(template_id);
  const double xn = 2.0 * (o.box.x + 0.5 * o.box.w) / s.width - 1.0;
  const double yn = 2.0 * (o.box.y + 0.5 * o.box.h) / s.height - 1.0;
  bool truth = false;
  switch (t.kind) {
    case TemplateKind::kCategory: truth = o.category == t.argument; break;
    case TemplateKind::kAttribute: {
      const int colors = ts.config().num_colors;
      if (t.argument < colors) {
        bool has_color = false;
        for (int a : o.attributes) has_color = has_color || a < colors;
        if (!has_color) return Answer::kNa;
      }
      for (int a : o.attributes) truth = truth || a == t.argument;
      break;
    }
    case TemplateKind::kSpatial:
      switch (t.argument) {
        case 0: truth = xn < 0; break;
        case 1: truth = xn >= 0; break;
        case 2: truth = yn < 0; break;
        case 3: truth = yn >= 0; break;
        case 4: truth = xn >= -1.0 / 3 && xn < 1.0 / 3; break;
        case 5: truth = yn >= -1.0 / 3 && yn < 1.0 / 3; break;
      }
      break;
  }
  return truth ? Answer::kYes : Answer::kNo;
}

TEST(SceneTest, GenerationIsDeterministic) {
  SceneConfig cfg;
  cfg.min_objects = cfg.max_objects = 4;
  EXPECT_EQ(GenerateScene(1, cfg), GenerateScene(1, cfg));
  EXPECT_EQ(GenerateScene(1, cfg).size(), 4u);
  EXPECT_NE(GenerateScene(1, cfg), GenerateScene(2, cfg));
}

TEST(SceneTest, CorpusStatisticsWithinBounds) {
  SceneConfig cfg;
  int collisions = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Scene s = GenerateScene(static_cast<std::uint64_t>(i), cfg);
    ASSERT_GE(s.size(), 3u);
    ASSERT_LE(s.size(), 10u);
    ASSERT_NO_THROW(ValidateScene(s));
    collisions += HasCategoryCollision(s);
  }
  EXPECT_GE(static_cast<double>(collisions) / n, 0.30);
}

TEST(SceneTest, UnsatisfiableConfigRejected) {
  SceneConfig cfg;
  cfg.grid = 3;
  cfg.max_objects = 10;  // 9 cells
  EXPECT_THROW(GenerateScene(1, cfg), ConfigError);
  SceneConfig tiny;
  tiny.min_objects = 2;
  EXPECT_THROW(GenerateScene(1, tiny), ConfigError);
}

TEST(QuestionTest, RenderedTokensWithinVocabulary) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  EXPECT_LE(ts.vocabulary().size(), 45u);
  for (int id = 0; id < static_cast<int>(ts.size()); ++id) {
    const Question q = ts.Make(id);
    EXPECT_LE(q.tokens.size(), 12u);
    for (int tok : q.tokens) {
      EXPECT_LT(tok, static_cast<int>(ts.vocabulary().size()));
      EXPECT_NE(tok, Vocabulary::kUnk) << ts.Text(id);
    }
  }
  EXPECT_EQ(ts.vocabulary().Render(ts.Make(ts.CategoryTemplate(3)).tokens), "is it a cow ?");
}

TEST(QuestionTest, VocabularyFileRoundTrip) {
  TemplateSet ts(SceneConfig{});
  const auto path = (std::filesystem::temp_directory_path() / "gst_vocab.txt").string();
  ts.vocabulary().Save(path);
  EXPECT_EQ(Vocabulary::Load(path), ts.vocabulary());
}

TEST(QuestionTest, AnswerIdsAreFixed) {
  EXPECT_EQ(static_cast<int>(Answer::kYes), 0);
  EXPECT_EQ(static_cast<int>(Answer::kNo), 1);
  EXPECT_EQ(static_cast<int>(Answer::kNa), 2);
  EXPECT_EQ(ParseAnswer("yes"), Answer::kYes);
  EXPECT_THROW(ParseAnswer("maybe"), ProtocolError);
}

TEST(OracleTest, CategoryQuestion) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  Scene s;
  s.objects.push_back({3, {10, 10, 50, 50}, {}});  // cow
  s.objects.push_back({1, {300, 10, 50, 50}, {}});
  EXPECT_EQ(OracleAnswer(ts, s, 0, ts.Make(ts.CategoryTemplate(3))), Answer::kYes);
  EXPECT_EQ(OracleAnswer(ts, s, 1, ts.Make(ts.CategoryTemplate(3))), Answer::kNo);
}

TEST(OracleTest, LeftHalfPredicate) {
  TemplateSet ts(SceneConfig{});
  Scene s;
  s.width = 100;
  s.objects.push_back({0, {85, 10, 10, 10}, {}});  // x_center = 90 = 0.9 * width
  EXPECT_EQ(OracleAnswer(ts, s, 0, ts.Make(ts.SpatialTemplate(SpatialPredicate::kLeftHalf))),
            Answer::kNo);
}

TEST(OracleTest, UnknownTemplateIsProtocolError) {
  TemplateSet ts(SceneConfig{});
  const Scene s = GenerateScene(3, SceneConfig{});
  EXPECT_THROW(OracleAnswer(ts, s, 0, Question{-1, {2, 3}}), ProtocolError);
  EXPECT_THROW(OracleAnswer(ts, s, 0, Question{999, {2}}), ProtocolError);
}

TEST(OracleTest, MatchesBruteForceOnCorpus) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  int na = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scene s = GenerateScene(seed, cfg);
    for (std::size_t t = 0; t < s.size(); ++t) {
      for (int id = 0; id < static_cast<int>(ts.size()); ++id) {
        const Answer a = OracleAnswer(ts, s, t, ts.Make(id));
        ASSERT_EQ(a, BruteForceAnswer(ts, s, t, id)) << "seed " << seed << " template " << id;
        na += a == Answer::kNa;
      }
    }
  }
  EXPECT_GT(na, 0);  // uncolored objects exist
}

TEST(QGenTest, GreedyPicksBalancedSplit) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  // Four objects in the four quadrants with distinct categories 0, 0, 1, 2:
  // "category 0" splits 2/2, "category 1" splits 3/1.
  Scene s;
  s.objects = {{0, {10, 10, 40, 40}, {4}},
               {0, {400, 10, 40, 40}, {4}},
               {1, {10, 300, 40, 40}, {4}},
               {2, {400, 300, 40, 40}, {4}}};
  QuestionGenerator qgen(ts, QGenPolicy::kGreedySplit);
  const std::vector<int> unused{ts.CategoryTemplate(1), ts.CategoryTemplate(0)};
  EXPECT_EQ(qgen.MostBalanced(s, {}, unused), ts.CategoryTemplate(0));
}

TEST(QGenTest, RandomIsReproducibleAndNeverRepeats) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  const Scene s = GenerateScene(5, cfg);
  QuestionGenerator qgen(ts, QGenPolicy::kRandom);
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<QaPair> hist;
    while (auto q = qgen.Next(s, hist, rng)) hist.push_back({*q, OracleAnswer(ts, s, 0, *q)});
    return hist;
  };
  const auto a = run(11), b = run(11);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), qgen.candidates().size());
  std::set<int> ids;
  for (const auto& qa : a) EXPECT_TRUE(ids.insert(qa.question.template_id).second);
}

TEST(QGenTest, GreedyNeverWastesAQuestion) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  QuestionGenerator qgen(ts, QGenPolicy::kGreedySplit);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = GenerateScene(seed, cfg);
    Rng rng(seed);
    std::vector<QaPair> hist;
    for (int j = 0; j < 5; ++j) {
      const auto alive = ConsistentObjects(ts, s, hist);
      auto q = qgen.Next(s, hist, rng);
      ASSERT_TRUE(q.has_value());
      bool discriminating_exists = false;
      for (int id : qgen.candidates()) {
        std::set<Answer> seen;
        for (std::size_t i : alive) seen.insert(OracleAnswer(ts, s, i, ts.Make(id)));
        discriminating_exists = discriminating_exists || seen.size() > 1;
      }
      std::set<Answer> chosen;
      for (std::size_t i : alive) chosen.insert(OracleAnswer(ts, s, i, *q));
      if (discriminating_exists) {
        EXPECT_GT(chosen.size(), 1u);
      }
      hist.push_back({*q, OracleAnswer(ts, s, 0, *q)});
    }
  }
}

TEST(QGenTest, FixedReplaysScriptThenExhausts) {
  TemplateSet ts(SceneConfig{});
  QuestionGenerator qgen(ts, QGenPolicy::kFixed, false, {3, 1});
  const Scene s = GenerateScene(1, SceneConfig{});
  Rng rng(0);
  std::vector<QaPair> hist;
  auto q1 = qgen.Next(s, hist, rng);
  ASSERT_TRUE(q1);
  EXPECT_EQ(q1->template_id, 3);
  hist.push_back({*q1, Answer::kNo});
  hist.push_back({*qgen.Next(s, hist, rng), Answer::kNo});
  EXPECT_FALSE(qgen.Next(s, hist, rng).has_value());
}

TEST(QGenTest, GreedyDrivesPosteriorGuesserOnEightObjectScenes) {
  SceneConfig cfg;
  cfg.min_objects = cfg.max_objects = 8;
  TemplateSet ts(cfg);
  QuestionGenerator qgen(ts, QGenPolicy::kGreedySplit);
  PosteriorGuesser guesser(ts);
  GameOptions opts;
  opts.max_rounds = 5;
  int wins = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Scene s = GenerateScene(i, cfg);
    Rng rng(i);
    wins += PlayGame(ts, s, rng.Below(s.size()), guesser, qgen, opts, rng).success;
  }
  EXPECT_GE(wins, 950);
}

TEST(PlayGameTest, StopThresholds) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  QuestionGenerator qgen(ts, QGenPolicy::kGreedySplit);
  PosteriorGuesser guesser(ts);
  const Scene s = GenerateScene(9, cfg);
  Rng rng(1);
  GameOptions never;
  never.max_rounds = 5;
  never.stop = StopPolicy::Confidence(1.01);
  EXPECT_EQ(PlayGame(ts, s, 0, guesser, qgen, never, rng).rounds.size(), 5u);
  GameOptions always = never;
  always.stop = StopPolicy::Confidence(0.0);
  const GameRecord r = PlayGame(ts, s, 0, guesser, qgen, always, rng);
  EXPECT_EQ(r.rounds.size(), 1u);
  EXPECT_EQ(r.states.size(), 2u);
}

TEST(PlayGameTest, UniquelyIdentifyingDialogueSucceeds) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  Scene s;
  s.objects = {{0, {10, 10, 40, 40}, {4}},
               {0, {400, 10, 40, 40}, {4}},
               {1, {10, 300, 40, 40}, {4}},
               {2, {400, 300, 40, 40}, {4}}};
  QuestionGenerator qgen(ts, QGenPolicy::kGreedySplit);
  PosteriorGuesser guesser(ts);
  GameOptions opts;
  opts.max_rounds = 3;
  for (std::size_t target = 0; target < 4; ++target) {
    Rng rng(target);
    const GameRecord r = PlayGame(ts, s, target, guesser, qgen, opts, rng);
    EXPECT_TRUE(r.success) << "target " << target;
    EXPECT_DOUBLE_EQ(r.states.back()[target], 1.0);
  }
}

TEST(PlayGameTest, ComponentErrorAbortsWithStatus) {
  TemplateSet ts(SceneConfig{});
  QuestionGenerator qgen(ts, QGenPolicy::kFixed, false, {9999});
  PosteriorGuesser guesser(ts);
  const Scene s = GenerateScene(1, SceneConfig{});
  Rng rng(0);
  const GameRecord r = PlayGame(ts, s, 0, guesser, qgen, GameOptions{}, rng);
  EXPECT_EQ(r.status, "error:protocol");
  EXPECT_FALSE(r.success);
}

TEST(CorpusTest, WriteReadRoundTripAndDeterminism) {
  SceneConfig cfg;
  TemplateSet ts(cfg);
  const auto games = GenerateCorpus(ts, 20, 7, SceneStream::kTrain, 5);
  const auto dir = std::filesystem::temp_directory_path();
  const auto p1 = (dir / "gst_corpus_a.jsonl").string();
  const auto p2 = (dir / "gst_corpus_b.jsonl").string();
  WriteCorpus(p1, games, &ts.vocabulary());
  WriteCorpus(p2, GenerateCorpus(ts, 20, 7, SceneStream::kTrain, 5), &ts.vocabulary());
  EXPECT_EQ(ReadFileText(p1), ReadFileText(p2));
  EXPECT_EQ(ReadCorpus(p1), games);
}

TEST(CorpusTest, HeaderRequired) {
  const auto p = (std::filesystem::temp_directory_path() / "gst_noheader.jsonl").string();
  std::ofstream(p) << "{\"id\":1}\n";
  EXPECT_THROW(ReadCorpus(p), ProtocolError);
}

TEST(CorpusTest, LoadsGuessWhatFormat) {
  const auto p = (std::filesystem::temp_directory_path() / "gw.jsonl").string();
  std::ofstream(p)
      << R"({"id": 42, "image": {"width": 640, "height": 480, "file_name": "x.jpg"},)"
      << R"( "objects": [{"id": 7, "category_id": 21, "category": "cow", "bbox": [1, 2, 30, 40], "area": 1200},)"
      << R"( {"id": 8, "category_id": 1, "category": "person", "bbox": [300, 200, 50, 60], "area": 3000}],)"
      << R"( "object_id": 8, "qas": [{"question": "Is it a person?", "answer": "Yes", "id": 1}],)"
      << R"( "status": "success"})" << "\n";
  TemplateSet ts(SceneConfig{});
  std::map<int, int> cats;
  const auto games = LoadGuessWhatGames(p, ts.vocabulary(), cats);
  ASSERT_EQ(games.size(), 1u);
  EXPECT_EQ(games[0].target, 1);
  EXPECT_EQ(games[0].scene.objects[0].category, 0);
  EXPECT_EQ(games[0].scene.objects[1].category, 1);
  EXPECT_EQ(ts.vocabulary().Render(games[0].rounds[0].question.tokens), "is it a person ?");
  EXPECT_EQ(games[0].rounds[0].answer, Answer::kYes);
  EXPECT_TRUE(games[0].success);
}

}  // namespace
}  // namespace gst
