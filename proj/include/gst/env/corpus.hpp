#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gst/env/game.hpp"
#include "gst/env/reference_guessers.hpp"
#include "gst/error.hpp"

namespace gst {

// Line-delimited game corpus. The first line is a header carrying the
// schema name and version; every following line is one self-describing
// game object.
inline constexpr const char* kCorpusSchema = "gst-games";
inline constexpr int kCorpusVersion = 1;

using Json = nlohmann::json;

inline Json SceneToJson(const Scene& s) {
  Json objs = Json::array();
  for (const auto& o : s.objects) {
    objs.push_back({{"category", o.category},
                    {"bbox", {o.box.x, o.box.y, o.box.w, o.box.h}},
                    {"attributes", o.attributes}});
  }
  return {{"width", s.width}, {"height", s.height}, {"objects", objs}};
}

inline Scene SceneFromJson(const Json& j) {
  Scene s;
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.category = o.at("category").get<int>();
    const auto& b = o.at("bbox");
    obj.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
               b.at(3).get<double>()};
    if (o.contains("attributes")) obj.attributes = o.at("attributes").get<std::vector<int>>();
    s.objects.push_back(std::move(obj));
  }
  return s;
}

inline Json GameToJson(const GameRecord& g, const Vocabulary* vocab = nullptr) {
  Json rounds = Json::array();
  for (const auto& qa : g.rounds) {
    Json r = {{"template", qa.question.template_id},
              {"tokens", qa.question.tokens},
              {"answer", AnswerName(qa.answer)}};
    if (vocab) r["text"] = vocab->Render(qa.question.tokens);
    rounds.push_back(std::move(r));
  }
  Json j = {{"id", g.id},         {"scene", SceneToJson(g.scene)}, {"target", g.target},
            {"rounds", rounds},   {"success", g.success},          {"guess", g.guess},
            {"status", g.status}};
  if (!g.states.empty()) j["states"] = g.states;
  return j;
}

inline GameRecord GameFromJson(const Json& j) {
  GameRecord g;
  g.id = j.at("id").get<std::uint64_t>();
  g.scene = SceneFromJson(j.at("scene"));
  g.target = j.at("target").get<int>();
  for (const auto& r : j.at("rounds")) {
    QaPair qa;
    qa.question.template_id = r.at("template").get<int>();
    qa.question.tokens = r.at("tokens").get<std::vector<int>>();
    qa.answer = ParseAnswer(r.at("answer").get<std::string>());
    g.rounds.push_back(std::move(qa));
  }
  g.success = j.value("success", false);
  g.guess = j.value("guess", -1);
  g.status = j.value("status", std::string("incomplete"));
  if (j.contains("states")) g.states = j.at("states").get<std::vector<Belief>>();
  if (g.target < 0 || static_cast<std::size_t>(g.target) >= g.scene.size()) {
    throw ProtocolError("game " + std::to_string(g.id) + ": target out of range");
  }
  return g;
}

inline std::string CorpusHeader() {
  return Json{{"schema", kCorpusSchema}, {"version", kCorpusVersion}}.dump();
}

inline void WriteCorpus(const std::string& path, const std::vector<GameRecord>& games,
                        const Vocabulary* vocab = nullptr) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << CorpusHeader() << "\n";
  for (const auto& g : games) out << GameToJson(g, vocab).dump() << "\n";
  if (!out) throw IoError("write failed for " + path);
}

// Serializes appends from concurrent producers.
class CorpusWriter {
 public:
  CorpusWriter(const std::string& path, const Vocabulary* vocab = nullptr)
      : out_(path, std::ios::binary | std::ios::trunc), vocab_(vocab) {
    if (!out_) throw IoError("cannot write " + path);
    out_ << CorpusHeader() << "\n";
  }
  void Append(const GameRecord& g) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << GameToJson(g, vocab_).dump() << "\n";
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  const Vocabulary* vocab_;
};

inline std::vector<GameRecord> ReadCorpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open corpus " + path);
  std::string line;
  if (!std::getline(in, line)) throw ProtocolError(path + ": empty corpus file");
  const Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("schema", "") != kCorpusSchema) {
    throw ProtocolError(path + ": missing corpus header");
  }
  if (header.value("version", 0) != kCorpusVersion) {
    throw ProtocolError(path + ": unsupported corpus version");
  }
  std::vector<GameRecord> games;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ProtocolError(path + ":" + std::to_string(lineno) + ": malformed record");
    }
    games.push_back(GameFromJson(j));
  }
  return games;
}

// Reader for the public GuessWhat?! jsonl game format. Categories are
// remapped to dense ids in first-seen order through `category_ids`; free
// text questions are tokenized against `vocab` (unknown words -> <unk>).
inline std::vector<GameRecord> LoadGuessWhatGames(const std::string& path, const Vocabulary& vocab,
                                                  std::map<int, int>& category_ids) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path);
  std::vector<GameRecord> games;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ProtocolError("malformed GuessWhat?! record");
    GameRecord g;
    g.id = j.at("id").get<std::uint64_t>();
    const Json& image = j.at("image");
    g.scene.width = image.at("width").get<int>();
    g.scene.height = image.at("height").get<int>();
    const auto target_object = j.at("object_id").get<std::int64_t>();
    g.target = -1;
    for (const auto& o : j.at("objects")) {
      SceneObject obj;
      const int raw = o.at("category_id").get<int>();
      auto [it, inserted] = category_ids.emplace(raw, static_cast<int>(category_ids.size()));
      obj.category = it->second;
      const auto& b = o.at("bbox");
      obj.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                 b.at(3).get<double>()};
      if (o.at("id").get<std::int64_t>() == target_object) {
        g.target = static_cast<int>(g.scene.objects.size());
      }
      g.scene.objects.push_back(std::move(obj));
    }
    if (g.target < 0) throw ProtocolError("GuessWhat?! game without its target object");
    for (const auto& qa : j.at("qas")) {
      g.rounds.push_back({Question{-1, vocab.Tokenize(qa.at("question").get<std::string>())},
                          ParseAnswer(qa.at("answer").get<std::string>())});
    }
    g.status = j.value("status", std::string("incomplete"));
    g.success = g.status == "success";
    games.push_back(std::move(g));
  }
  return games;
}

// Disjoint scene-seed streams per split.
enum class SceneStream : std::uint64_t {
  kTrain = 0,
  kValid = 1ULL << 32,
  kTest = 2ULL << 32,
  kNewGame = 3ULL << 32,
  kServer = 4ULL << 32,
};

inline std::uint64_t SceneSeed(std::uint64_t base, SceneStream stream, std::uint64_t index) {
  return DeriveSeed(base, static_cast<std::uint64_t>(stream) + index);
}

// Target the corpus generator draws for a scene.
inline std::size_t CorpusTarget(std::uint64_t scene_seed, std::size_t m) {
  Rng rng(DeriveSeed(scene_seed, 0x7A11));
  return rng.Below(m);
}

// Synthetic dialogue corpus: GreedySplit questions answered by the Oracle,
// with the outcome an exact-posterior guesser would reach.
inline std::vector<GameRecord> GenerateCorpus(const TemplateSet& templates, std::size_t n,
                                              std::uint64_t seed, SceneStream stream,
                                              int max_rounds) {
  QuestionGenerator qgen(templates, QGenPolicy::kGreedySplit);
  PosteriorGuesser guesser(templates);
  GameOptions opts;
  opts.max_rounds = max_rounds;
  opts.keep_states = false;
  std::vector<GameRecord> games;
  games.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t scene_seed = SceneSeed(seed, stream, i);
    const Scene scene = GenerateScene(scene_seed, templates.config());
    Rng rng(DeriveSeed(scene_seed, 0x7A11));
    const std::size_t target = rng.Below(scene.size());
    games.push_back(PlayGame(templates, scene, target, guesser, qgen, opts, rng,
                             static_cast<std::uint64_t>(stream) + i));
  }
  return games;
}

}  // namespace gst
