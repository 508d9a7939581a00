#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gst/env/oracle.hpp"
#include "gst/env/qgen.hpp"
#include "gst/env/question.hpp"
#include "gst/env/rng.hpp"
#include "gst/env/scene.hpp"
#include "gst/model/decision.hpp"

namespace gst {

// What play_game needs from a guesser: it sees the scene and the dialogue,
// never the target, and exposes its guessing states pi^(0..j).
class Guesser {
 public:
  virtual ~Guesser() = default;
  virtual void Reset(const Scene& scene) = 0;
  virtual void Observe(const Question& q, Answer a) = 0;
  virtual const std::vector<Belief>& States() const = 0;
};

struct GameRecord {
  std::uint64_t id = 0;
  Scene scene;
  int target = 0;
  std::vector<QaPair> rounds;
  bool success = false;
  int guess = -1;
  std::string status = "incomplete";  // success | failure | incomplete | error:<category>
  std::vector<Belief> states;         // optional trace pi^(0..J)

  bool operator==(const GameRecord&) const = default;
};

struct GameOptions {
  int max_rounds = 5;
  StopPolicy stop;
  GuessMode guess_mode = GuessMode::kArgmax;
  bool keep_states = true;
};

inline GameRecord PlayGame(const TemplateSet& templates, const Scene& scene, std::size_t target,
                           Guesser& guesser, const QuestionGenerator& qgen,
                           const GameOptions& options, Rng& rng, std::uint64_t id = 0) {
  if (target >= scene.size()) throw ContractError("target index out of range");
  if (options.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  GameRecord rec;
  rec.id = id;
  rec.scene = scene;
  rec.target = static_cast<int>(target);
  try {
    guesser.Reset(scene);
    for (int j = 0; j < options.max_rounds; ++j) {
      std::optional<Question> q = qgen.Next(scene, rec.rounds, rng);
      if (!q) break;  // templates exhausted; the dialogue ends early
      const Answer a = OracleAnswer(templates, scene, target, *q);
      guesser.Observe(*q, a);
      rec.rounds.push_back({std::move(*q), a});
      if (StopDecision(guesser.States(), options.stop)) break;
    }
    rec.guess = static_cast<int>(FinalGuess(guesser.States(), options.guess_mode, rng));
    rec.success = rec.guess == rec.target;
    rec.status = rec.success ? "success" : "failure";
  } catch (const Error& e) {
    rec.success = false;
    rec.status = "error:" + e.Category();
  }
  if (options.keep_states) rec.states = guesser.States();
  return rec;
}

}  // namespace gst
