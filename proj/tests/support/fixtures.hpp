#pragma once

#include <cstdint>
#include <vector>

#include "gst/env/corpus.hpp"
#include "gst/model/guesser_model.hpp"

namespace gst::testing {

inline const TemplateSet& DefaultTemplates() {
  static const TemplateSet templates{SceneConfig{}};
  return templates;
}

inline ModelConfig SmallConfig(int dim, int hidden, ModelKind kind = ModelKind::kGst) {
  const TemplateSet& t = DefaultTemplates();
  ModelConfig c = ModelConfig::Uniform(dim, hidden, t.config().num_categories,
                                       static_cast<int>(t.vocabulary().size()));
  c.kind = kind;
  const Vocabulary& v = t.vocabulary();
  c.answer_tokens[0] = v.Id("yes");
  c.answer_tokens[1] = v.Id("no");
  c.answer_tokens[2] = v.Id("n/a");
  return c;
}

template <typename T>
void ZeroParameters(ParameterStore<T>& store) {
  for (std::size_t i = 0; i < store.size(); ++i) store.MutableValue(i).Fill(T(0));
}

// Scene with exactly m objects plus a GreedySplit dialogue of `rounds`
// questions about a seeded target.
struct SmallGame {
  Scene scene;
  int target = 0;
  std::vector<QaPair> dialogue;
};

inline SmallGame MakeGame(std::uint64_t seed, int m, int rounds) {
  const TemplateSet& t = DefaultTemplates();
  SceneConfig cfg = t.config();
  cfg.min_objects = cfg.max_objects = m;
  SmallGame g;
  g.scene = GenerateScene(seed, cfg);
  Rng rng(seed);
  g.target = static_cast<int>(rng.Below(g.scene.size()));
  QuestionGenerator qgen(t, QGenPolicy::kGreedySplit);
  for (int j = 0; j < rounds; ++j) {
    auto q = qgen.Next(g.scene, g.dialogue, rng);
    if (!q) break;
    const Answer a = OracleAnswer(t, g.scene, static_cast<std::size_t>(g.target), *q);
    g.dialogue.push_back({*q, a});
  }
  return g;
}

}  // namespace gst::testing
