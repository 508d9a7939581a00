#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gst/autodiff/ops.hpp"
#include "gst/autodiff/parameter_store.hpp"
#include "gst/env/question.hpp"
#include "gst/env/scene.hpp"
#include "gst/model/config.hpp"

namespace gst {

// [x_min, y_min, x_max, y_max, x_center, y_center, w_box, h_box]; the first
// six scaled to [-1, 1] by image size, extents as 2 * size / image size.
using SpatialVector = std::array<double, kSpatialDim>;

inline SpatialVector SpatialFeatures(const Scene& scene, std::size_t i) {
  const BBox& b = scene.objects.at(i).box;
  const double w = scene.width, h = scene.height;
  return {2 * b.x / w - 1,          2 * b.y / h - 1,          2 * (b.x + b.w) / w - 1,
          2 * (b.y + b.h) / h - 1,  2 * b.CenterX() / w - 1,  2 * b.CenterY() / h - 1,
          2 * b.w / w,              2 * b.h / h};
}

// Indices of the object / question / QA encoder parameters in a store,
// resolved once. `prefix` distinguishes the baseline's own copies.
struct EncoderParams {
  std::size_t category_embedding = 0;
  std::size_t object_w = 0;
  std::size_t object_b = 0;
  std::size_t word_embedding = 0;
  std::size_t lstm_wx = 0;
  std::size_t lstm_wh = 0;
  std::size_t lstm_b = 0;
  std::size_t answer_embedding = 0;
  std::size_t qa_w = 0;
  std::size_t qa_b = 0;
  bool has_qa = true;

  template <typename T>
  static EncoderParams Resolve(const ParameterStore<T>& s, const std::string& prefix,
                               bool with_qa) {
    EncoderParams p;
    p.category_embedding = s.IndexOf(prefix + "category_embedding");
    p.object_w = s.IndexOf(prefix + "object_w");
    p.object_b = s.IndexOf(prefix + "object_b");
    p.word_embedding = s.IndexOf(prefix + "word_embedding");
    p.lstm_wx = s.IndexOf(prefix + "lstm_wx");
    p.lstm_wh = s.IndexOf(prefix + "lstm_wh");
    p.lstm_b = s.IndexOf(prefix + "lstm_b");
    p.has_qa = with_qa;
    if (with_qa) {
      p.answer_embedding = s.IndexOf(prefix + "answer_embedding");
      p.qa_w = s.IndexOf(prefix + "qa_w");
      p.qa_b = s.IndexOf(prefix + "qa_b");
    }
    return p;
  }
};

// Object MLP (cat_dim + 8 -> out_dim), word embeddings and an LSTM whose
// input is word_dim + lstm_extra_input (the visual context for the tracker).
template <typename T>
void AddEncoderParameters(ParameterStore<T>& s, const std::string& prefix, const ModelConfig& c,
                          int object_out, int lstm_extra_input, bool with_qa) {
  s.AddWeight(prefix + "category_embedding", {static_cast<std::size_t>(c.num_categories),
                                              static_cast<std::size_t>(c.category_dim)});
  s.AddWeight(prefix + "object_w", {static_cast<std::size_t>(c.category_dim + kSpatialDim),
                                    static_cast<std::size_t>(object_out)});
  s.AddZeros(prefix + "object_b", {1, static_cast<std::size_t>(object_out)});
  s.AddWeight(prefix + "word_embedding",
              {static_cast<std::size_t>(c.vocab_size), static_cast<std::size_t>(c.word_dim)});
  const auto gates = static_cast<std::size_t>(4 * c.lstm_dim);
  s.AddWeight(prefix + "lstm_wx", {static_cast<std::size_t>(c.word_dim + lstm_extra_input), gates});
  s.AddWeight(prefix + "lstm_wh", {static_cast<std::size_t>(c.lstm_dim), gates});
  s.AddZeros(prefix + "lstm_b", {1, gates});
  if (with_qa) {
    s.AddWeight(prefix + "answer_embedding",
                {static_cast<std::size_t>(kNumAnswers), static_cast<std::size_t>(c.answer_dim)});
    s.AddWeight(prefix + "qa_w", {static_cast<std::size_t>(c.lstm_dim + c.answer_dim),
                                  static_cast<std::size_t>(c.object_dim)});
    s.AddZeros(prefix + "qa_b", {1, static_cast<std::size_t>(c.object_dim)});
  }
}

// O^(0): row i = tanh([o_cate; o_spat] W + b).
template <typename T>
Var<T> EncodeObjects(Tape<T>& tape, const EncoderParams& p, const Scene& scene) {
  const Array<T>& table = tape.store()->Value(p.category_embedding);
  std::vector<int> cats;
  Array<T> spatial(scene.size(), kSpatialDim);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const int c = scene.objects[i].category;
    if (c < 0 || static_cast<std::size_t>(c) >= table.rows()) {
      throw ConfigError("object " + std::to_string(i) + " has unknown category " + std::to_string(c));
    }
    cats.push_back(c);
    const SpatialVector sv = SpatialFeatures(scene, i);
    for (int k = 0; k < kSpatialDim; ++k) spatial(i, k) = static_cast<T>(sv[k]);
  }
  Var<T> emb = GatherRows(tape.Param(p.category_embedding), std::span<const int>(cats));
  Var<T> x = Concat({emb, tape.Constant(std::move(spatial))}, 1);
  return Tanh(Add(Matmul(x, tape.Param(p.object_w)), tape.Param(p.object_b)));
}

template <typename T>
LstmWeights<T> EncoderLstm(Tape<T>& tape, const EncoderParams& p) {
  return {tape.Param(p.lstm_wx), tape.Param(p.lstm_wh), tape.Param(p.lstm_b)};
}

template <typename T>
LstmState<T> ZeroLstmState(Tape<T>& tape, std::size_t dim) {
  return {tape.Constant(Array<T>(1, dim)), tape.Constant(Array<T>(1, dim))};
}

// Runs the LSTM over the question tokens, each concatenated with the
// visual context v (1 x d) when given. Starts from `prev`, returns the
// carried state; state.h is the question representation.
template <typename T>
LstmState<T> EncodeQuestion(Tape<T>& tape, const EncoderParams& p, std::span<const int> tokens,
                            const Var<T>* visual, LstmState<T> prev) {
  if (tokens.empty()) throw ContractError("empty question");
  const std::size_t vocab = tape.store()->Value(p.word_embedding).rows();
  for (int tok : tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= vocab) {
      throw DimensionError("token id " + std::to_string(tok) + " outside vocabulary of " +
                           std::to_string(vocab));
    }
  }
  const LstmWeights<T> w = EncoderLstm(tape, p);
  Var<T> table = tape.Param(p.word_embedding);
  LstmState<T> state = prev;
  for (int tok : tokens) {
    Var<T> word = GatherRows(table, std::span<const int>(&tok, 1));
    Var<T> x = visual ? Concat({word, *visual}, 1) : word;
    state = LstmStep(x, state, w);
  }
  return state;
}

// h_qa = tanh([h; a] W + b).
template <typename T>
Var<T> EncodeQa(Tape<T>& tape, const EncoderParams& p, Var<T> h, Answer a) {
  const int aid = static_cast<int>(a);
  Var<T> emb = GatherRows(tape.Param(p.answer_embedding), std::span<const int>(&aid, 1));
  return Tanh(Add(Matmul(Concat({h, emb}, 1), tape.Param(p.qa_w)), tape.Param(p.qa_b)));
}

}  // namespace gst
