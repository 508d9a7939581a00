#pragma once

#include <cstdio>
#include <string>

#include "gst/error.hpp"
#include "gst/key_value.hpp"

namespace gst {

// Input layout of the per-object scorer in the guessing-state update.
enum class ConcatVariant {
  kSymmetric,    // [h_qa; h_qa * o_i; o_i]
  kProductOnly,  // [h_qa * o_i]
  kPlain,        // [h_qa; o_i]
};

inline std::string ConcatVariantName(ConcatVariant v) {
  switch (v) {
    case ConcatVariant::kSymmetric: return "symmetric";
    case ConcatVariant::kProductOnly: return "product";
    case ConcatVariant::kPlain: return "plain";
  }
  return "symmetric";
}

inline ConcatVariant ParseConcatVariant(const std::string& s) {
  if (s == "symmetric") return ConcatVariant::kSymmetric;
  if (s == "product") return ConcatVariant::kProductOnly;
  if (s == "plain") return ConcatVariant::kPlain;
  throw ConfigError("unknown concat variant '" + s + "'");
}

inline int ConcatBlocks(ConcatVariant v) {
  switch (v) {
    case ConcatVariant::kSymmetric: return 3;
    case ConcatVariant::kProductOnly: return 1;
    case ConcatVariant::kPlain: return 2;
  }
  return 3;
}

enum class ModelKind { kGst, kBaseline };

inline std::string ModelKindName(ModelKind k) { return k == ModelKind::kGst ? "gst" : "baseline"; }
inline ModelKind ParseModelKind(const std::string& s) {
  if (s == "gst") return ModelKind::kGst;
  if (s == "baseline") return ModelKind::kBaseline;
  throw ConfigError("unknown model kind '" + s + "'");
}

inline constexpr int kSpatialDim = 8;

// Dimensions default to 512 with a 128-unit scorer hidden layer.
struct ModelConfig {
  ModelKind kind = ModelKind::kGst;
  int num_categories = 8;
  int vocab_size = 40;
  int category_dim = 512;  // category embedding
  int object_dim = 512;    // d: rows of O^(0), h_qa
  int word_dim = 512;
  int lstm_dim = 512;
  int answer_dim = 512;
  int scorer_hidden = 128;
  ConcatVariant concat = ConcatVariant::kSymmetric;
  int answer_tokens[3] = {0, 0, 0};  // vocabulary ids of yes/no/n/a (baseline input)

  void Validate() const {
    if (num_categories < 1 || vocab_size < 2 || category_dim < 1 || object_dim < 1 ||
        word_dim < 1 || lstm_dim < 1 || answer_dim < 1 || scorer_hidden < 1) {
      throw ConfigError("model dimensions must be positive");
    }
  }

  // Same width for every embedding and hidden size.
  static ModelConfig Uniform(int dim, int scorer_hidden, int num_categories, int vocab_size) {
    ModelConfig c;
    c.category_dim = c.object_dim = c.word_dim = c.lstm_dim = c.answer_dim = dim;
    c.scorer_hidden = scorer_hidden;
    c.num_categories = num_categories;
    c.vocab_size = vocab_size;
    return c;
  }

  KeyValues ToKeyValues() const {
    KeyValues kv;
    kv.Set("model.kind", ModelKindName(kind));
    kv.SetNumber("model.num_categories", num_categories);
    kv.SetNumber("model.vocab_size", vocab_size);
    kv.SetNumber("model.category_dim", category_dim);
    kv.SetNumber("model.object_dim", object_dim);
    kv.SetNumber("model.word_dim", word_dim);
    kv.SetNumber("model.lstm_dim", lstm_dim);
    kv.SetNumber("model.answer_dim", answer_dim);
    kv.SetNumber("model.scorer_hidden", scorer_hidden);
    kv.Set("model.concat", ConcatVariantName(concat));
    kv.Set("model.answer_tokens", std::to_string(answer_tokens[0]) + "," +
                                      std::to_string(answer_tokens[1]) + "," +
                                      std::to_string(answer_tokens[2]));
    return kv;
  }

  static ModelConfig FromKeyValues(const KeyValues& kv) {
    ModelConfig c;
    c.kind = ParseModelKind(kv.GetString("model.kind", "gst"));
    c.num_categories = static_cast<int>(kv.GetInt("model.num_categories", c.num_categories));
    c.vocab_size = static_cast<int>(kv.GetInt("model.vocab_size", c.vocab_size));
    c.category_dim = static_cast<int>(kv.GetInt("model.category_dim", c.category_dim));
    c.object_dim = static_cast<int>(kv.GetInt("model.object_dim", c.object_dim));
    c.word_dim = static_cast<int>(kv.GetInt("model.word_dim", c.word_dim));
    c.lstm_dim = static_cast<int>(kv.GetInt("model.lstm_dim", c.lstm_dim));
    c.answer_dim = static_cast<int>(kv.GetInt("model.answer_dim", c.answer_dim));
    c.scorer_hidden = static_cast<int>(kv.GetInt("model.scorer_hidden", c.scorer_hidden));
    c.concat = ParseConcatVariant(kv.GetString("model.concat", "symmetric"));
    const std::string toks = kv.GetString("model.answer_tokens", "0,0,0");
    if (std::sscanf(toks.c_str(), "%d,%d,%d", &c.answer_tokens[0], &c.answer_tokens[1],
                    &c.answer_tokens[2]) != 3) {
      throw ConfigError("bad model.answer_tokens '" + toks + "'");
    }
    c.Validate();
    return c;
  }
};

}  // namespace gst
