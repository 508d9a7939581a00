#pragma once

#include <span>
#include <vector>

#include "gst/autodiff/ops.hpp"
#include "gst/env/question.hpp"
#include "gst/env/scene.hpp"
#include "gst/model/config.hpp"
#include "gst/model/encoder.hpp"

namespace gst {

// Single-step dot-product guesser: one LSTM pass over the dialogue (each
// question followed by its answer word), objects projected to the LSTM
// width, p = softmax(O h).
struct BaselineParams {
  EncoderParams encoder;

  template <typename T>
  static BaselineParams Resolve(const ParameterStore<T>& s) {
    return {EncoderParams::Resolve(s, "baseline/", false)};
  }
};

template <typename T>
void AddBaselineParameters(ParameterStore<T>& s, const ModelConfig& c) {
  AddEncoderParameters(s, "baseline/", c, c.lstm_dim, 0, false);
}

// Incremental form: after each observed round, the distribution given the
// dialogue so far. Because the LSTM reads left to right, the prefix
// distribution is the one the baseline would output on that prefix alone.
template <typename T>
class BaselineRun {
 public:
  BaselineRun(Tape<T>& tape, const BaselineParams& params, const ModelConfig& config,
              const Scene& scene)
      : tape_(&tape), params_(params), config_(config) {
    if (scene.size() == 0) throw ContractError("scene without objects");
    objects_ = EncodeObjects(tape, params.encoder, scene);
    const std::size_t m = scene.size();
    states_.push_back(tape.Constant(Array<T>(1, m, T(1) / static_cast<T>(m))));
    lstm_ = ZeroLstmState(tape, static_cast<std::size_t>(config.lstm_dim));
  }

  void Observe(const Question& q, Answer a) {
    std::vector<int> tokens = q.tokens;
    tokens.push_back(config_.answer_tokens[static_cast<int>(a)]);
    lstm_ = EncodeQuestion<T>(*tape_, params_.encoder, tokens, nullptr, lstm_);
    const std::size_t m = objects_.shape().rows;
    Var<T> scores = Matmul(objects_, Transpose(lstm_.h));
    states_.push_back(Softmax(Reshape(scores, {1, m})));
  }

  const std::vector<Var<T>>& States() const { return states_; }

 private:
  Tape<T>* tape_;
  BaselineParams params_;
  ModelConfig config_;
  Var<T> objects_;
  LstmState<T> lstm_;
  std::vector<Var<T>> states_;
};

}  // namespace gst
