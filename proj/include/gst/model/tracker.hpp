#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gst/autodiff/ops.hpp"
#include "gst/env/question.hpp"
#include "gst/env/scene.hpp"
#include "gst/model/config.hpp"
#include "gst/model/encoder.hpp"

namespace gst {

struct TrackerOptions {
  int max_rounds = 5;
  double underflow_floor = 1e-30;
  bool reset_on_underflow = false;
  double smoothing = 0;  // added to every pi_prev * pi_hat entry before normalizing

  void Validate() const {
    if (max_rounds < 1) throw ConfigError("tracker max_rounds must be >= 1");
    if (!(underflow_floor > 0)) throw ConfigError("underflow floor must be positive");
    if (smoothing < 0) throw ConfigError("smoothing must be >= 0");
  }
};

template <typename T>
struct UovrResult {
  Var<T> objects;  // O^(j), m x d
  Var<T> visual;   // v^(j), 1 x d
};

// o_i^(j) = pi_i o_i^(0); v^(j) = sum_i o_i^(j).
template <typename T>
UovrResult<T> Uovr(Var<T> pi_prev, Var<T> objects0) {
  Var<T> oj = ScaleRows(objects0, pi_prev);
  return {oj, SumRows(oj)};
}

template <typename T>
struct UogsResult {
  Var<T> pi_hat;  // 1 x m
  Var<T> pi;      // 1 x m
  bool underflow = false;
};

// norm(pi_prev * pi_hat), denominator floored at opts.underflow_floor.
template <typename T>
Var<T> UpdateBelief(Var<T> pi_prev, Var<T> pi_hat, const TrackerOptions& opts,
                    bool* underflow = nullptr) {
  if (pi_prev.shape() != pi_hat.shape()) throw DimensionError("belief update: shape mismatch");
  Var<T> joint = Mul(pi_prev, pi_hat);
  if (opts.smoothing > 0) joint = AddScalar(joint, static_cast<T>(opts.smoothing));
  bool floored = false;
  Var<T> pi = Normalize(joint, static_cast<T>(opts.underflow_floor), &floored);
  if (underflow) *underflow = floored;
  if (floored && opts.reset_on_underflow) {
    const std::size_t m = pi_prev.shape().cols;
    pi = pi_prev.tape->Constant(Array<T>(1, m, T(1) / static_cast<T>(m)));
  }
  return pi;
}

template <typename T>
Var<T> ScorerInput(Var<T> h_qa, Var<T> objects, ConcatVariant variant) {
  const std::size_t m = objects.shape().rows;
  Var<T> h_rep = RepeatRows(h_qa, m);
  switch (variant) {
    case ConcatVariant::kSymmetric: return Concat({h_rep, Mul(objects, h_qa), objects}, 1);
    case ConcatVariant::kProductOnly: return Mul(objects, h_qa);
    case ConcatVariant::kPlain: return Concat({h_rep, objects}, 1);
  }
  return objects;
}

// pi_hat = softmax_i(W2^T tanh(W1^T x_i)); pi = norm(pi_prev * pi_hat).
template <typename T>
UogsResult<T> Uogs(Var<T> pi_prev, Var<T> objects, Var<T> h_qa, Var<T> w1, Var<T> w2,
                   ConcatVariant variant, const TrackerOptions& opts) {
  const std::size_t m = objects.shape().rows;
  if (pi_prev.shape() != Shape{1, m}) {
    throw DimensionError("uogs: pi " + pi_prev.shape().ToString() + " vs " +
                         std::to_string(m) + " objects");
  }
  Var<T> scores = Matmul(Tanh(Matmul(ScorerInput(h_qa, objects, variant), w1)), w2);
  UogsResult<T> r;
  r.pi_hat = Softmax(Reshape(scores, {1, m}));
  r.pi = UpdateBelief(pi_prev, r.pi_hat, opts, &r.underflow);
  return r;
}

// Parameter indices of the full GST guesser.
struct GstParams {
  EncoderParams encoder;
  std::size_t w1 = 0;
  std::size_t w2 = 0;

  template <typename T>
  static GstParams Resolve(const ParameterStore<T>& s) {
    return {EncoderParams::Resolve(s, "encoder/", true), s.IndexOf("uogs/w1"),
            s.IndexOf("uogs/w2")};
  }
};

template <typename T>
void AddGstParameters(ParameterStore<T>& s, const ModelConfig& c) {
  if (c.lstm_dim <= 0 || c.object_dim <= 0) throw ConfigError("bad GST dimensions");
  AddEncoderParameters(s, "encoder/", c, c.object_dim, c.object_dim, true);
  s.AddWeight("uogs/w1", {static_cast<std::size_t>(ConcatBlocks(c.concat) * c.object_dim),
                          static_cast<std::size_t>(c.scorer_hidden)});
  s.AddWeight("uogs/w2", {static_cast<std::size_t>(c.scorer_hidden), 1});
}

template <typename T>
struct RoundTrace {
  Var<T> objects;  // O^(j)
  Var<T> visual;   // v^(j)
  Var<T> h;        // question encoding h^(j)
  Var<T> h_qa;
  Var<T> pi_hat;
  bool underflow = false;
};

// One game's tracking process on a tape: pi^(0) uniform, then one
// UoVR -> QA encoder -> UoGS round per observed QA pair.
template <typename T>
class Tracker {
 public:
  Tracker(Tape<T>& tape, const GstParams& params, const ModelConfig& config, const Scene& scene,
          TrackerOptions opts = {})
      : tape_(&tape), params_(params), config_(config), opts_(opts) {
    opts_.Validate();
    if (scene.size() == 0) throw ContractError("scene without objects");
    objects0_ = EncodeObjects(tape, params.encoder, scene);
    const std::size_t m = scene.size();
    states_.push_back(tape.Constant(Array<T>(1, m, T(1) / static_cast<T>(m))));
    lstm_ = ZeroLstmState(tape, static_cast<std::size_t>(config.lstm_dim));
  }

  void TrackRound(const Question& q, Answer a) {
    if (static_cast<int>(rounds_.size()) >= opts_.max_rounds) {
      throw ContractError("tracker already ran " + std::to_string(opts_.max_rounds) + " rounds");
    }
    RoundTrace<T> r;
    const UovrResult<T> u = Uovr(states_.back(), objects0_);
    r.objects = u.objects;
    r.visual = u.visual;
    lstm_ = EncodeQuestion(*tape_, params_.encoder, std::span<const int>(q.tokens), &u.visual, lstm_);
    r.h = lstm_.h;
    r.h_qa = EncodeQa(*tape_, params_.encoder, lstm_.h, a);
    const UogsResult<T> g = Uogs(states_.back(), u.objects, r.h_qa, tape_->Param(params_.w1),
                                 tape_->Param(params_.w2), config_.concat, opts_);
    r.pi_hat = g.pi_hat;
    r.underflow = g.underflow;
    if (g.underflow) ++underflow_count_;
    states_.push_back(g.pi);
    rounds_.push_back(r);
  }

  const std::vector<Var<T>>& States() const { return states_; }
  const std::vector<RoundTrace<T>>& Rounds() const { return rounds_; }
  Var<T> Objects0() const { return objects0_; }
  int underflow_count() const { return underflow_count_; }
  const TrackerOptions& options() const { return opts_; }

 private:
  Tape<T>* tape_;
  GstParams params_;
  ModelConfig config_;
  TrackerOptions opts_;
  Var<T> objects0_;
  LstmState<T> lstm_;
  std::vector<Var<T>> states_;
  std::vector<RoundTrace<T>> rounds_;
  int underflow_count_ = 0;
};

}  // namespace gst
