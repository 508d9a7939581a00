#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gst/autodiff/checkpoint_io.hpp"
#include "gst/env/game.hpp"
#include "gst/key_value.hpp"
#include "gst/model/baseline.hpp"
#include "gst/model/config.hpp"
#include "gst/model/tracker.hpp"

namespace gst {

inline KeyValues TrackerOptionsToKeyValues(const TrackerOptions& o) {
  KeyValues kv;
  kv.SetNumber("tracker.max_rounds", o.max_rounds);
  kv.SetNumber("tracker.underflow_floor", o.underflow_floor);
  kv.Set("tracker.reset_on_underflow", o.reset_on_underflow ? "true" : "false");
  kv.SetNumber("tracker.smoothing", o.smoothing);
  return kv;
}

inline TrackerOptions TrackerOptionsFromKeyValues(const KeyValues& kv) {
  TrackerOptions o;
  o.max_rounds = static_cast<int>(kv.GetInt("tracker.max_rounds", o.max_rounds));
  o.underflow_floor = kv.GetDouble("tracker.underflow_floor", o.underflow_floor);
  o.reset_on_underflow = kv.GetBool("tracker.reset_on_underflow", o.reset_on_underflow);
  o.smoothing = kv.GetDouble("tracker.smoothing", o.smoothing);
  o.Validate();
  return o;
}

// Parameters plus architecture of either guesser kind.
template <typename T>
class GuesserModel {
 public:
  GuesserModel(const ModelConfig& config, std::uint64_t seed, TrackerOptions opts = {})
      : config_(config), opts_(opts), store_(seed) {
    config_.Validate();
    opts_.Validate();
    if (config_.kind == ModelKind::kGst) {
      AddGstParameters(store_, config_);
    } else {
      AddBaselineParameters(store_, config_);
    }
    Resolve();
  }

  GuesserModel(const ModelConfig& config, ParameterStore<T> store, TrackerOptions opts)
      : config_(config), opts_(opts), store_(std::move(store)) {
    config_.Validate();
    opts_.Validate();
    Resolve();
  }

  const ModelConfig& config() const { return config_; }
  const TrackerOptions& tracker_options() const { return opts_; }
  TrackerOptions& mutable_tracker_options() { return opts_; }
  const ParameterStore<T>& store() const { return store_; }
  ParameterStore<T>& mutable_store() { return store_; }
  const GstParams& gst_params() const { return gst_; }
  const BaselineParams& baseline_params() const { return baseline_; }

  KeyValues MetaKeyValues() const {
    KeyValues kv = config_.ToKeyValues();
    kv.Merge(TrackerOptionsToKeyValues(opts_));
    return kv;
  }

 private:
  void Resolve() {
    if (config_.kind == ModelKind::kGst) {
      gst_ = GstParams::Resolve(store_);
      const Array<T>& emb = store_.Value(gst_.encoder.word_embedding);
      if (emb.rows() != static_cast<std::size_t>(config_.vocab_size)) {
        throw ConfigError("word embedding rows do not match model.vocab_size");
      }
    } else {
      baseline_ = BaselineParams::Resolve(store_);
    }
  }

  ModelConfig config_;
  TrackerOptions opts_;
  ParameterStore<T> store_;
  GstParams gst_;
  BaselineParams baseline_;
};

// One dialogue on a tape, dispatching to the tracker or the baseline.
template <typename T>
class DialogueRun {
 public:
  DialogueRun(const GuesserModel<T>& model, Tape<T>& tape, const Scene& scene) {
    if (model.config().kind == ModelKind::kGst) {
      tracker_.emplace(tape, model.gst_params(), model.config(), scene, model.tracker_options());
    } else {
      baseline_.emplace(tape, model.baseline_params(), model.config(), scene);
    }
  }

  void Observe(const Question& q, Answer a) {
    if (tracker_) {
      tracker_->TrackRound(q, a);
    } else {
      baseline_->Observe(q, a);
    }
  }

  const std::vector<Var<T>>& States() const {
    return tracker_ ? tracker_->States() : baseline_->States();
  }
  int underflow_count() const { return tracker_ ? tracker_->underflow_count() : 0; }
  const Tracker<T>* tracker() const { return tracker_ ? &*tracker_ : nullptr; }

 private:
  std::optional<Tracker<T>> tracker_;
  std::optional<BaselineRun<T>> baseline_;
};

template <typename T>
DialogueRun<T> RunDialogue(const GuesserModel<T>& model, Tape<T>& tape, const Scene& scene,
                           std::span<const QaPair> dialogue) {
  DialogueRun<T> run(model, tape, scene);
  for (const QaPair& qa : dialogue) run.Observe(qa.question, qa.answer);
  return run;
}

template <typename T>
Belief ToBelief(Var<T> v) {
  const auto& vals = v.value().values();
  return Belief(vals.begin(), vals.end());
}

// Adapter for PlayGame. With `record` the tape keeps backward closures so
// a loss can be taken on the played trace afterwards.
template <typename T>
class ModelGuesser : public Guesser {
 public:
  explicit ModelGuesser(const GuesserModel<T>& model, bool record = false)
      : model_(&model), record_(record) {}

  void Reset(const Scene& scene) override {
    run_.reset();
    tape_ = std::make_unique<Tape<T>>(&model_->store(), record_);
    run_.emplace(*model_, *tape_, scene);
    states_.assign(1, ToBelief(run_->States().front()));
  }
  void Observe(const Question& q, Answer a) override {
    if (!run_) throw ContractError("guesser observed a round before Reset");
    run_->Observe(q, a);
    states_.push_back(ToBelief(run_->States().back()));
  }
  const std::vector<Belief>& States() const override { return states_; }

  Tape<T>& tape() { return *tape_; }
  const DialogueRun<T>& run() const { return *run_; }

 private:
  const GuesserModel<T>* model_;
  bool record_;
  std::unique_ptr<Tape<T>> tape_;
  std::optional<DialogueRun<T>> run_;
  std::vector<Belief> states_;
};

// Checkpoint = parameters + "key = value" metadata (model architecture,
// tracker options and whatever the caller adds: train config, epoch, metrics).
template <typename T>
void SaveModel(const std::string& path, const GuesserModel<T>& model, const KeyValues& extra = {}) {
  KeyValues meta = model.MetaKeyValues();
  meta.Merge(extra);
  SaveCheckpoint(path, model.store(), meta.ToString());
}

template <typename T>
struct LoadedModel {
  GuesserModel<T> model;
  KeyValues meta;
};

template <typename T>
LoadedModel<T> LoadModel(const std::string& path) {
  DecodedCheckpoint<T> ck = LoadCheckpoint<T>(path);
  KeyValues meta = KeyValues::Parse(ck.meta);
  GuesserModel<T> model(ModelConfig::FromKeyValues(meta), std::move(ck.store),
                        TrackerOptionsFromKeyValues(meta));
  return {std::move(model), std::move(meta)};
}

}  // namespace gst
