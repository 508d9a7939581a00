#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "gst/env/qgen.hpp"
#include "gst/key_value.hpp"
#include "gst/model/losses.hpp"

namespace gst {

inline constexpr int kTrainConfigVersion = 1;

enum class TrainPhase { kSl, kRl };

inline std::string TrainPhaseName(TrainPhase p) { return p == TrainPhase::kSl ? "sl" : "rl"; }
inline TrainPhase ParseTrainPhase(const std::string& s) {
  if (s == "sl") return TrainPhase::kSl;
  if (s == "rl") return TrainPhase::kRl;
  throw ConfigError("unknown phase '" + s + "'");
}

// Defaults follow the reference protocol: Adam 3e-4 / batch 64 / 20 epochs
// for SL; momentum 0.9, 1e-3 decayed by 0.99 every 25 epochs for RL.
struct TrainConfig {
  TrainPhase phase = TrainPhase::kSl;
  std::uint64_t seed = 1;
  int epochs = 20;
  int batch_size = 64;
  double lr = 3e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double momentum = 0.9;
  double lr_decay = 0.99;
  int lr_decay_every = 25;
  int patience = 5;  // epochs without validation improvement; 0 disables
  int jobs = 1;
  int rl_batches_per_epoch = 10;
  int eval_every = 5;  // RL validation snapshots, in epochs
  std::string rl_questions = "greedy";
  std::size_t rl_train_scenes = 5000;
  std::uint64_t data_seed = 1;  // scenes for RL self-play
  SupervisionConfig supervision;

  static TrainConfig ForPhase(TrainPhase p) {
    TrainConfig c;
    c.phase = p;
    if (p == TrainPhase::kRl) {
      c.lr = 1e-3;
      c.epochs = 50;
      c.patience = 0;
    }
    return c;
  }

  void Validate() const {
    if (!(lr >= 0)) throw ConfigError("lr must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("lr_decay must lie in (0, 1]");
    if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (rl_batches_per_epoch < 1) throw ConfigError("rl_batches_per_epoch must be >= 1");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (rl_train_scenes == 0) throw ConfigError("rl_train_scenes must be positive");
    ParseQGenPolicy(rl_questions);
    supervision.Validate();
  }

  static constexpr std::array<const char*, 23> kKeys = {
      "config.version", "train.phase",        "train.seed",          "train.epochs",
      "train.batch_size", "train.lr",         "train.adam_beta1",    "train.adam_beta2",
      "train.adam_eps",  "train.momentum",    "train.lr_decay",      "train.lr_decay_every",
      "train.patience",  "train.jobs",        "train.rl_batches_per_epoch",
      "train.rl_questions", "train.rl_train_scenes", "train.data_seed", "loss.alpha",
      "loss.c",          "loss.max_rounds",   "loss.variant",        "train.eval_every"};

  KeyValues ToKeyValues() const {
    KeyValues kv;
    kv.SetNumber("config.version", kTrainConfigVersion);
    kv.Set("train.phase", TrainPhaseName(phase));
    kv.SetNumber("train.seed", seed);
    kv.SetNumber("train.epochs", epochs);
    kv.SetNumber("train.batch_size", batch_size);
    kv.SetNumber("train.lr", lr);
    kv.SetNumber("train.adam_beta1", adam_beta1);
    kv.SetNumber("train.adam_beta2", adam_beta2);
    kv.SetNumber("train.adam_eps", adam_eps);
    kv.SetNumber("train.momentum", momentum);
    kv.SetNumber("train.lr_decay", lr_decay);
    kv.SetNumber("train.lr_decay_every", lr_decay_every);
    kv.SetNumber("train.patience", patience);
    kv.SetNumber("train.jobs", jobs);
    kv.SetNumber("train.rl_batches_per_epoch", rl_batches_per_epoch);
    kv.Set("train.rl_questions", rl_questions);
    kv.SetNumber("train.eval_every", eval_every);
    kv.SetNumber("train.rl_train_scenes", rl_train_scenes);
    kv.SetNumber("train.data_seed", data_seed);
    kv.SetNumber("loss.alpha", supervision.alpha);
    kv.SetNumber("loss.c", supervision.c);
    kv.SetNumber("loss.max_rounds", supervision.max_rounds);
    kv.Set("loss.variant", LossVariantName(supervision.variant));
    return kv;
  }

  // Keys absent from `kv` keep the phase defaults. Keys of other sections
  // (model.*, tracker.*, data.*) are ignored here.
  static TrainConfig FromKeyValues(const KeyValues& kv, TrainPhase default_phase) {
    const long long version = kv.GetInt("config.version", kTrainConfigVersion);
    if (version != kTrainConfigVersion) {
      throw ConfigError("unsupported config.version " + std::to_string(version));
    }
    for (const auto& [k, v] : kv.values()) {
      const bool ours = k.rfind("train.", 0) == 0 || k.rfind("loss.", 0) == 0 ||
                        k.rfind("config.", 0) == 0;
      if (!ours) continue;
      bool known = false;
      for (const char* name : kKeys) known = known || k == name;
      if (!known) throw ConfigError("unknown config key '" + k + "'");
    }
    TrainConfig c = ForPhase(ParseTrainPhase(kv.GetString("train.phase", TrainPhaseName(default_phase))));
    c.seed = static_cast<std::uint64_t>(kv.GetInt("train.seed", static_cast<long long>(c.seed)));
    c.epochs = static_cast<int>(kv.GetInt("train.epochs", c.epochs));
    c.batch_size = static_cast<int>(kv.GetInt("train.batch_size", c.batch_size));
    c.lr = kv.GetDouble("train.lr", c.lr);
    c.adam_beta1 = kv.GetDouble("train.adam_beta1", c.adam_beta1);
    c.adam_beta2 = kv.GetDouble("train.adam_beta2", c.adam_beta2);
    c.adam_eps = kv.GetDouble("train.adam_eps", c.adam_eps);
    c.momentum = kv.GetDouble("train.momentum", c.momentum);
    c.lr_decay = kv.GetDouble("train.lr_decay", c.lr_decay);
    c.lr_decay_every = static_cast<int>(kv.GetInt("train.lr_decay_every", c.lr_decay_every));
    c.patience = static_cast<int>(kv.GetInt("train.patience", c.patience));
    c.jobs = static_cast<int>(kv.GetInt("train.jobs", c.jobs));
    c.rl_batches_per_epoch =
        static_cast<int>(kv.GetInt("train.rl_batches_per_epoch", c.rl_batches_per_epoch));
    c.eval_every = static_cast<int>(kv.GetInt("train.eval_every", c.eval_every));
    c.rl_questions = kv.GetString("train.rl_questions", c.rl_questions);
    c.rl_train_scenes = static_cast<std::size_t>(
        kv.GetInt("train.rl_train_scenes", static_cast<long long>(c.rl_train_scenes)));
    c.data_seed =
        static_cast<std::uint64_t>(kv.GetInt("train.data_seed", static_cast<long long>(c.data_seed)));
    c.supervision.alpha = kv.GetDouble("loss.alpha", c.supervision.alpha);
    c.supervision.c = kv.GetDouble("loss.c", c.supervision.c);
    c.supervision.max_rounds = static_cast<int>(kv.GetInt("loss.max_rounds", c.supervision.max_rounds));
    c.supervision.variant = ParseLossVariant(kv.GetString("loss.variant", "full"));
    c.Validate();
    return c;
  }
};

}  // namespace gst
