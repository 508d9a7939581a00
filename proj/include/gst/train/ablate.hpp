#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "gst/train/trainer.hpp"

namespace gst {

struct AblationGrid {
  std::vector<LossVariant> variants = {LossVariant::kFull, LossVariant::kNoEsPs, LossVariant::kNoIs};
  std::vector<ConcatVariant> concats = {ConcatVariant::kSymmetric, ConcatVariant::kProductOnly,
                                        ConcatVariant::kPlain};
  std::vector<double> cs = {1.1, 1.5, 2.0};
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  std::size_t Cells() const { return variants.size() * concats.size() * cs.size(); }
  void Validate() const {
    if (Cells() == 0) throw ConfigError("ablation grid is empty");
    if (seeds.empty()) throw ConfigError("ablation needs at least one seed");
  }
};

struct AblationRow {
  LossVariant variant = LossVariant::kFull;
  ConcatVariant concat = ConcatVariant::kSymmetric;
  double c = 1.1;
  std::vector<double> success;      // NewGame greedy, per seed
  std::vector<double> valid_error;  // guesser-only, per seed

  static double Mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0 : s / static_cast<double>(v.size());
  }
  double mean_success() const { return Mean(success); }
  double mean_valid_error() const { return Mean(valid_error); }

  Json ToJson() const {
    return {{"loss", LossVariantName(variant)}, {"concat", ConcatVariantName(concat)},
            {"c", c},
            {"success_rate", mean_success()},   {"valid_error", mean_valid_error()},
            {"per_seed_success", success},      {"per_seed_valid_error", valid_error}};
  }
};

inline std::string AblationTable(const std::vector<AblationRow>& rows) {
  std::string out = "loss       concat     c      success   valid_err  seeds\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %-10s %-5.2f %8.2f%% %9.2f%%  %zu\n",
                  LossVariantName(r.variant).c_str(), ConcatVariantName(r.concat).c_str(), r.c,
                  100 * r.mean_success(), 100 * r.mean_valid_error(), r.success.size());
    out += buf;
  }
  return out;
}

// One SL run per (cell, seed); each cell's row averages its seeds.
// `base` supplies the model shape, `train` the optimizer settings.
template <typename T>
std::vector<AblationRow> Ablate(const AblationGrid& grid, const ModelConfig& base,
                                const TrackerOptions& tracker, const TrainConfig& train,
                                const TemplateSet& templates,
                                const std::vector<GameRecord>& train_games,
                                const std::vector<GameRecord>& valid_games,
                                const EvalOptions& eval,
                                const std::function<void(const AblationRow&)>& on_row = {}) {
  grid.Validate();
  std::vector<AblationRow> rows;
  for (LossVariant v : grid.variants) {
    for (ConcatVariant cc : grid.concats) {
      for (double c : grid.cs) {
        AblationRow row;
        row.variant = v;
        row.concat = cc;
        row.c = c;
        for (std::uint64_t seed : grid.seeds) {
          ModelConfig mc = base;
          mc.concat = cc;
          TrainConfig tc = train;
          tc.seed = seed;
          tc.supervision.variant = v;
          tc.supervision.c = c;
          const auto result =
              TrainSl(GuesserModel<T>(mc, seed, tracker), train_games, valid_games, tc);
          EvalOptions eo = eval;
          eo.eval_seed = seed;
          row.success.push_back(Evaluate(result.model, templates, eo).success_rate);
          row.valid_error.push_back(
              valid_games.empty() ? 1.0
                                  : GuesserOnlyError(result.model, valid_games, "valid", tc.jobs)
                                        .error_rate);
        }
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace gst
