#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gst/autodiff/ops.hpp"
#include "gst/error.hpp"

namespace gst {

inline constexpr double kCeClamp = 1e-12;

// Which supervision terms enter the objective.
enum class LossVariant {
  kFull,     // alpha (ES + PS) + (1 - alpha) IS
  kNoEsPs,   // (1 - alpha) IS
  kNoIs,     // alpha (ES + PS)
  kPsOnly,   // PS (baseline training)
};

inline std::string LossVariantName(LossVariant v) {
  switch (v) {
    case LossVariant::kFull: return "full";
    case LossVariant::kNoEsPs: return "no-es-ps";
    case LossVariant::kNoIs: return "no-is";
    case LossVariant::kPsOnly: return "ps-only";
  }
  return "full";
}

inline LossVariant ParseLossVariant(const std::string& s) {
  if (s == "full") return LossVariant::kFull;
  if (s == "no-es-ps") return LossVariant::kNoEsPs;
  if (s == "no-is") return LossVariant::kNoIs;
  if (s == "ps-only") return LossVariant::kPsOnly;
  throw ConfigError("unknown loss variant '" + s + "'");
}

struct SupervisionConfig {
  double alpha = 0.7;
  double c = 1.1;
  int max_rounds = 5;
  LossVariant variant = LossVariant::kFull;

  void Validate() const {
    if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(c > 1)) throw ConfigError("incremental supervision needs c > 1, got " + std::to_string(c));
    if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  }

  double EsWeight() const {
    return variant == LossVariant::kFull || variant == LossVariant::kNoIs ? alpha : 0.0;
  }
  double PsWeight() const {
    if (variant == LossVariant::kPsOnly) return 1.0;
    return variant == LossVariant::kFull || variant == LossVariant::kNoIs ? alpha : 0.0;
  }
  double IsWeight() const {
    return variant == LossVariant::kFull || variant == LossVariant::kNoEsPs ? 1 - alpha : 0.0;
  }
};

template <typename T>
void CheckTrace(const std::vector<Var<T>>& states, int target) {
  if (states.size() < 2) throw ContractError("loss needs at least one tracked round");
  const std::size_t m = states.front().shape().cols;
  if (target < 0 || static_cast<std::size_t>(target) >= m) {
    throw ContractError("target " + std::to_string(target) + " outside " + std::to_string(m) +
                        " objects");
  }
}

// -log max(pi[target], 1e-12)
template <typename T>
Var<T> CrossEntropy(Var<T> pi, int target) {
  return Scale(Log(ClampMin(At(pi, static_cast<std::size_t>(target)), static_cast<T>(kCeClamp))),
               T(-1));
}

// Mean CE over rounds 1..J-1; zero when J = 1.
template <typename T>
Var<T> EarlySupervision(const std::vector<Var<T>>& states, int target) {
  CheckTrace(states, target);
  Tape<T>& tape = *states.front().tape;
  const std::size_t rounds = states.size() - 1;
  if (rounds < 2) return tape.Constant(Array<T>(1, 1));
  std::vector<Var<T>> terms;
  for (std::size_t j = 1; j < rounds; ++j) terms.push_back(CrossEntropy(states[j], target));
  return Scale(Sum(Concat(std::span<const Var<T>>(terms), 1)),
               T(1) / static_cast<T>(rounds - 1));
}

template <typename T>
Var<T> PlainSupervision(const std::vector<Var<T>>& states, int target) {
  CheckTrace(states, target);
  return CrossEntropy(states.back(), target);
}

// -sum_j log(pi^(j)[t] - pi^(j-1)[t] + c)
template <typename T>
Var<T> IncrementalSupervision(const std::vector<Var<T>>& states, int target, double c) {
  CheckTrace(states, target);
  if (!(c > 1)) throw ConfigError("incremental supervision needs c > 1, got " + std::to_string(c));
  const auto t = static_cast<std::size_t>(target);
  std::vector<Var<T>> terms;
  Var<T> prev = At(states[0], t);
  for (std::size_t j = 1; j < states.size(); ++j) {
    Var<T> cur = At(states[j], t);
    terms.push_back(Log(AddScalar(Sub(cur, prev), static_cast<T>(c))));
    prev = cur;
  }
  return Scale(Sum(Concat(std::span<const Var<T>>(terms), 1)), T(-1));
}

template <typename T>
struct LossTerms {
  Var<T> es;
  Var<T> ps;
  Var<T> is;
  Var<T> total;
};

template <typename T>
LossTerms<T> SlLoss(const std::vector<Var<T>>& states, int target, const SupervisionConfig& cfg) {
  cfg.Validate();
  LossTerms<T> l;
  l.es = EarlySupervision(states, target);
  l.ps = PlainSupervision(states, target);
  l.is = IncrementalSupervision(states, target, cfg.c);
  l.total = Add(Add(Scale(l.es, static_cast<T>(cfg.EsWeight())),
                    Scale(l.ps, static_cast<T>(cfg.PsWeight()))),
                Scale(l.is, static_cast<T>(cfg.IsWeight())));
  return l;
}

struct LossBreakdown {
  double es = 0;
  double ps = 0;
  double is = 0;
  double total = 0;
  std::vector<double> round_ce;        // CE at rounds 1..J
  std::vector<double> target_beliefs;  // pi^(0..J)[target]
};

template <typename T>
LossBreakdown Breakdown(const LossTerms<T>& l, const std::vector<Var<T>>& states, int target) {
  LossBreakdown b;
  b.es = static_cast<double>(l.es.value()[0]);
  b.ps = static_cast<double>(l.ps.value()[0]);
  b.is = static_cast<double>(l.is.value()[0]);
  b.total = static_cast<double>(l.total.value()[0]);
  for (std::size_t j = 0; j < states.size(); ++j) {
    const double p = static_cast<double>(states[j].value()[target]);
    b.target_beliefs.push_back(p);
    if (j > 0) b.round_ce.push_back(-std::log(std::max(p, kCeClamp)));
  }
  return b;
}

// Success-filtered REINFORCE surrogate: a successful game (reward 1) trains
// on its own trace with the sampled guess as target; a failed game yields a
// constant zero.
template <typename T>
Var<T> RlStepLoss(const std::vector<Var<T>>& states, int sampled_guess, double reward,
                  const SupervisionConfig& cfg) {
  if (reward != 0.0 && reward != 1.0) {
    throw ContractError("reward must be 0 or 1, got " + std::to_string(reward));
  }
  if (states.empty()) throw ContractError("empty trace");
  if (reward == 0.0) return states.front().tape->Constant(Array<T>(1, 1));
  return SlLoss(states, sampled_guess, cfg).total;
}

}  // namespace gst
