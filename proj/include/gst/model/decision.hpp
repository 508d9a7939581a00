#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gst/env/rng.hpp"
#include "gst/error.hpp"

namespace gst {

// A guessing state pi^(j): a probability vector over the scene's objects.
using Belief = std::vector<double>;

enum class GuessMode { kArgmax, kSample };

inline GuessMode ParseGuessMode(const std::string& s) {
  if (s == "argmax" || s == "greedy") return GuessMode::kArgmax;
  if (s == "sample") return GuessMode::kSample;
  throw ConfigError("unknown guess mode '" + s + "'");
}

// Lowest index among the maxima.
inline std::size_t ArgmaxLowest(std::span<const double> pi) {
  if (pi.empty()) throw ContractError("argmax of empty belief");
  std::size_t best = 0;
  for (std::size_t i = 1; i < pi.size(); ++i) {
    if (pi[i] > pi[best]) best = i;
  }
  return best;
}

inline std::size_t FinalGuess(std::span<const Belief> states, GuessMode mode, Rng& rng) {
  if (states.empty()) throw ContractError("final guess needs at least one state");
  const Belief& last = states.back();
  if (mode == GuessMode::kArgmax) return ArgmaxLowest(last);
  return rng.Categorical(std::span<const double>(last));
}

// KL(p || q); terms with p_i = 0 contribute nothing, q_i = 0 with p_i > 0
// gives +inf.
inline double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("KL: length mismatch");
  double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0) continue;
    if (q[i] <= 0) return INFINITY;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

struct StopPolicy {
  enum class Kind { kNone, kConfidenceThreshold, kGainThreshold };
  Kind kind = Kind::kNone;
  double threshold = 0;

  static StopPolicy None() { return {}; }
  static StopPolicy Confidence(double tau) { return {Kind::kConfidenceThreshold, tau}; }
  static StopPolicy Gain(double epsilon) { return {Kind::kGainThreshold, epsilon}; }
};

// Confidence fires once max(pi^(j)) >= tau. Gain fires once the
// information gain KL(pi^(j) || pi^(j-1)) drops below epsilon.
inline bool StopDecision(std::span<const Belief> states, const StopPolicy& policy) {
  if (states.empty()) throw ContractError("stop decision needs a state");
  switch (policy.kind) {
    case StopPolicy::Kind::kNone: return false;
    case StopPolicy::Kind::kConfidenceThreshold: {
      const Belief& last = states.back();
      return last[ArgmaxLowest(last)] >= policy.threshold;
    }
    case StopPolicy::Kind::kGainThreshold: {
      if (states.size() < 2) throw ContractError("gain threshold needs a completed round");
      return KlDivergence(states.back(), states[states.size() - 2]) < policy.threshold;
    }
  }
  return false;
}

}  // namespace gst
